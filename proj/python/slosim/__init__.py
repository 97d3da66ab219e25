"""SLO-driven multi-dimensional autoscaling simulator."""

from slosim._core import (  # noqa: F401
    Agent,
    Assignment,
    CycleDiagnostics,
    Environment,
    ExperimentConfig,
    GroundTruthModel,
    InsufficientSamplesError,
    MetricRecord,
    MetricStore,
    MetricTable,
    ObjectiveSpec,
    OracleResult,
    ParameterSpec,
    Phase,
    RegressionModel,
    Rng,
    Scale,
    ServiceKind,
    ServiceSpec,
    ServiceTruth,
    SloSpec,
    SolverSettings,
    StructuralKnowledge,
    Trace,
    TraceEntry,
    Violation,
    agent_cycle,
    assemble_objective,
    assemble_objective_fns,
    default_initial_assignment,
    default_specs,
    explore_action,
    fit,
    global_fulfillment,
    oracle_solve,
    predict,
    report_csv,
    report_summary,
    run_experiment,
    service_fulfillment,
    slo_fulfillment,
    snap_assignment,
    solve,
    true_completion,
    validate_assignment,
    verify_trace,
)

__all__ = [n for n in dir() if not n.startswith("_")]
