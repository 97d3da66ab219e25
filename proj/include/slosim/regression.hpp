#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "slosim/domain.hpp"
#include "slosim/metrics_store.hpp"

// Per-service completion model: a degree-2 polynomial (constant, linears,
// pairwise products, squares) over min-max-normalized parent variables,
// fitted in log space so the multiplicative supply/demand surface is
// representable, with an exp link clamped to [0, 1].
//
// Observations at the clamp boundaries carry only one-sided information, so
// the fit treats y >= 1 rows as ceiling-censored (penalized only when the
// linear predictor is positive) and y <= 1e-6 rows as floor-censored,
// solving the resulting piecewise least squares by active-set iteration on
// ridge-damped normal equations.

namespace slosim {

struct NormBound {
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;
};

struct RegressionModel {
  std::vector<std::string> parents;
  std::vector<NormBound> norm;
  // Length 1 + p + p(p+1)/2: constant, linear terms, then upper-triangular
  // products z_i*z_j for i <= j.
  std::vector<double> coefficients;
  std::size_t sample_count = 0;
  // Training R^2 in observation space, on clamped predictions; 1.0 by
  // convention for a zero-variance target.
  double r_squared = 0.0;

  // Throws when a parent is missing from params, naming it.
  double predict(const std::map<std::string, double>& params) const;
  // Fast path: values aligned to `parents`.
  double predict_parents(const double* values) const;
};

struct InsufficientSamples : std::runtime_error {
  InsufficientSamples(std::size_t required, std::size_t available)
      : std::runtime_error("insufficient samples: " + std::to_string(available) +
                           " rows < " + std::to_string(required) + " features"),
        required(required), available(available) {}
  std::size_t required;
  std::size_t available;
};

std::size_t feature_count(std::size_t parents);

// Normalization bounds come from the ParameterSpec (not from data) so that
// predictions extrapolate consistently across refits.
std::vector<NormBound> norm_bounds(const ServiceSpec& spec,
                                   const std::vector<std::string>& parents);

// Least squares of completion against the parent columns of `table`.
// Throws InsufficientSamples when rows < feature count.
RegressionModel fit(const MetricTable& table, const ServiceSpec& spec,
                    const std::vector<std::string>& parents);
RegressionModel fit(const MetricTable& table, const ServiceSpec& spec);

double predict(const RegressionModel& model,
               const std::map<std::string, double>& params);

}  // namespace slosim
