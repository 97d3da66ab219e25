#include "slosim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace slosim {

namespace detail {

double CompiledService::score(const double* vals) const {
  double comp = completion(vals);
  double num = 0.0;
  for (const auto& t : slos) {
    double v = t.param_idx < 0 ? comp : vals[t.param_idx];
    num += t.weight * std::clamp(v / t.threshold, 0.0, 1.0);
  }
  return num / weight_sum;
}

}  // namespace detail

namespace {

constexpr double kEps = 1e-12;

std::vector<double> lattice_values(const ParameterSpec& p) {
  std::vector<double> out;
  int n = p.lattice_size();
  out.reserve(n);
  for (int k = 0; k < n; ++k) out.push_back(p.lattice_value(k));
  return out;
}

detail::CompiledService compile_service(const ServiceSpec& spec) {
  detail::CompiledService cs;
  cs.id = spec.id;
  for (const ParameterSpec* p : spec.adjustable_parameters()) {
    if (p->name == kCoresVar)
      cs.cores_idx = cs.params.size();
    else if (!p->discrete())
      throw std::invalid_argument(spec.id + "." + p->name +
                                  ": non-cores adjustable parameters must be discrete");
    cs.params.push_back(*p);
  }
  for (const auto& slo : spec.slos) {
    detail::SloTerm t;
    t.param_idx = -1;
    for (std::size_t i = 0; i < cs.params.size(); ++i)
      if (cs.params[i].name == slo.variable) t.param_idx = static_cast<int>(i);
    if (t.param_idx < 0 && slo.variable != kCompletionVar)
      throw std::invalid_argument(spec.id + " SLO on non-adjustable variable " +
                                  slo.variable);
    t.threshold = slo.threshold;
    t.weight = slo.weight;
    cs.slos.push_back(t);
    cs.weight_sum += slo.weight;
  }
  return cs;
}

std::vector<std::size_t> parent_indices(const detail::CompiledService& cs,
                                        const std::vector<std::string>& parents) {
  std::vector<std::size_t> idx;
  for (const auto& name : parents) {
    bool found = false;
    for (std::size_t i = 0; i < cs.params.size(); ++i) {
      if (cs.params[i].name == name) {
        idx.push_back(i);
        found = true;
      }
    }
    if (!found)
      throw std::invalid_argument(cs.id + ": model parent " + name +
                                  " is not an adjustable parameter");
  }
  return idx;
}

void check_objective_inputs(const std::vector<ServiceSpec>& specs, double budget) {
  validate_specs(specs);
  if (budget <= static_cast<double>(specs.size()) * kMinCores)
    throw std::invalid_argument("budget must exceed services * minimum core share");
}

}  // namespace

double ObjectiveSpec::evaluate(const Assignment& a) const {
  auto violations = validate_assignment(a, specs_, budget_);
  if (!violations.empty()) {
    std::string msg = "invalid assignment:";
    for (const auto& v : violations) msg += " [" + v.message + "]";
    throw std::invalid_argument(msg);
  }
  return value(a);
}

double ObjectiveSpec::value(const Assignment& a) const {
  double total = 0.0;
  for (const auto& cs : services_) {
    auto sit = a.services.find(cs.id);
    if (sit == a.services.end())
      throw std::invalid_argument("assignment missing service " + cs.id);
    double vals[16];
    for (std::size_t i = 0; i < cs.params.size(); ++i) {
      auto vit = sit->second.find(cs.params[i].name);
      if (vit == sit->second.end())
        throw std::invalid_argument("assignment missing " + cs.id + "." +
                                    cs.params[i].name);
      vals[i] = vit->second;
    }
    total += cs.score(vals);
  }
  return total / static_cast<double>(services_.size());
}

double ObjectiveSpec::service_value(const std::string& id,
                                    const std::map<std::string, double>& params) const {
  for (const auto& cs : services_) {
    if (cs.id != id) continue;
    double vals[16];
    for (std::size_t i = 0; i < cs.params.size(); ++i) {
      auto it = params.find(cs.params[i].name);
      if (it == params.end())
        throw std::invalid_argument("missing parameter " + cs.params[i].name);
      vals[i] = it->second;
    }
    return cs.score(vals);
  }
  throw std::invalid_argument("unknown service " + id);
}

ObjectiveSpec assemble_objective(const std::map<std::string, RegressionModel>& models,
                                 const std::vector<ServiceSpec>& specs,
                                 double budget, SolverSettings settings) {
  check_objective_inputs(specs, budget);
  ObjectiveSpec obj;
  obj.specs_ = specs;
  obj.budget_ = budget;
  obj.settings_ = std::move(settings);
  for (const auto& spec : specs) {
    auto mit = models.find(spec.id);
    if (mit == models.end())
      throw std::invalid_argument("no model for service " + spec.id);
    if (mit->second.parents != spec.completion_parents)
      throw std::invalid_argument(spec.id +
                                  ": model parents do not match completion_parents");
    detail::CompiledService cs = compile_service(spec);
    auto idx = parent_indices(cs, mit->second.parents);
    RegressionModel model = mit->second;
    cs.completion = [model = std::move(model), idx](const double* vals) {
      double parent_vals[10];
      for (std::size_t j = 0; j < idx.size(); ++j) parent_vals[j] = vals[idx[j]];
      return model.predict_parents(parent_vals);
    };
    obj.services_.push_back(std::move(cs));
  }
  return obj;
}

ObjectiveSpec assemble_objective(const std::map<std::string, CompletionFn>& models,
                                 const std::vector<ServiceSpec>& specs,
                                 double budget, SolverSettings settings) {
  check_objective_inputs(specs, budget);
  ObjectiveSpec obj;
  obj.specs_ = specs;
  obj.budget_ = budget;
  obj.settings_ = std::move(settings);
  for (const auto& spec : specs) {
    auto mit = models.find(spec.id);
    if (mit == models.end())
      throw std::invalid_argument("no completion function for service " + spec.id);
    detail::CompiledService cs = compile_service(spec);
    std::vector<std::string> names;
    for (const auto& p : cs.params) names.push_back(p.name);
    CompletionFn fn = mit->second;
    cs.completion = [fn = std::move(fn), names](const double* vals) {
      std::map<std::string, double> params;
      for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = vals[i];
      return fn(params);
    };
    obj.services_.push_back(std::move(cs));
  }
  return obj;
}

Assignment random_assignment(const std::vector<ServiceSpec>& specs, double budget,
                             std::mt19937_64& rng) {
  std::size_t n = specs.size();
  if (budget <= static_cast<double>(n) * kMinCores)
    throw std::invalid_argument("budget must exceed services * minimum core share");
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> e(n);
  double sum = 0.0;
  for (auto& v : e) {
    v = expo(rng);
    sum += v;
  }
  Assignment a;
  a.budget = budget;
  double spare = budget - static_cast<double>(n) * kMinCores;
  for (std::size_t i = 0; i < n; ++i) {
    const ServiceSpec& spec = specs[i];
    a.set(spec.id, kCoresVar, kMinCores + spare * e[i] / sum);
    for (const ParameterSpec* p : spec.adjustable_parameters()) {
      if (p->name == kCoresVar) continue;
      if (p->discrete()) {
        std::uniform_int_distribution<int> pick(0, p->lattice_size() - 1);
        a.set(spec.id, p->name, p->lattice_value(pick(rng)));
      } else {
        std::uniform_real_distribution<double> pick(p->lower, p->upper);
        a.set(spec.id, p->name, pick(rng));
      }
    }
  }
  return a;
}

namespace {

// Candidate core values for the active service: the current value shifted by
// integer multiples of delta, the operational minimum, and the full
// remaining budget, all within [kMinCores, remaining].
std::vector<double> core_candidates(double cur, double remaining, double delta) {
  std::set<double> vals{kMinCores, cur, remaining};
  int lo = -static_cast<int>((cur - kMinCores) / delta) - 1;
  int hi = static_cast<int>(std::floor((remaining - cur) / delta));
  for (int i = lo; i <= hi; ++i) vals.insert(cur + i * delta);
  std::vector<double> out;
  for (double v : vals)
    if (v >= kMinCores - kEps && v <= remaining + kEps) out.push_back(v);
  return out;
}

using State = std::vector<std::vector<double>>;

struct Candidate {
  std::vector<double> vals;
  double value = -1.0;
  std::vector<double> key;
  bool set = false;
};

// Tie-break key: cores first, then the non-cores parameters in reverse
// declaration order, so equal-value candidates prefer fewer cores, then a
// smaller model, then lower quality.
void local_key(const detail::CompiledService& cs, const std::vector<double>& vals,
               std::vector<double>& key) {
  key.clear();
  key.push_back(vals[cs.cores_idx]);
  for (std::size_t i = cs.params.size(); i-- > 0;)
    if (i != cs.cores_idx) key.push_back(vals[i]);
}

// Global tie-break: lower core total, then lower model sizes, then lower
// remaining discrete values (quality).
std::vector<double> global_key(const std::vector<detail::CompiledService>& services,
                               const State& state) {
  double cores = 0.0, models = 0.0, rest = 0.0;
  for (std::size_t s = 0; s < services.size(); ++s) {
    const auto& cs = services[s];
    for (std::size_t i = 0; i < cs.params.size(); ++i) {
      if (i == cs.cores_idx)
        cores += state[s][i];
      else if (cs.params[i].name == "model_size")
        models += state[s][i];
      else
        rest += state[s][i];
    }
  }
  return {cores, models, rest};
}

bool better(double v1, const std::vector<double>& k1, double v0,
            const std::vector<double>& k0) {
  if (v1 != v0) return v1 > v0;
  return std::lexicographical_compare(k1.begin(), k1.end(), k0.begin(), k0.end());
}

struct Axis {
  std::size_t param_idx;
  std::vector<double> values;
};

// Exhaustive scan of the axes' cross product times the core candidates,
// holding every other service fixed. Returns the best candidate under
// (value, local key).
Candidate scan_axes(const detail::CompiledService& cs, const std::vector<double>& cur,
                    const std::vector<Axis>& axes, const std::vector<double>& ccands,
                    double other_sum, double inv_n) {
  Candidate best;
  std::vector<double> vals = cur;
  std::vector<std::size_t> odo(axes.size(), 0);
  std::vector<double> key;
  while (true) {
    for (std::size_t d = 0; d < axes.size(); ++d)
      vals[axes[d].param_idx] = axes[d].values[odo[d]];
    for (double c : ccands) {
      vals[cs.cores_idx] = c;
      double sv = cs.score(vals.data());
      double gv = (other_sum + sv) * inv_n;
      local_key(cs, vals, key);
      if (!best.set || better(gv, key, best.value, best.key)) {
        best.vals = vals;
        best.value = gv;
        best.key = key;
        best.set = true;
      }
    }
    // Odometer increment over the axes.
    std::size_t d = 0;
    for (; d < axes.size(); ++d) {
      if (++odo[d] < axes[d].values.size()) break;
      odo[d] = 0;
    }
    if (d == axes.size()) break;
  }
  return best;
}

}  // namespace

Assignment solve(const ObjectiveSpec& obj, std::mt19937_64& rng) {
  const auto& services = obj.compiled();
  const auto& st = obj.settings();
  const std::size_t n = services.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double budget = obj.budget();
  const double delta = st.core_step;

  auto to_state = [&](const Assignment& a) {
    State state(n);
    for (std::size_t s = 0; s < n; ++s) {
      const auto& vars = a.services.at(services[s].id);
      state[s].resize(services[s].params.size());
      for (std::size_t i = 0; i < services[s].params.size(); ++i)
        state[s][i] = vars.at(services[s].params[i].name);
    }
    return state;
  };
  auto from_state = [&](const State& state) {
    Assignment a;
    a.budget = budget;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < services[s].params.size(); ++i)
        a.set(services[s].id, services[s].params[i].name, state[s][i]);
    return a;
  };

  std::vector<State> starts;
  if (st.incumbent.has_value()) {
    auto violations = validate_assignment(*st.incumbent, obj.specs(), budget);
    if (!violations.empty())
      throw std::invalid_argument("incumbent assignment invalid: " +
                                  violations.front().message);
    starts.push_back(to_state(*st.incumbent));
  }
  for (int r = 0; r < st.restarts; ++r)
    starts.push_back(to_state(random_assignment(obj.specs(), budget, rng)));

  State best;
  double best_value = -1.0;
  std::vector<double> best_key;
  bool have_best = false;

  for (const State& start : starts) {
    State cur = start;
    std::vector<double> scores(n);
    double cur_value = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      scores[s] = services[s].score(cur[s].data());
      cur_value += scores[s];
    }
    cur_value *= inv_n;

    for (int sweep = 0; sweep < st.sweep_cap; ++sweep) {
      double prev = cur_value;
      for (std::size_t s = 0; s < n; ++s) {
        const auto& cs = services[s];
        double others_cores = 0.0;
        for (std::size_t t = 0; t < n; ++t)
          if (t != s) others_cores += cur[t][services[t].cores_idx];
        double remaining = budget - others_cores;
        double other_sum = 0.0;
        for (std::size_t t = 0; t < n; ++t)
          if (t != s) other_sum += scores[t];

        std::vector<Axis> coarse;
        bool any_coarsened = false;
        for (std::size_t i = 0; i < cs.params.size(); ++i) {
          if (i == cs.cores_idx) continue;
          std::vector<double> vals = lattice_values(cs.params[i]);
          if (static_cast<int>(vals.size()) > st.coarse_threshold) {
            any_coarsened = true;
            std::vector<double> sub;
            for (std::size_t k = 0; k < vals.size();
                 k += static_cast<std::size_t>(std::max(1, st.coarse_stride)))
              sub.push_back(vals[k]);
            if (sub.back() != vals.back()) sub.push_back(vals.back());
            vals = std::move(sub);
          }
          coarse.push_back({i, std::move(vals)});
        }
        auto ccands = core_candidates(cur[s][cs.cores_idx], remaining, delta);

        Candidate found = scan_axes(cs, cur[s], coarse, ccands, other_sum, inv_n);
        if (any_coarsened) {
          std::vector<Axis> fine;
          for (std::size_t i = 0; i < cs.params.size(); ++i) {
            if (i == cs.cores_idx) continue;
            std::vector<double> vals = lattice_values(cs.params[i]);
            if (static_cast<int>(vals.size()) > st.coarse_threshold) {
              double center = found.vals[i];
              double window = st.fine_window * *cs.params[i].step + kEps;
              std::vector<double> sub;
              for (double v : vals)
                if (std::abs(v - center) <= window) sub.push_back(v);
              vals = std::move(sub);
            }
            fine.push_back({i, std::move(vals)});
          }
          Candidate refined = scan_axes(cs, cur[s], fine, ccands, other_sum, inv_n);
          if (refined.value >= found.value) found = refined;
        }
        if (found.set && found.value >= cur_value) {
          cur[s] = found.vals;
          scores[s] = cs.score(cur[s].data());
          cur_value = 0.0;
          for (double v : scores) cur_value += v;
          cur_value *= inv_n;
        }
      }

      // Pairwise core transfers of delta, kept when they improve the value.
      bool moved = true;
      while (moved) {
        moved = false;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double ci = cur[i][services[i].cores_idx];
            if (ci - delta < kMinCores - kEps) continue;
            std::vector<double> vi = cur[i];
            std::vector<double> vj = cur[j];
            vi[services[i].cores_idx] -= delta;
            vj[services[j].cores_idx] += delta;
            double si = services[i].score(vi.data());
            double sj = services[j].score(vj.data());
            double nv = 0.0;
            for (std::size_t t = 0; t < n; ++t)
              if (t != i && t != j) nv += scores[t];
            nv = (nv + si + sj) * inv_n;
            if (nv > cur_value) {
              cur[i] = std::move(vi);
              cur[j] = std::move(vj);
              scores[i] = si;
              scores[j] = sj;
              cur_value = nv;
              moved = true;
            }
          }
        }
      }
      if (cur_value - prev < st.tolerance) break;
    }

    auto key = global_key(services, cur);
    if (!have_best || better(cur_value, key, best_value, best_key)) {
      best = cur;
      best_value = cur_value;
      best_key = key;
      have_best = true;
    }
  }

  if (st.polish) {
    // Strict-improvement single-variable moves until a fixed point: the
    // result is 1-swap locally optimal under the evaluator.
    std::vector<double> scores(n);
    for (std::size_t s = 0; s < n; ++s) scores[s] = services[s].score(best[s].data());
    bool improved = true;
    int accepted = 0;
    while (improved && accepted < 2000) {
      improved = false;
      double total = 0.0;
      for (std::size_t s = 0; s < n; ++s) total += best[s][services[s].cores_idx];
      for (std::size_t s = 0; s < n; ++s) {
        const auto& cs = services[s];
        for (std::size_t i = 0; i < cs.params.size(); ++i) {
          bool is_cores = i == cs.cores_idx;
          if (!is_cores && !cs.params[i].discrete()) continue;
          double move = is_cores ? delta : *cs.params[i].step;
          for (double d : {move, -move}) {
            double v = best[s][i] + d;
            if (is_cores) {
              if (v < kMinCores - kEps) continue;
              if (d > 0 && total + d > budget + kEps) continue;
            } else if (v < cs.params[i].lower - kBoundTol ||
                       v > cs.params[i].upper + kBoundTol) {
              continue;
            }
            std::vector<double> cand = best[s];
            cand[i] = v;
            double sv = cs.score(cand.data());
            double nv = 0.0;
            for (std::size_t t = 0; t < n; ++t) nv += t == s ? sv : scores[t];
            nv *= inv_n;
            if (nv > best_value) {
              best[s] = std::move(cand);
              scores[s] = sv;
              best_value = nv;
              improved = true;
              ++accepted;
              total = 0.0;
              for (std::size_t t = 0; t < n; ++t)
                total += best[t][services[t].cores_idx];
            }
          }
        }
      }
    }
  }

  return from_state(best);
}

OracleResult oracle_solve(const Environment& env, const OracleCoarsening& c) {
  const auto& specs = env.specs();
  const std::size_t n = specs.size();
  const double budget = env.current().budget;
  const int total_units = static_cast<int>(std::floor(budget / c.core_step + kEps));
  if (total_units < static_cast<int>(n))
    throw std::invalid_argument("budget too small for the oracle core grid");

  // Per service: for every core grid value, the best lattice configuration
  // and its true fulfillment. The objective is separable across services
  // once the core split is fixed, so this is exhaustive.
  struct PerCore {
    double score = -1.0;
    std::map<std::string, double> params;
  };
  std::vector<std::vector<PerCore>> table(n);
  std::vector<detail::CompiledService> compiled;
  for (const auto& spec : specs) compiled.push_back(compile_service(spec));

  for (std::size_t s = 0; s < n; ++s) {
    const ServiceSpec& spec = specs[s];
    const auto& cs = compiled[s];
    double cap = std::min(cs.params[cs.cores_idx].upper,
                          budget - static_cast<double>(n - 1) * c.core_step);
    int max_units = std::min(total_units - static_cast<int>(n) + 1,
                             static_cast<int>(std::floor(cap / c.core_step + kEps)));
    if (max_units < 1)
      throw std::invalid_argument("oracle core grid infeasible for " + spec.id);
    std::vector<Axis> axes;
    for (std::size_t i = 0; i < cs.params.size(); ++i) {
      if (i == cs.cores_idx) continue;
      std::vector<double> vals = lattice_values(cs.params[i]);
      auto stride_it = c.quality_stride.find(spec.id);
      if (cs.params[i].name == "data_quality" && stride_it != c.quality_stride.end()) {
        std::size_t stride_steps = static_cast<std::size_t>(
            std::max(1.0, std::round(stride_it->second / *cs.params[i].step)));
        std::vector<double> sub;
        for (std::size_t k = 0; k < vals.size(); k += stride_steps) sub.push_back(vals[k]);
        if (sub.back() != vals.back()) sub.push_back(vals.back());
        vals = std::move(sub);
      }
      axes.push_back({i, std::move(vals)});
    }

    table[s].resize(max_units + 1);
    std::vector<double> vals(cs.params.size());
    for (int u = 1; u <= max_units; ++u) {
      double cores = u * c.core_step;
      PerCore best;
      std::vector<std::size_t> odo(axes.size(), 0);
      while (true) {
        vals[cs.cores_idx] = cores;
        for (std::size_t d = 0; d < axes.size(); ++d)
          vals[axes[d].param_idx] = axes[d].values[odo[d]];
        std::map<std::string, double> params;
        for (std::size_t i = 0; i < cs.params.size(); ++i)
          params[cs.params[i].name] = vals[i];
        params[kCompletionVar] = env.true_completion(spec.id, params);
        double score = service_fulfillment(params, spec.slos);
        if (score > best.score) {
          params.erase(kCompletionVar);
          best.score = score;
          best.params = std::move(params);
        }
        std::size_t d = 0;
        for (; d < axes.size(); ++d) {
          if (++odo[d] < axes[d].values.size()) break;
          odo[d] = 0;
        }
        if (d == axes.size()) break;
      }
      table[s][u] = std::move(best);
    }
  }

  // Enumerate compositions of total_units across services (>= 1 unit each).
  std::vector<int> units(n, 1);
  std::vector<int> best_units;
  double best_value = -1.0;
  std::function<void(std::size_t, int, double)> recurse =
      [&](std::size_t s, int left, double acc) {
        if (s + 1 == n) {
          if (left < 1 || left >= static_cast<int>(table[s].size())) return;
          units[s] = left;
          double value = (acc + table[s][left].score) / static_cast<double>(n);
          if (value > best_value) {
            best_value = value;
            best_units = units;
          }
          return;
        }
        int max_u = std::min(left - static_cast<int>(n - s - 1),
                             static_cast<int>(table[s].size()) - 1);
        for (int u = 1; u <= max_u; ++u) {
          units[s] = u;
          recurse(s + 1, left - u, acc + table[s][u].score);
        }
      };
  recurse(0, total_units, 0.0);
  if (best_units.empty())
    throw std::invalid_argument("oracle found no feasible core composition");

  OracleResult result;
  result.value = best_value;
  result.assignment.budget = budget;
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& [name, value] : table[s][best_units[s]].params)
      result.assignment.set(specs[s].id, name, value);
    result.assignment.set(specs[s].id, kCoresVar, best_units[s] * c.core_step);
  }
  return result;
}

}  // namespace slosim
