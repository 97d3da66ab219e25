#include "slosim/regression.hpp"

#include <algorithm>
#include <cmath>

namespace slosim {

namespace {

constexpr double kLogFloor = 1e-6;       // below this, y pins the floor target
constexpr double kCeilTol = 1e-12;       // y >= 1 - tol counts as ceiling
constexpr double kRidgeLinear = 1e-8;    // constant + linear terms
constexpr double kRidgeQuadratic = 1e-6; // curvature terms; the true surface
                                         // is near-linear in the normalized
                                         // log coordinates, so curvature gets
                                         // the stronger damping
constexpr int kMaxActiveSetIters = 100;

double normalize(double x, const NormBound& b) {
  double v = b.log_scale ? std::log(std::max(x, 1e-300)) : x;
  return (v - b.lo) / (b.hi - b.lo);
}

// Features: [1, z_0..z_{p-1}, z_i*z_j for i <= j].
void featurize_row(const double* values, const std::vector<NormBound>& norm,
                   double* out) {
  std::size_t p = norm.size();
  out[0] = 1.0;
  for (std::size_t j = 0; j < p; ++j) out[1 + j] = normalize(values[j], norm[j]);
  std::size_t k = 1 + p;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) out[k++] = out[1 + i] * out[1 + j];
}

// Solves A x = b for symmetric positive definite A (row-major n x n).
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b,
                                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (sum <= 0.0)
          throw std::runtime_error("normal equations not positive definite");
        a[i * n + i] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
  }
  // Forward then backward substitution, reusing b for the solution.
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= a[i * n + k] * b[k];
    b[i] = sum / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double sum = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) sum -= a[k * n + ii] * b[k];
    b[ii] = sum / a[ii * n + ii];
  }
  return b;
}

}  // namespace

std::size_t feature_count(std::size_t parents) {
  return 1 + parents + parents * (parents + 1) / 2;
}

std::vector<NormBound> norm_bounds(const ServiceSpec& spec,
                                   const std::vector<std::string>& parents) {
  std::vector<NormBound> out;
  out.reserve(parents.size());
  for (const auto& name : parents) {
    const ParameterSpec* p = spec.find_parameter(name);
    if (p == nullptr)
      throw std::invalid_argument(spec.id + ": unknown parent variable " + name);
    NormBound b;
    b.log_scale = p->scale == Scale::Log;
    if (b.log_scale) {
      double lo = p->lower > 0.0 ? p->lower : kMinCores;
      b.lo = std::log(lo);
      b.hi = std::log(p->upper);
    } else {
      b.lo = p->lower;
      b.hi = p->upper;
    }
    out.push_back(b);
  }
  return out;
}

double RegressionModel::predict_parents(const double* values) const {
  std::size_t p = parents.size();
  std::size_t nf = feature_count(p);
  double feats[66];  // p <= 10 in practice; 66 covers p = 10
  if (nf > sizeof(feats) / sizeof(feats[0]))
    throw std::invalid_argument("too many parents");
  featurize_row(values, norm, feats);
  double eta = 0.0;
  for (std::size_t i = 0; i < nf; ++i) eta += coefficients[i] * feats[i];
  return std::clamp(std::exp(eta), 0.0, 1.0);
}

double RegressionModel::predict(const std::map<std::string, double>& params) const {
  std::vector<double> values(parents.size());
  for (std::size_t j = 0; j < parents.size(); ++j) {
    auto it = params.find(parents[j]);
    if (it == params.end())
      throw std::invalid_argument("predict: missing parent " + parents[j]);
    values[j] = it->second;
  }
  return predict_parents(values.data());
}

double predict(const RegressionModel& model,
               const std::map<std::string, double>& params) {
  return model.predict(params);
}

RegressionModel fit(const MetricTable& table, const ServiceSpec& spec,
                    const std::vector<std::string>& parents) {
  std::size_t p = parents.size();
  if (p == 0 || p > 10)
    throw std::invalid_argument("fit: parent count must be in [1, 10]");
  std::size_t nf = feature_count(p);
  std::size_t n = table.row_count();
  if (n < nf) throw InsufficientSamples(nf, n);

  std::vector<std::size_t> col_index(p + 1);
  auto find_col = [&](const std::string& name) {
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      if (table.columns[c] == name) return c;
    throw std::invalid_argument("fit: table lacks column " + name);
  };
  for (std::size_t j = 0; j < p; ++j) col_index[j] = find_col(parents[j]);
  std::size_t target_col = find_col(kCompletionVar);

  RegressionModel model;
  model.parents = parents;
  model.norm = norm_bounds(spec, parents);
  model.sample_count = n;

  std::vector<double> features(n * nf);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double vals[10];
    for (std::size_t j = 0; j < p; ++j) vals[j] = table.rows[i][col_index[j]];
    featurize_row(vals, model.norm, &features[i * nf]);
    y[i] = table.rows[i][target_col];
  }

  const double log_floor = std::log(kLogFloor);
  enum class Row { Uncensored, Ceiling, Floor };
  std::vector<Row> kind(n);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] >= 1.0 - kCeilTol) {
      kind[i] = Row::Ceiling;
      target[i] = 0.0;
    } else if (y[i] <= kLogFloor) {
      kind[i] = Row::Floor;
      target[i] = log_floor;
    } else {
      kind[i] = Row::Uncensored;
      target[i] = std::log(y[i]);
    }
  }

  std::vector<double> ridge(nf, kRidgeLinear);
  for (std::size_t k = 1 + p; k < nf; ++k) ridge[k] = kRidgeQuadratic;

  std::vector<char> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = kind[i] == Row::Uncensored;
  std::vector<double> beta(nf, 0.0);
  std::vector<double> eta(n, 0.0);
  for (int iter = 0; iter < kMaxActiveSetIters; ++iter) {
    bool any = std::any_of(active.begin(), active.end(), [](char c) { return c; });
    if (any) {
      std::vector<double> gram(nf * nf, 0.0);
      std::vector<double> rhs(nf, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        const double* f = &features[i * nf];
        for (std::size_t a = 0; a < nf; ++a) {
          rhs[a] += f[a] * target[i];
          for (std::size_t b = 0; b <= a; ++b) gram[a * nf + b] += f[a] * f[b];
        }
      }
      for (std::size_t a = 0; a < nf; ++a) {
        gram[a * nf + a] += ridge[a];
        for (std::size_t b = 0; b < a; ++b) gram[b * nf + a] = gram[a * nf + b];
      }
      beta = cholesky_solve(std::move(gram), std::move(rhs), nf);
    } else {
      std::fill(beta.begin(), beta.end(), 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double* f = &features[i * nf];
      double e = 0.0;
      for (std::size_t a = 0; a < nf; ++a) e += beta[a] * f[a];
      eta[i] = e;
    }
    // A censored row re-enters the problem only while its prediction lies on
    // the wrong side of its boundary.
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      char want = kind[i] == Row::Uncensored ||
                  (kind[i] == Row::Ceiling && eta[i] < 0.0) ||
                  (kind[i] == Row::Floor && eta[i] > log_floor);
      if (want != active[i]) {
        active[i] = want;
        changed = true;
      }
    }
    if (!changed) break;
  }

  model.coefficients = beta;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = std::clamp(std::exp(eta[i]), 0.0, 1.0);
    sse += (pred - y[i]) * (pred - y[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  model.r_squared = sst < 1e-12 ? 1.0 : 1.0 - sse / sst;
  return model;
}

RegressionModel fit(const MetricTable& table, const ServiceSpec& spec) {
  return fit(table, spec, spec.completion_parents);
}

}  // namespace slosim
