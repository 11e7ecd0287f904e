#include "gbmc/experiments.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gbmc/errors.hpp"
#include "gbmc/exterior.hpp"
#include "gbmc/geometry.hpp"
#include "gbmc/rng.hpp"
#include "gbmc/stochastic.hpp"

namespace gbmc {

namespace {

using exterior::CurvatureTensor;
using exterior::GradedOperator;
using exterior::Matrix;
using exterior::Vector;

Matrix random_matrix(int n, RngStream& rng) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m;
}

Matrix random_symmetric(int n, RngStream& rng) {
  const Matrix m = random_matrix(n, rng);
  return 0.5 * (m + m.transpose());
}

// Signed sums of Gauss forms span the algebraic curvature tensors.
CurvatureTensor random_curvature(int n, RngStream& rng) {
  CurvatureTensor r(n);
  for (int k = 0; k < 3; ++k) {
    auto g = CurvatureTensor::gauss_form(random_symmetric(n, rng));
    if (k == 1) g *= -1.0;
    r += g;
  }
  return r;
}

GradedOperator power(const GradedOperator& op, int k) {
  GradedOperator out = GradedOperator::identity(op.dimension());
  for (int i = 0; i < k; ++i) out = out * op;
  return out;
}

double loglog_slope(const std::vector<SeriesPoint>& s) {
  double mx = 0.0, my = 0.0;
  for (const auto& p : s) {
    mx += std::log(p.x);
    my += std::log(p.y);
  }
  mx /= s.size();
  my /= s.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : s) {
    sxy += (std::log(p.x) - mx) * (std::log(p.y) - my);
    sxx += (std::log(p.x) - mx) * (std::log(p.x) - mx);
  }
  return sxy / sxx;
}

struct Mean {
  double value = 0.0;
  double standard_error = 0.0;
};

Mean mean_of(const std::vector<double>& v) {
  double s = 0.0, s2 = 0.0;
  for (double x : v) s += x;
  const double m = s / v.size();
  for (double x : v) s2 += (x - m) * (x - m);
  return {m, std::sqrt(s2 / (v.size() - 1.0) / v.size())};
}

// Self-normalised importance mean of f under weights exp(logw).
Mean weighted_mean(const std::vector<double>& logw, const std::vector<double>& f) {
  const double top = *std::max_element(logw.begin(), logw.end());
  double sw = 0.0, swf = 0.0;
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) {
    w[i] = std::exp(logw[i] - top);
    sw += w[i];
    swf += w[i] * f[i];
  }
  const double m = swf / sw;
  double var = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) var += w[i] * w[i] * (f[i] - m) * (f[i] - m);
  return {m, std::sqrt(var) / sw};
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(lo * std::pow(hi / lo, k / (count - 1.0)));
  return out;
}

void require_samples(int samples, int minimum) {
  if (samples < minimum) throw ValidationError("diagnostics need samples >= " + std::to_string(minimum));
}

}  // namespace

CancellationSuite cancellation_suite(std::uint64_t seed, int instances, double tolerance) {
  if (instances < 1) throw ValidationError("cancellation suite needs instances >= 1");
  if (!(tolerance > 0.0)) throw ValidationError("cancellation tolerance must be positive");
  CancellationSuite suite;
  suite.tolerance = tolerance;
  std::uint64_t stream = 0;
  auto record = [&](CancellationCase& c, double value) {
    ++c.instances;
    c.max_abs = std::max(c.max_abs, std::abs(value));
    if (!(std::abs(value) < tolerance)) ++c.failures;
  };

  for (int n = 2; n <= 6; ++n) {
    for (int i = 0; 2 * i < n; ++i) {
      for (int j = 0; 2 * i + j < n; ++j) {
        CancellationCase c{"interior", n, i, j};
        RngStream rng(seed, ++stream);
        for (int k = 0; k < instances; ++k) {
          GradedOperator prod = GradedOperator::identity(n);
          for (int a = 0; a < i; ++a) {
            const std::vector<exterior::PairTerm> terms{{random_matrix(n, rng), random_matrix(n, rng), 1.0}};
            prod = prod * exterior::pair_extend(n, terms);
          }
          for (int b = 0; b < j; ++b) prod = prod * exterior::derivation_extend(random_matrix(n, rng));
          record(c, exterior::supertrace(prod));
        }
        suite.cases.push_back(c);
      }
    }
    const int m = n - 1;
    for (int k = 0; 2 * k < m; ++k) {
      for (int l = 0; 2 * k + l < m; ++l) {
        CancellationCase c{"boundary", n, k, l};
        RngStream rng(seed, ++stream);
        for (int s = 0; s < instances; ++s) {
          const GradedOperator dr = exterior::curvature_to_operator(random_curvature(m, rng));
          const GradedOperator da = exterior::derivation_extend(random_symmetric(m, rng));
          record(c, exterior::supertrace(power(dr, k) * power(da, l)));
        }
        suite.cases.push_back(c);
      }
    }
  }
  for (const auto& c : suite.cases) {
    suite.total += c.instances;
    suite.failures += c.failures;
    suite.max_abs = std::max(suite.max_abs, c.max_abs);
  }
  return suite;
}

bool DiagnosticsReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const DiagnosticCheck& c) { return c.passed; });
}

DiagnosticCheck local_time_exponent(std::uint64_t seed, int samples, int steps) {
  require_samples(samples, 10);
  DiagnosticCheck c;
  c.name = "local_time_exponent";
  c.description = "slope of log E[lambda_t] against log t, unit disk, start on the boundary";
  c.target = 0.5;
  c.tolerance = 0.05;
  const auto disk = geometry::model_catalog("ball", {{"dimension", 2}});
  Vector x(2);
  x << 1.0, 0.0;
  std::uint64_t stream = 0;
  for (double t : log_grid(1e-3, 1e-1, 5)) {
    RngStream rng(seed, ++stream);
    std::vector<double> lam;
    for (int i = 0; i < samples; ++i)
      lam.push_back(stochastic::simulate_reflected_bm(disk, x, t, steps, rng, false).final_local_time);
    const Mean m = mean_of(lam);
    c.series.push_back({t, m.value, m.standard_error});
  }
  c.value = loglog_slope(c.series);
  c.passed = std::abs(c.value - c.target) <= c.tolerance;
  return c;
}

DiagnosticCheck holonomy_slope(std::uint64_t seed, int samples, int steps) {
  require_samples(samples, 10);
  DiagnosticCheck c;
  c.name = "holonomy_slope";
  c.description = "slope of log E|U_t - I| against log t for bridge loops on the unit 2-sphere";
  c.target = 1.0;
  c.tolerance = 0.15;
  const auto sphere = geometry::model_catalog("sphere", {{"dimension", 2}});
  Vector x(3);
  x << 0.0, 0.0, 1.0;
  std::uint64_t stream = 100;
  for (double t : log_grid(1e-3, 1e-1, 5)) {
    RngStream rng(seed, ++stream);
    std::vector<double> logw, f;
    for (int i = 0; i < samples; ++i) {
      const auto p = stochastic::simulate_bridge(sphere, x, t, steps, rng);
      if (!p.valid) continue;
      logw.push_back(p.log_weight);
      f.push_back((stochastic::evolve_transport(sphere, p).matrix - Matrix::Identity(2, 2)).norm());
    }
    const Mean m = weighted_mean(logw, f);
    c.series.push_back({t, m.value, m.standard_error});
  }
  c.value = loglog_slope(c.series);
  c.passed = std::abs(c.value - c.target) <= c.tolerance;
  return c;
}

DiagnosticCheck confinement_monotone(std::uint64_t seed, int samples, int steps) {
  require_samples(samples, 10);
  DiagnosticCheck c;
  c.name = "confinement_monotone";
  c.description = "fraction of bridge loops on the unit disk staying within distance 0.3 of (0.2, 0.1)";
  const auto disk = geometry::model_catalog("ball", {{"dimension", 2}});
  Vector x(2);
  x << 0.2, 0.1;
  const double rho = 0.3;
  std::uint64_t stream = 200;
  for (double t : {rho * rho / 100.0, 0.01, 0.02, 0.04, 0.08}) {
    RngStream rng(seed, ++stream);
    const auto f = stochastic::confinement_fraction(disk, x, rho, t, samples, rng, steps);
    c.series.push_back({t, f.value, f.standard_error});
  }
  // value: largest increase of the fraction between consecutive t, in combined standard errors
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < c.series.size(); ++k) {
    const double se = std::hypot(c.series[k].standard_error, c.series[k + 1].standard_error);
    const double rise = c.series[k + 1].y - c.series[k].y;
    worst = std::max(worst, se > 0.0 ? rise / se : (rise > 0.0 ? HUGE_VAL : (rise < 0.0 ? -HUGE_VAL : 0.0)));
  }
  c.value = worst;
  c.target = 0.0;
  c.tolerance = 2.0;
  c.passed = worst <= c.tolerance && c.series.front().y > 0.999;
  return c;
}

DiagnosticCheck epsilon_convergence(std::uint64_t seed, int samples, int steps) {
  require_samples(samples, 10);
  DiagnosticCheck c;
  c.name = "epsilon_convergence";
  c.description = "mean operator-norm gap between epsilon-penalised and exact-jump functionals, unit disk, t = 0.1";
  c.target = 0.0;
  c.tolerance = 1e-2;
  const auto disk = geometry::model_catalog("ball", {{"dimension", 2}});
  Vector x(2);
  x << 1.0, 0.0;
  const std::vector<double> eps = {1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<std::vector<double>> gaps(eps.size());
  RngStream rng(seed, 300);
  for (int i = 0; i < samples; ++i) {
    const auto p = stochastic::simulate_reflected_bm(disk, x, 0.1, steps, rng);
    const Matrix exact = stochastic::evolve_functional(disk, p).matrix();
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const Matrix pen =
          stochastic::evolve_functional(disk, p, stochastic::FunctionalMode::penalized(eps[k])).matrix();
      gaps[k].push_back(Eigen::JacobiSVD<Matrix>(pen - exact).singularValues()[0]);
    }
  }
  bool monotone = true;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const Mean m = mean_of(gaps[k]);
    c.series.push_back({eps[k], m.value, m.standard_error});
    if (k > 0 && !(m.value < c.series[k - 1].y)) monotone = false;
  }
  // value: gap at ε = 1e-3
  c.value = c.series[2].y;
  c.passed = monotone && c.value < c.tolerance;
  return c;
}

DiagnosticsReport stochastic_diagnostics(std::uint64_t seed, int samples, int steps) {
  DiagnosticsReport r;
  r.checks.push_back(local_time_exponent(seed, samples, steps));
  r.checks.push_back(holonomy_slope(seed, samples, std::max(8, steps / 2)));
  r.checks.push_back(confinement_monotone(seed, samples, std::max(8, steps / 2)));
  r.checks.push_back(epsilon_convergence(seed, std::max(10, samples / 10), 2 * steps));
  return r;
}

}  // namespace gbmc
