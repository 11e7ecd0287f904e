#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gbmc/errors.hpp"
#include "gbmc/heat_kernel.hpp"
#include "gbmc/stochastic.hpp"

using namespace gbmc;
using namespace gbmc::stochastic;
using exterior::GradedOperator;
using geometry::model_catalog;

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

struct Mean {
  double value = 0.0;
  double se = 0.0;
};

Mean mean_of(const std::vector<double>& v) {
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(v.size());
  Mean m;
  m.value = s / n;
  m.se = std::sqrt(std::max(0.0, s2 / n - m.value * m.value) / (n - 1));
  return m;
}

// Self-normalized weighted mean of f over bridge samples.
double weighted_mean(const std::vector<double>& logw, const std::vector<double>& f) {
  const double top = *std::max_element(logw.begin(), logw.end());
  double sw = 0.0, swf = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = std::exp(logw[i] - top);
    sw += w;
    swf += w * f[i];
  }
  return swf / sw;
}

double operator_norm(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()[0]; }

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST(ReflectedBm, FlatScaling) {
  const auto disk = model_catalog("ball", {{"dimension", 2}, {"radius", 10.0}});
  RngStream rng(1, 0);
  const double t = 0.05;
  std::vector<double> d2;
  for (int i = 0; i < 4000; ++i) {
    const auto p = simulate_reflected_bm(disk, vec({0, 0}), t, 16, rng, false);
    d2.push_back((p.end - p.start).squaredNorm());
  }
  const Mean m = mean_of(d2);
  EXPECT_NEAR(m.value, 2 * t, 3 * m.se);
}

TEST(ReflectedBm, LocalTimeOnHalfLine) {
  // On the half-line the per-step local-time law is exact: E λ_t = sqrt(2t/π) at any step count.
  const auto seg = model_catalog("ball", {{"dimension", 1}, {"radius", 5.0}});
  RngStream rng(2, 0);
  const double t = 0.04;
  std::vector<double> lam;
  for (int i = 0; i < 20000; ++i) lam.push_back(simulate_reflected_bm(seg, vec({5.0}), t, 8, rng, false).final_local_time);
  const Mean m = mean_of(lam);
  EXPECT_NEAR(m.value, std::sqrt(2 * t / kPi), 3 * m.se);
}

TEST(ReflectedBm, LocalTimeExponent) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  RngStream rng(3, 0);
  std::vector<double> ts = {1e-3, 1e-2, 1e-1}, means;
  for (double t : ts) {
    std::vector<double> lam;
    for (int i = 0; i < 3000; ++i) lam.push_back(simulate_reflected_bm(disk, vec({1, 0}), t, 64, rng, false).final_local_time);
    means.push_back(mean_of(lam).value);
  }
  EXPECT_NEAR(slope(ts, means), 0.5, 0.05);
}

TEST(ReflectedBm, LocalTimeInvariants) {
  const auto cap = model_catalog("cap", {{"dimension", 2}, {"aperture", 1.2}});
  RngStream rng(4, 0);
  for (int i = 0; i < 50; ++i) {
    const auto p = simulate_reflected_bm(cap, cap.sample_uniform(rng), 0.2, 64, rng, true);
    ASSERT_TRUE(p.valid);
    std::size_t c = 0;
    for (std::size_t k = 1; k < p.local_time.size(); ++k) {
      const double d = p.local_time[k] - p.local_time[k - 1];
      EXPECT_GE(d, 0.0);
      const bool hit = c < p.contacts.size() && p.contacts[c].step == static_cast<int>(k);
      if (hit) ++c;
      if (d > 0.0) EXPECT_TRUE(hit);
      EXPECT_GE(cap.boundary_distance(p.positions[k]), -1e-12);
    }
  }
}

TEST(ReflectedBm, RarelyTouchesDistantBoundary) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  RngStream rng(5, 0);
  const double d = 0.5;
  int touched = 0;
  const int paths = 5000;
  for (int i = 0; i < paths; ++i)
    if (!simulate_reflected_bm(disk, vec({0.5, 0}), d * d / 100, 16, rng, false).contacts.empty()) ++touched;
  EXPECT_LT(touched, paths / 100);
}

TEST(Bridge, EuclideanDrift) {
  const auto disk = model_catalog("ball", {{"dimension", 2}, {"radius", 50.0}});
  const Vector x = vec({0.3, -0.2});
  const Vector a = vec({-0.1, 0.4});
  const double tau = 0.2;
  EXPECT_LT((bridge_drift(disk, x, a, tau) - (a - x) / tau).norm(), 1e-12);
}

TEST(Bridge, WeightIsExactKernelOnHalfLine) {
  const double r = 5.0, t = 0.01;
  const auto seg = model_catalog("ball", {{"dimension", 1}, {"radius", r}});
  const Vector a = vec({r - 0.05});
  const double k0 = heat::interval_kernel(t, r, a[0], a[0]);
  RngStream rng(6, 0);
  for (int i = 0; i < 200; ++i) {
    const auto p = simulate_bridge(seg, a, t, 16, rng, true);
    ASSERT_TRUE(p.valid);
    EXPECT_NEAR(std::exp(p.log_weight) / k0, 1.0, 1e-10);
    EXPECT_EQ(p.end, a);
  }
}

TEST(Bridge, WeightEstimatesDiskKernel) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  const Vector a = vec({0.95, 0.0});
  const double t = 0.02;
  RngStream rng(7, 0);
  std::vector<double> w;
  for (int i = 0; i < 4000; ++i) {
    const auto p = simulate_bridge(disk, a, t, 32, rng);
    w.push_back(p.valid ? std::exp(p.log_weight) : 0.0);
  }
  const Mean m = mean_of(w);
  const double exact = heat::neumann_heat_kernel(disk, t, a, a).value;
  // The chain kernel differs from K₀ by the O(√h) scheme bias.
  EXPECT_NEAR(m.value / exact, 1.0, 0.03 + 3 * m.se / exact);
}

TEST(Bridge, DisplacementBound) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  const Vector a = vec({0.9, 0.1});
  const double t = 0.1;
  const int steps = 32;
  RngStream rng(8, 0);
  std::vector<double> logw;
  std::vector<std::vector<double>> d2(steps + 1);
  for (int i = 0; i < 2000; ++i) {
    const auto p = simulate_bridge(disk, a, t, steps, rng, true);
    if (!p.valid) continue;
    logw.push_back(p.log_weight);
    for (int k = 1; k <= steps; ++k) d2[k].push_back(std::pow(disk.distance(a, p.positions[k]), 2));
  }
  double cmax = 0.0;
  for (int k = 1; k < steps; ++k) cmax = std::max(cmax, weighted_mean(logw, d2[k]) / (k * t / steps));
  EXPECT_LT(cmax, 2.5);  // a free bridge gives n (t - s)/t <= 2
  EXPECT_NEAR(weighted_mean(logw, d2[steps]), 0.0, 1e-20);
}

TEST(Transport, FlatIsIdentity) {
  const auto disk = model_catalog("ball", {{"dimension", 3}});
  RngStream rng(9, 0);
  const auto p = simulate_reflected_bm(disk, vec({0.9, 0, 0}), 0.3, 64, rng);
  EXPECT_EQ(evolve_transport(disk, p).matrix, Matrix::Identity(3, 3));
}

TEST(Transport, InverseAndOrthogonality) {
  const auto cap = model_catalog("cap", {{"dimension", 3}, {"aperture", 1.0}});
  RngStream rng(10, 0);
  for (int i = 0; i < 20; ++i) {
    const auto p = simulate_bridge(cap, cap.sample_uniform(rng), 0.3, 32, rng);
    if (!p.valid) continue;
    const auto u = evolve_transport(cap, p);
    EXPECT_LT((u.matrix.transpose() * u.matrix - Matrix::Identity(3, 3)).norm(), 1e-8);
    const Matrix vu = (u.inverse * u.transport).matrix();
    EXPECT_LT((vu - Matrix::Identity(8, 8)).norm(), 1e-8);
  }
}

TEST(Transport, HolonomyScalesLinearly) {
  const auto sphere = model_catalog("sphere", {{"dimension", 2}});
  const Vector x = vec({0, 0, 1});
  RngStream rng(11, 0);
  std::vector<double> ts = {1e-3, 1e-2, 1e-1}, means;
  for (double t : ts) {
    std::vector<double> logw, f;
    for (int i = 0; i < 2000; ++i) {
      const auto p = simulate_bridge(sphere, x, t, 32, rng);
      logw.push_back(p.log_weight);
      f.push_back((evolve_transport(sphere, p).matrix - Matrix::Identity(2, 2)).norm());
    }
    means.push_back(weighted_mean(logw, f));
  }
  EXPECT_NEAR(slope(ts, means), 1.0, 0.15);
}

TEST(Transport, Multiplicative) {
  const auto prod = model_catalog("product", {{"sphere_dimension", 2}, {"ball_dimension", 1}});
  RngStream rng(12, 0);
  const auto p = simulate_reflected_bm(prod, prod.sample_uniform(rng), 0.4, 40, rng);
  const Matrix whole = evolve_transport(prod, p).matrix;
  const Matrix split = evolve_transport(prod, p, 17, 40).matrix * evolve_transport(prod, p, 0, 17).matrix;
  EXPECT_LT((whole - split).norm(), 1e-8);
}

TEST(Functional, FlatInteriorIsIdentity) {
  const auto disk = model_catalog("ball", {{"dimension", 2}, {"radius", 10.0}});
  RngStream rng(13, 0);
  const auto p = simulate_reflected_bm(disk, vec({0, 0}), 0.1, 16, rng);
  ASSERT_TRUE(p.contacts.empty());
  EXPECT_EQ(evolve_functional(disk, p).matrix(), Matrix::Identity(4, 4));
}

TEST(Functional, SingleContactOnDisk) {
  ContactEvent c;
  c.delta_lambda = 0.3;
  c.normal = vec({0, 1});
  c.shape = Matrix::Zero(2, 2);
  c.shape(0, 0) = 1.0;  // unit circle, tangent e1
  // Basis 1, e1, e2, e12: DA = diag(0, 1, 0, 1), Π_tan = diag(1, 1, 0, 0).
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 0) = 1.0;
  expected(1, 1) = std::exp(-0.3);
  EXPECT_LT((contact_jump(c, FunctionalMode::exact()) - expected).norm(), 1e-14);
}

TEST(Functional, AnnihilatesNormalAfterContacts) {
  const auto cap = model_catalog("cap", {{"dimension", 3}, {"aperture", 1.1}});
  RngStream rng(14, 0);
  int checked = 0;
  for (int i = 0; i < 10; ++i) {
    const auto p = simulate_reflected_bm(cap, cap.sample_boundary(rng), 0.1, 32, rng);
    for (const auto& c : p.contacts) {
      const GradedOperator m = evolve_functional(cap, p, FunctionalMode::exact(), 0.0, c.time);
      const auto proj = exterior::boundary_projections(c.normal);
      EXPECT_LT((m * proj.normal).matrix().norm(), 1e-10);
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(Functional, Multiplicative) {
  const auto cap = model_catalog("cap", {{"dimension", 2}, {"aperture", 1.0}});
  RngStream rng(15, 0);
  const auto p = simulate_reflected_bm(cap, cap.sample_boundary(rng), 0.2, 40, rng);
  for (const auto mode : {FunctionalMode::exact(), FunctionalMode::penalized(0.05)}) {
    const double s = p.times[23];
    const Matrix whole = evolve_functional(cap, p, mode).matrix();
    const Matrix split = (evolve_functional(cap, p, mode, 0.0, s) * evolve_functional(cap, p, mode, s)).matrix();
    EXPECT_LT((whole - split).norm(), 1e-8);
  }
}

TEST(Functional, EpsilonModeConverges) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  RngStream rng(16, 0);
  std::vector<double> eps = {1e-1, 1e-2, 1e-3}, gaps(3, 0.0);
  const int paths = 200;
  for (int i = 0; i < paths; ++i) {
    const auto p = simulate_reflected_bm(disk, vec({1, 0}), 0.1, 128, rng);
    const Matrix exact = evolve_functional(disk, p).matrix();
    for (int j = 0; j < 3; ++j)
      gaps[j] += operator_norm(evolve_functional(disk, p, FunctionalMode::penalized(eps[j])).matrix() - exact) / paths;
  }
  EXPECT_GT(gaps[0], gaps[1]);
  EXPECT_GT(gaps[1], gaps[2]);
}

TEST(Functional, FlatDegreeZeroBlockIsOne) {
  const auto disk = model_catalog("ball", {{"dimension", 3}});
  RngStream rng(17, 0);
  for (int i = 0; i < 20; ++i) {
    const auto p = simulate_bridge(disk, vec({0.97, 0, 0}), 0.05, 32, rng);
    const Matrix mv = (evolve_functional(disk, p) * evolve_transport(disk, p).inverse).matrix();
    EXPECT_EQ(mv(0, 0), 1.0);
  }
}

TEST(Paths, BitReproducible) {
  const auto prod = model_catalog("product", {{"sphere_dimension", 2}, {"ball_dimension", 2}});
  RngStream a(18, 3);
  const Vector x = prod.sample_uniform(a);
  RngStream b = a;
  const auto p = simulate_bridge(prod, x, 0.1, 24, a, true);
  const auto q = simulate_bridge(prod, x, 0.1, 24, b, true);
  ASSERT_EQ(p.positions.size(), q.positions.size());
  for (std::size_t k = 0; k < p.positions.size(); ++k) {
    EXPECT_EQ(p.positions[k], q.positions[k]);
    EXPECT_EQ(p.frames[k], q.frames[k]);
  }
  EXPECT_EQ(p.log_weight, q.log_weight);
}

TEST(Paths, StepRejectsBadInput) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  RngStream rng(19, 0);
  EXPECT_THROW(step_reflected_bm(disk, initial_state(disk, vec({0, 0})), 0.0, rng), ValidationError);
  EXPECT_THROW(simulate_bridge(disk, vec({0, 0}), 0.1, 0, rng), ValidationError);
}

TEST(Confinement, ShortTimesStayLocal) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  const Vector x = vec({0.2, 0.1});
  RngStream rng(20, 0);
  const double rho = 0.3;
  EXPECT_GT(confinement_fraction(disk, x, rho, rho * rho / 100, 2000, rng, 32).value, 0.999);
  std::vector<Fraction> by_t;
  for (double t : {0.08, 0.04, 0.02}) by_t.push_back(confinement_fraction(disk, x, rho, t, 2000, rng, 32));
  for (int i = 0; i + 1 < 3; ++i)
    EXPECT_GE(by_t[i + 1].value + 2 * std::hypot(by_t[i].standard_error, by_t[i + 1].standard_error), by_t[i].value);
  // Nested events on identical noise: larger radius never loses a path.
  RngStream r1(21, 0), r2(21, 0);
  EXPECT_GE(confinement_fraction(disk, x, 0.4, 0.05, 1000, r2, 32).value,
            confinement_fraction(disk, x, 0.3, 0.05, 1000, r1, 32).value);
}
