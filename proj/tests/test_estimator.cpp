#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gbmc/calibration.hpp"
#include "gbmc/errors.hpp"
#include "gbmc/estimator.hpp"
#include "test_support.hpp"

using namespace gbmc;
using geometry::model_catalog;

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

const ConstantTable& table() {
  static const ConstantTable t = calibrate_constants({2, 3, 4});
  return t;
}

}  // namespace

TEST(Calibration, ClassicalTwoDimensionalConstants) {
  // (1/2π)∫K dA + (1/2π)∮k_g ds with Str DR = -2K and Str_T DA = -k_g.
  ConstantTable t;
  calibrate_dimension(2, {model_catalog("ball", {{"dimension", 2}}), model_catalog("hemisphere", {{"dimension", 2}})}, t);
  EXPECT_NEAR(t.bulk.at(2), -1 / (4 * kPi), 1e-12);
  EXPECT_NEAR(t.boundary.at({2, 0, 1}), -1 / (2 * kPi), 1e-12);
  EXPECT_EQ(t.runs.at(0).rank, 2);
}

TEST(Calibration, OddRatioIsOneHalf) {
  EXPECT_NEAR(table().ratio.at(3), 0.5, 1e-10);
  EXPECT_NEAR(table().odd.at(3), -1 / (8 * kPi), 1e-12);
  for (const auto& run : table().runs) EXPECT_LT(run.max_residual, 1e-10) << run.dimension;
}

TEST(Calibration, OverdeterminedFamilyIsConsistent) {
  ConstantTable small, large;
  calibrate_dimension(3, {model_catalog("ball", {{"dimension", 3}})}, small);
  calibrate_dimension(3,
                      {model_catalog("ball", {{"dimension", 3}}),
                       model_catalog("product", {{"sphere_dimension", 1}, {"ball_dimension", 2}})},
                      large);
  EXPECT_NEAR(large.odd.at(3), small.odd.at(3), 1e-12);
  EXPECT_LT(large.runs.at(0).max_residual, 1e-12);
}

TEST(Calibration, DisjointFamilyReproducesTable) {
  ConstantTable caps;
  calibrate_dimension(2,
                      {model_catalog("cap", {{"dimension", 2}, {"aperture", 1.0}}),
                       model_catalog("cap", {{"dimension", 2}, {"aperture", 2.0}, {"radius", 1.7}})},
                      caps);
  EXPECT_NEAR(caps.bulk.at(2) / table().bulk.at(2), 1.0, 0.02);
  EXPECT_NEAR(caps.boundary.at({2, 0, 1}) / table().boundary.at({2, 0, 1}), 1.0, 0.02);
  ConstantTable four;
  calibrate_dimension(4,
                      {model_catalog("ball", {{"dimension", 4}, {"radius", 0.7}}),
                       model_catalog("cap", {{"dimension", 4}, {"aperture", 1.3}}),
                       model_catalog("product", {{"sphere_dimension", 2}, {"ball_dimension", 2}, {"ball_radius", 2.0}}),
                       model_catalog("sphere", {{"dimension", 4}, {"radius", 1.5}})},
                      four);
  EXPECT_NEAR(four.bulk.at(4) / table().bulk.at(4), 1.0, 0.02);
  for (int k = 0; k <= 1; ++k)
    EXPECT_NEAR(four.boundary.at({4, k, 3 - 2 * k}) / table().boundary.at({4, k, 3 - 2 * k}), 1.0, 0.02);
}

TEST(Calibration, RankDeficiencyNamesMissingUnknown) {
  ConstantTable t;
  try {
    calibrate_dimension(4, {model_catalog("ball", {{"dimension", 4}}), model_catalog("sphere", {{"dimension", 4}})}, t);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("b_{4,1,1}"), std::string::npos) << msg;
    EXPECT_NE(msg.find("S^2 x D^2"), std::string::npos) << msg;
  }
  EXPECT_THROW(calibrate_dimension(2, {model_catalog("ball", {{"dimension", 3}})}, t), ValidationError);
}

TEST(Calibration, PfaffianConstantIsUniversal) {
  std::mt19937_64 gen(5);
  for (int n : {2, 4}) {
    const double c = table().pfaffian.at(n);
    for (int i = 0; i < 20; ++i) {
      const auto r = test::random_curvature(n, gen);
      const double k = exterior::kronecker_contraction(r);
      EXPECT_NEAR(exterior::pfaffian_supertrace(r), c * k, 1e-10 * std::max(1.0, std::abs(k))) << n;
    }
  }
}

TEST(Integrands, DiskAndHemisphere) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  const auto g = geometry::analytic_gb_integrands(disk, table());
  EXPECT_EQ(g.bulk(vec({0.2, 0.3})), 0.0);
  // (1/2π)∮ k_g ds = 1 on the unit circle.
  EXPECT_NEAR(g.boundary(vec({1, 0})) * 2 * kPi, 1.0, 1e-12);
  const auto h = model_catalog("hemisphere", {{"dimension", 2}});
  const auto totals = geometry::integrate_gb(h, table());
  EXPECT_NEAR(totals.bulk, 1.0, 1e-12);
  EXPECT_NEAR(totals.boundary, 0.0, 1e-14);
}

TEST(Integrands, OddBallIsHalfSphereCharacteristic) {
  const auto ball = model_catalog("ball", {{"dimension", 3}});
  const auto totals = geometry::integrate_gb(ball, table());
  EXPECT_NEAR(totals.boundary, 0.5 * 2, 1e-12);
  EXPECT_EQ(totals.bulk, 0.0);
}

TEST(Integrands, TotalsMatchEulerCharacteristic) {
  for (int n : {2, 3, 4}) {
    for (const auto& m : calibration_family(n)) EXPECT_NEAR(geometry::integrate_gb(m, table()).total(), m.euler_characteristic(), 1e-10) << m.name() << n;
  }
  EXPECT_NEAR(geometry::integrate_gb(model_catalog("cap", {{"dimension", 4}, {"aperture", 0.7}}), table()).total(), 1.0, 1e-10);
  EXPECT_THROW(geometry::analytic_gb_integrands(model_catalog("ball", {{"dimension", 5}}), table()), ValidationError);
}

TEST(Integrands, TotallyGeodesicBoundaryKillsShapeTerms) {
  RngStream rng(6, 0);
  for (int n : {2, 4}) {
    const auto h = model_catalog("hemisphere", {{"dimension", double(n)}});
    for (int i = 0; i < 50; ++i) {
      for (const auto& [kl, v] : geometry::boundary_supertraces(h, h.sample_boundary(rng)))
        if (kl.second > 0) EXPECT_LT(std::abs(v), 1e-12);
    }
  }
  // n = 3: 𝒜 = 0, so R_Z is the restricted ambient curvature.
  const auto h3 = model_catalog("hemisphere", {{"dimension", 3}});
  const Vector z = h3.sample_boundary(rng);
  const auto b = geometry::boundary_geometry(h3, z, h3.adapted_frame(z).leftCols(2));
  EXPECT_LT(b.gauss_form.max_abs(), 1e-12);
}

TEST(Supertrace, FlatInteriorVanishes) {
  const auto disk = model_catalog("ball", {{"dimension", 2}, {"radius", 5.0}});
  RngStream rng(7, 0);
  EstimatorOptions o;
  o.steps = 32;
  const auto e = supertrace_expectation(disk, vec({0.1, 0.0}), 0.05, 500, rng, o);
  EXPECT_EQ(e.weighted, 0.0);
  EXPECT_EQ(e.degree0, 1.0);
  EXPECT_EQ(e.invalid, 0);
}

TEST(Supertrace, SphereBulkDensity) {
  // Closed S²: K₀ E Str = χ / area = 1/(2π) at every point and every t.
  const auto s2 = model_catalog("sphere", {{"dimension", 2}});
  RngStream rng(8, 0);
  EstimatorOptions o;
  o.steps = 32;
  const auto e = supertrace_expectation(s2, vec({0, 0, 1}), 0.05, 20000, rng, o);
  EXPECT_NEAR(e.weighted * 2 * kPi, 1.0, 0.03 + 3 * e.weighted_stderr * 2 * kPi);
  EXPECT_GT(e.degree0, 0.0);
}

TEST(Estimate, DiskCoversOne) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  EstimatorOptions o;
  o.steps = 64;
  const auto r = estimate_chi(disk, 0.05, 4000, 1, 9, o);
  EXPECT_TRUE(r.covers_reference()) << r.estimate << " ± " << r.standard_error;
  EXPECT_LT(r.standard_error, 0.08);
  EXPECT_EQ(r.strata.size(), 2u);
  EXPECT_NEAR(r.interval_high - r.interval_low, 2 * 1.96 * r.standard_error, 1e-12);
  EXPECT_GE(r.degree0_mean, 0.0);
}

TEST(Estimate, StratifiedAgreesWithPlain) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  EstimatorOptions o;
  o.steps = 64;
  const auto s = estimate_chi(disk, 0.05, 4000, 1, 10, o);
  o.stratified = false;
  const auto p = estimate_chi(disk, 0.05, 8000, 1, 11, o);
  EXPECT_EQ(p.strata.size(), 1u);
  EXPECT_LT(std::abs(s.estimate - p.estimate), 3 * std::hypot(s.standard_error, p.standard_error));
}

TEST(Estimate, DeterministicAcrossWorkers) {
  const auto cap = model_catalog("cap", {{"dimension", 2}, {"aperture", 1.2}});
  EstimatorOptions o;
  o.steps = 16;
  o.workers = 1;
  const auto a = estimate_chi(cap, 0.05, 300, 2, 12, o);
  o.workers = 3;
  const auto b = estimate_chi(cap, 0.05, 300, 2, 12, o);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(Estimate, AnalyticKernelMode) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  EstimatorOptions o;
  o.steps = 64;
  o.kernel = KernelMode::Analytic;
  const auto r = estimate_chi(disk, 0.05, 1000, 8, 13, o);
  EXPECT_EQ(r.kernel, "analytic");
  EXPECT_LT(std::abs(r.estimate - 1.0), std::max(0.1, 3 * r.standard_error));
}

TEST(Estimate, ValidatesInput) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  EXPECT_THROW(estimate_chi(disk, 0.0, 100, 1, 1), ValidationError);
  EXPECT_THROW(estimate_chi(disk, 0.05, 1, 1, 1), ValidationError);
  RngStream rng(1, 0);
  EXPECT_THROW(supertrace_expectation(disk, vec({2, 0}), 0.05, 10, rng), ValidationError);
}

TEST(Estimate, WindowFromGeometry) {
  const auto w = validity_window(model_catalog("ball", {{"dimension", 2}, {"radius", 3.0}}));
  EXPECT_NEAR(w.max, 1.0, 1e-12);
  EXPECT_NEAR(w.min, 9e-4, 1e-15);
  const auto r = estimate_chi(model_catalog("ball", {{"dimension", 2}}), 0.5, 4, 1, 2, EstimatorOptions{.steps = 8});
  EXPECT_FALSE(r.in_window);
}

TEST(LocalLimit, FlatInteriorIsZero) {
  const auto disk = model_catalog("ball", {{"dimension", 2}, {"radius", 5.0}});
  EstimatorOptions o;
  o.steps = 16;
  const auto tab = local_limit_check(disk, vec({0.1, 0.2}), {0.04, 0.02, 0.01}, 200, 14, table(), o);
  EXPECT_EQ(tab.kind, "interior");
  for (const auto& row : tab.rows) {
    EXPECT_EQ(row.value, 0.0);
    EXPECT_EQ(row.analytic, 0.0);
  }
}

TEST(LocalLimit, DiskBoundaryIntegrand) {
  const auto disk = model_catalog("ball", {{"dimension", 2}});
  EstimatorOptions o;
  o.steps = 64;
  const auto tab = local_limit_check(disk, vec({1, 0}), {0.02}, 8000, 15, table(), o);
  EXPECT_EQ(tab.kind, "boundary");
  const auto& row = tab.rows.at(0);
  EXPECT_NEAR(row.analytic, 1 / (2 * kPi), 1e-12);
  EXPECT_NEAR(row.ratio, 1.0, 0.15 + 3 * row.standard_error / row.analytic);
}

TEST(Notes, McKeanSinger) { EXPECT_NE(mckean_singer_note().find("McKean-Singer"), std::string::npos); }
