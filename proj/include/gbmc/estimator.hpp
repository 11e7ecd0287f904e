#pragma once

// Path-integral estimates of χ(X) and of the local Gauss-Bonnet integrands.
//
// A bridge loop pinned at x carries an importance weight W whose mean is the
// kernel of the discrete reflected chain, so W·Str(M V) has mean
// K₀(t; x, x) E_{t;x,x} Str(M_t V_t). Integrating over base points gives χ.

#include <cstdint>
#include <string>
#include <vector>

#include "gbmc/integrands.hpp"
#include "gbmc/stochastic.hpp"

namespace gbmc {

using exterior::Vector;

enum class KernelMode {
  Weighted,  // mean of W Str(M V): one unbiased estimate of K₀ E Str
  Analytic,  // closed-form K₀(t; x, x) times the self-normalised mean of Str(M V)
};

struct EstimatorOptions {
  int steps = 128;
  stochastic::FunctionalMode mode = stochastic::FunctionalMode::exact();
  KernelMode kernel = KernelMode::Weighted;
  bool stratified = true;
  double collar_factor = 3.0;  // collar width = collar_factor * sqrt(t)
  int workers = 0;  // 0: hardware concurrency
  double max_invalid_rate = 0.05;
};

struct PointEstimate {
  double weighted = 0.0;  // mean of W Str(M V)
  double weighted_stderr = 0.0;
  double kernel = 0.0;  // mean of W
  double kernel_stderr = 0.0;
  double supertrace = 0.0;  // weighted / kernel
  double supertrace_stderr = 0.0;
  double degree0 = 0.0;  // weighted / kernel of the scalar block of M V
  long accepted = 0;
  long invalid = 0;
};

// Str(M V) of one sampled loop together with its log weight.
struct LoopSample {
  double log_weight = 0.0;
  double supertrace = 0.0;
  double degree0 = 0.0;
  bool valid = false;
};

LoopSample sample_loop(const geometry::ManifoldModel& model, const Vector& x, double t, RngStream& rng,
                       const EstimatorOptions& options);

// Mean of Str(M_t V_t) over bridge loops pinned at x.
PointEstimate supertrace_expectation(const geometry::ManifoldModel& model, const Vector& x, double t, int bridges,
                                     RngStream& rng, const EstimatorOptions& options = {});

struct TimeWindow {
  double min = 0.0;
  double max = 0.0;
  bool contains(double t) const { return t >= min && t <= max; }
};

// Practical range of t: below `max` loops stay confined well inside the
// smallest geometric length; above `min` the step size and the kernel series
// remain resolved.
TimeWindow validity_window(const geometry::ManifoldModel& model);

struct Stratum {
  std::string name;
  long points = 0;
  double mean = 0.0;
  double standard_error = 0.0;
};

struct EstimateReport {
  std::string model;
  int dimension = 0;
  double t = 0.0;
  int steps = 0;
  long base_points = 0;
  int bridges_per_point = 0;
  double estimate = 0.0;
  double standard_error = 0.0;
  double interval_low = 0.0;
  double interval_high = 0.0;
  double reference = 0.0;
  double collar_width = 0.0;
  std::vector<Stratum> strata;
  double degree0_mean = 0.0;
  long invalid = 0;
  double invalid_rate = 0.0;
  TimeWindow window;
  bool in_window = true;
  std::string kernel;
  std::string functional;
  std::uint64_t seed = 0;
  double wall_time = 0.0;

  bool covers_reference(double floor = 0.0) const;
};

// Volume Monte Carlo of ∫ K₀ E Str(M V) dX. With stratification, even base
// points are uniform over {d(x, Z) >= w} and odd base points are uniform over
// the collar {d(x, Z) < w}; when the collar fills X every point is a collar point.
EstimateReport estimate_chi(const geometry::ManifoldModel& model, double t, long base_points, int bridges,
                            std::uint64_t seed, const EstimatorOptions& options = {});

struct LimitRow {
  double t = 0.0;
  double value = 0.0;
  double standard_error = 0.0;
  double analytic = 0.0;
  double ratio = 0.0;
};

struct LimitTable {
  std::string model;
  std::string kind;  // "interior" or "boundary"
  Vector point;
  std::vector<LimitRow> rows;
  double observed_order = 0.0;  // slope of log|value - analytic| against log t
};

// Interior x: value = mean W Str(M V) at x, compared with b_n Str DR^{n/2}.
// Boundary x (d(x, Z) = 0): value = ∫_0^w (W Str(M V) - bulk) ζ dy along the
// normal ray from x, compared with the boundary integrand at x.
LimitTable local_limit_check(const geometry::ManifoldModel& model, const Vector& x, const std::vector<double>& ts,
                             int samples, std::uint64_t seed, const ConstantTable& constants,
                             const EstimatorOptions& options = {});

// The spectral side of the index formula, kept as documentation: the estimate
// above is the path-integral form of χ; the McKean-Singer and Hodge
// descriptions it rests on are not computed.
std::string mckean_singer_note();

}  // namespace gbmc
