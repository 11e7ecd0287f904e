#pragma once

// Property suites run by the driver: the algebraic cancellation of low-degree
// supertraces and the stochastic diagnostics of the path simulation.

#include <cstdint>
#include <string>
#include <vector>

namespace gbmc {

struct CancellationCase {
  std::string variant;  // "interior": Λℝ^n, "boundary": Λℝ^{n-1}
  int n = 0;            // manifold dimension
  int pairs = 0;        // paired extensions (interior) or DR_T factors (boundary)
  int derivations = 0;  // derivations (interior) or DA_T factors (boundary)
  int instances = 0;
  int failures = 0;
  double max_abs = 0.0;
};

struct CancellationSuite {
  double tolerance = 0.0;
  std::vector<CancellationCase> cases;
  long total = 0;
  long failures = 0;
  double max_abs = 0.0;
  std::string summary() const { return std::to_string(failures) + " failures"; }
};

// For n = 2..6 and every i, j with 2i + j < n: Str of i random paired
// extensions times j random derivations on Λℝ^n. Boundary variant: Str over
// Λℝ^{n-1} of DR_T^k DA_T^l with 2k + l < n - 1, for random algebraic
// curvature tensors and symmetric shape operators.
CancellationSuite cancellation_suite(std::uint64_t seed, int instances = 100, double tolerance = 1e-10);

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
  double standard_error = 0.0;
};

struct DiagnosticCheck {
  std::string name;
  std::string description;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::vector<SeriesPoint> series;
};

struct DiagnosticsReport {
  std::vector<DiagnosticCheck> checks;
  bool passed() const;
};

// Mean boundary local time of reflected BM started on the unit circle, fitted
// as t^p over t in [1e-3, 1e-1]; passes when |p - 1/2| <= 0.05.
DiagnosticCheck local_time_exponent(std::uint64_t seed, int samples, int steps = 64);
// Weighted mean of |U_t - I| over bridge loops on the unit S²; passes when the
// log-log slope in t is within 0.15 of 1.
DiagnosticCheck holonomy_slope(std::uint64_t seed, int samples, int steps = 32);
// Fraction of bridge loops on D² staying in B_ρ(x), for increasing t; passes
// when it is non-increasing within two combined standard errors.
DiagnosticCheck confinement_monotone(std::uint64_t seed, int samples, int steps = 32);
// Mean operator-norm gap between the ε-penalised and exact-jump functionals
// on D² paths; passes when it decreases strictly and falls below 1e-2.
DiagnosticCheck epsilon_convergence(std::uint64_t seed, int samples, int steps = 128);

DiagnosticsReport stochastic_diagnostics(std::uint64_t seed, int samples, int steps = 64);

}  // namespace gbmc
