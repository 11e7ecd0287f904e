#pragma once

// Reflected Brownian motion, reflected Brownian bridges, stochastic parallel
// transport and the multiplicative functional.
//
// All processes are generated by ½Δ. A step from x proposes z = exp_x(w) and,
// when z leaves the manifold, mirrors it back across Z. Near Z the depth is a
// reflected Brownian motion with drift -tr(A)/2; given the depths at both ends
// of a step, whether the step touched Z and the local time it gained are drawn
// from the exact conditional law of that half-line process. Frames are
// parallel transported along each step and re-orthonormalised by modified
// Gram-Schmidt.
//
// Bridges pinned at an anchor a are sampled by importance sampling: each step
// targets a or one of its mirror images with probability proportional to the
// image parametrix, and the path carries the likelihood ratio against the
// free reflected chain, times the ratio of the drifted half-line density to the
// mirror density at each step. The last step evaluates the chain density at a, so the
// weight of a loop is an unbiased estimate of the discrete Neumann kernel
// K₀(t; a, a) and weighted averages give bridge expectations.

#include <optional>
#include <vector>

#include "gbmc/exterior.hpp"
#include "gbmc/geometry.hpp"
#include "gbmc/rng.hpp"

namespace gbmc::stochastic {

using exterior::GradedOperator;
using exterior::Matrix;
using exterior::Vector;
using geometry::ManifoldModel;

struct PathState {
  Vector x;
  Matrix frame;  // ambient x n, orthonormal tangent columns
  double time = 0.0;
  double local_time = 0.0;
  bool contact = false;  // last step touched Z
  double delta_lambda = 0.0;  // local time gained on the last step
  bool valid = true;  // false: the step left the region where the mirror is defined
};

PathState initial_state(const ManifoldModel& model, const Vector& x);

// Boundary data at a contact, in the coordinates of the transported frame.
struct ContactEvent {
  int step = 0;
  double time = 0.0;
  double delta_lambda = 0.0;
  Vector normal;
  Matrix shape;
};

struct PathSample {
  std::vector<double> times;
  std::vector<Vector> positions;  // filled when recording
  std::vector<Matrix> frames;     // filled when recording
  std::vector<double> local_time;  // filled when recording
  std::vector<ContactEvent> contacts;
  Vector start;
  Matrix start_frame;
  Vector end;
  Matrix end_frame;
  double total_time = 0.0;
  double final_local_time = 0.0;
  double max_displacement = 0.0;  // max_k d(x_0, x_k)
  double log_weight = 0.0;  // bridges: log of the importance weight
  bool valid = true;
};

PathState step_reflected_bm(const ManifoldModel& model, const PathState& state, double h, RngStream& rng);

PathSample simulate_reflected_bm(const ManifoldModel& model, const Vector& x0, double t, int steps, RngStream& rng,
                                 bool record = true);

// Gradient of log of the image parametrix Σ_j J_j G_τ(d(x, a_j)) over the anchor
// and its mirror images.
Vector bridge_drift(const ManifoldModel& model, const Vector& x, const Vector& anchor, double tau);

struct BridgeStep {
  PathState state;
  double log_weight = 0.0;  // log p/q for this step
};

// One guided step from time s towards the anchor at time t. When s + h reaches
// t the step lands on the anchor and contributes the chain density at it.
BridgeStep step_bridge(const ManifoldModel& model, const PathState& state, double s, double t, const Vector& anchor,
                       double h, RngStream& rng);

PathSample simulate_bridge(const ManifoldModel& model, const Vector& anchor, double t, int steps, RngStream& rng,
                           bool record = false);

struct TransportResult {
  Matrix matrix;  // U in the canonical frames at both ends
  GradedOperator transport;  // U acting on forms
  GradedOperator inverse;    // V = U^{-1}
};

// Transport between recorded steps k0 <= k1 (defaults: the whole path).
TransportResult evolve_transport(const ManifoldModel& model, const PathSample& path, int k0 = 0, int k1 = -1);

struct FunctionalMode {
  enum class Kind { ExactJump, Epsilon };
  Kind kind = Kind::ExactJump;
  double epsilon = 0.0;

  static FunctionalMode exact() { return {}; }
  static FunctionalMode penalized(double eps) { return {Kind::Epsilon, eps}; }
};

// M over the time window (t0, t1] of the path (defaults: the whole path).
// Operators are taken in the start frame; with parallel curvature DR† is
// constant along the path.
GradedOperator evolve_functional(const ManifoldModel& model, const PathSample& path,
                                 FunctionalMode mode = FunctionalMode::exact(), double t0 = 0.0,
                                 std::optional<double> t1 = std::nullopt);

// Precomputed exp(-½ DR s) for a fixed curvature operator.
class InteriorPropagator {
 public:
  explicit InteriorPropagator(const GradedOperator& dr);
  GradedOperator operator()(double s) const;
  // m * exp(-½ DR s) without forming the exponential.
  void apply_right(Matrix& m, double s) const;

 private:
  int n_;
  bool flat_ = false;  // DR = 0: the propagator is exactly the identity
  Matrix q_;
  Vector lambda_;
};

// Jump of the functional at a contact.
Matrix contact_jump(const ContactEvent& c, FunctionalMode mode);

// Weighted fraction of bridge loops pinned at x that stay inside B_ρ(x).
struct Fraction {
  double value = 0.0;
  double standard_error = 0.0;
};
Fraction confinement_fraction(const ManifoldModel& model, const Vector& x, double rho, double t, int samples,
                              RngStream& rng, int steps = 64);

}  // namespace gbmc::stochastic
