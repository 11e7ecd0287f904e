#include "gbmc/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gbmc/errors.hpp"

namespace gbmc::stochastic {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void reorthonormalize(const ManifoldModel& model, const Vector& x, Matrix& frame) {
  if (model.sphere_dimension() == 0) return;
  frame = model.tangent_projector(x) * frame;
  for (int j = 0; j < frame.cols(); ++j) {
    for (int i = 0; i < j; ++i) frame.col(j) -= frame.col(i).dot(frame.col(j)) * frame.col(i);
    frame.col(j).normalize();
  }
}

Vector standard_normal(int n, RngStream& rng) {
  Vector xi(n);
  for (int i = 0; i < n; ++i) xi[i] = rng.normal();
  return xi;
}

double log_sum_exp(const std::vector<double>& v) {
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

// Log density of N(mean, var I_n) at w.
double log_gaussian(const Vector& w, const Vector& mean, double var) {
  const int n = static_cast<int>(w.size());
  return -0.5 * n * (kLog2Pi + std::log(var)) - 0.5 * (w - mean).squaredNorm() / var;
}

// Moves the state along w (tangent at state.x) and mirrors it back if needed.
PathState advance(const ManifoldModel& model, const PathState& state, const Vector& w, double h) {
  PathState next;
  const Vector z = model.exp(state.x, w);
  const Matrix frame = model.transport(state.x, w, state.frame);
  geometry::Reflection r = model.reflect(z, frame);
  next.x = std::move(r.point);
  next.frame = std::move(r.frame);
  reorthonormalize(model, next.x, next.frame);
  next.time = state.time + h;
  next.contact = r.contact;
  next.delta_lambda = r.delta_lambda;
  next.local_time = state.local_time + r.delta_lambda;
  next.valid = r.valid;
  return next;
}

// Mills ratio Φ̄(z)/φ(z).
double mills_ratio(double z) {
  if (z < 5.0) return 0.5 * std::erfc(z / std::numbers::sqrt2) * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * z * z);
  double f = z;  // continued fraction z + 1/(z + 2/(z + ...)), evaluated backwards
  for (int k = 40; k >= 1; --k) f = z + k / f;
  return 1.0 / f;
}

// Standard normal conditioned on z >= a, a >= 0.
double normal_tail(double a, RngStream& rng) {
  if (a < 1.0) {
    for (;;) {
      const double z = rng.normal();
      if (z >= a) return z;
    }
  }
  for (;;) {
    const double z = a - std::log(rng.uniform()) / a;
    if (rng.uniform() <= std::exp(-0.5 * (z - a) * (z - a))) return z;
  }
}

// Near Z the depth d moves like a Brownian motion with drift μ = -tr(A)/2
// reflected at 0. Given the depths x, y at the ends of a step, the reflected
// process touches 0 with probability a / (a + 1 - e) where e = exp(-2xy/h)
// and a = 2e(1 - μ√h R), R the Mills ratio at (x + y + μh)/√h; given a touch,
// L has density ∝ (s + L) exp(-(s + L + μh)²/2h), s = x + y. The drift does not
// drop out because the free endpoint is y - L.
//
// The mirrored chain draws y from φ(y - x - μh) + φ(y + x + μh), which misses
// the drift's pull on the reflected part; `log_ratio` is the log of
// true/chain transition densities, which bridge weights absorb.
struct WallStep {
  double touch = 0.0;
  double log_ratio = 0.0;
};

WallStep wall_step(double x, double y, double mu, double h) {
  const double rh = std::sqrt(h);
  const double e = std::exp(-2.0 * x * y / h);
  const double a = 2.0 * e * (1.0 - mu * rh * mills_ratio((x + y + mu * h) / rh));
  WallStep out;
  out.touch = a / (a + 1.0 - e);
  out.log_ratio = std::log((1.0 - e + a) / (1.0 + std::exp(-2.0 * mu * y) * e));
  return out;
}

double wall_local_time(double s, double mu, double h, RngStream& rng) {
  const double rh = std::sqrt(h);
  // v = s + L + μh >= c; the sliver v in [s + μh, 0) when s < -μh is dropped.
  const double c = std::max(s + mu * h, 0.0);
  double v = 0.0;
  if (mu <= 0.0) {
    // (v - μh) e^{-v²/2h} = v e^{-v²/2h} + |μ|h e^{-v²/2h}: Rayleigh and Gaussian tails.
    const double gauss = -mu * rh * mills_ratio(c / rh);
    if (rng.uniform() * (1.0 + gauss) < 1.0) {
      v = std::sqrt(c * c - 2.0 * h * std::log(rng.uniform()));
    } else {
      v = rh * normal_tail(c / rh, rng);
    }
  } else {
    do {
      v = std::sqrt(c * c - 2.0 * h * std::log(rng.uniform()));
    } while (rng.uniform() * v > v - mu * h);
  }
  return std::max(v - mu * h - s, 0.0);
}

// Contact and local time of one step from the depths of its ends. Returns the
// log density ratio for importance-weighted paths.
double sample_local_time(const ManifoldModel& model, const Vector& from, const PathState& state, PathState& next,
                         double h, RngStream& rng) {
  next.contact = false;
  next.delta_lambda = 0.0;
  next.local_time = state.local_time;
  if (!next.valid || !model.has_boundary()) return 0.0;
  const double x = std::max(model.boundary_distance(from), 0.0);
  const double y = std::max(model.boundary_distance(next.x), 0.0);
  if (x * y > 20.0 * h) return 0.0;
  const double mu = -0.5 * model.shape_operator(from).trace();
  const WallStep w = wall_step(x, y, mu, h);
  if (w.touch > 1e-12 && rng.uniform() < w.touch) {
    next.contact = true;
    next.delta_lambda = wall_local_time(x + y, mu, h, rng);
    next.local_time = state.local_time + next.delta_lambda;
  }
  return w.log_ratio;
}

struct Targets {
  std::vector<Vector> points;
  std::vector<double> log_jacobians;
};

Targets bridge_targets(const ManifoldModel& model, const Vector& anchor) {
  Targets t;
  t.points.push_back(anchor);
  t.log_jacobians.push_back(0.0);
  for (const auto& img : model.mirror_images(anchor)) {
    t.points.push_back(img.point);
    t.log_jacobians.push_back(std::log(img.jacobian));
  }
  return t;
}

ContactEvent make_contact(const ManifoldModel& model, const PathState& s, int step) {
  ContactEvent c;
  c.step = step;
  c.time = s.time;
  c.delta_lambda = s.delta_lambda;
  c.normal = s.frame.transpose() * model.inward_normal(s.x);
  c.normal.normalize();
  c.shape = model.shape_operator(s.x, s.frame);
  // Exact annihilation of the normal in frame coordinates.
  const Matrix p = Matrix::Identity(c.normal.size(), c.normal.size()) - c.normal * c.normal.transpose();
  c.shape = p * c.shape * p;
  c.shape = 0.5 * (c.shape + c.shape.transpose());
  return c;
}

void record_state(PathSample& path, const PathState& s, bool record) {
  path.times.push_back(s.time);
  if (record) {
    path.positions.push_back(s.x);
    path.frames.push_back(s.frame);
    path.local_time.push_back(s.local_time);
  }
}

PathSample start_path(const PathState& s0, bool record) {
  PathSample path;
  path.start = s0.x;
  path.start_frame = s0.frame;
  record_state(path, s0, record);
  return path;
}

void finish_path(PathSample& path, const PathState& s) {
  path.end = s.x;
  path.end_frame = s.frame;
  path.total_time = s.time;
  path.final_local_time = s.local_time;
}

}  // namespace

PathState initial_state(const ManifoldModel& model, const Vector& x) {
  PathState s;
  s.x = x;
  s.frame = model.tangent_frame(x);
  return s;
}

PathState step_reflected_bm(const ManifoldModel& model, const PathState& state, double h, RngStream& rng) {
  if (!(h > 0.0)) throw ValidationError("step size must be positive");
  const Vector w = state.frame * (std::sqrt(h) * standard_normal(model.dimension(), rng));
  PathState next = advance(model, state, w, h);
  sample_local_time(model, state.x, state, next, h, rng);
  return next;
}

PathSample simulate_reflected_bm(const ManifoldModel& model, const Vector& x0, double t, int steps, RngStream& rng,
                                 bool record) {
  if (steps < 1) throw ValidationError("steps must be >= 1");
  const double h = t / steps;
  PathState s = initial_state(model, x0);
  PathSample path = start_path(s, record);
  for (int k = 1; k <= steps; ++k) {
    s = step_reflected_bm(model, s, h, rng);
    if (!s.valid) {
      path.valid = false;
      break;
    }
    if (s.contact) path.contacts.push_back(make_contact(model, s, k));
    path.max_displacement = std::max(path.max_displacement, model.distance(x0, s.x));
    record_state(path, s, record);
  }
  finish_path(path, s);
  return path;
}

Vector bridge_drift(const ManifoldModel& model, const Vector& x, const Vector& anchor, double tau) {
  const Targets targets = bridge_targets(model, anchor);
  std::vector<double> logw;
  std::vector<Vector> logs;
  for (std::size_t j = 0; j < targets.points.size(); ++j) {
    logs.push_back(model.log(x, targets.points[j]));
    logw.push_back(targets.log_jacobians[j] - 0.5 * logs.back().squaredNorm() / tau);
  }
  const double norm = log_sum_exp(logw);
  Vector drift = Vector::Zero(x.size());
  for (std::size_t j = 0; j < logs.size(); ++j) drift += std::exp(logw[j] - norm) * logs[j] / tau;
  return drift;
}

BridgeStep step_bridge(const ManifoldModel& model, const PathState& state, double s, double t, const Vector& anchor,
                       double h, RngStream& rng) {
  if (!(h > 0.0) || !(s < t)) throw ValidationError("bridge step needs h > 0 and s < t");
  const int n = model.dimension();
  const double tau = t - s;
  const Targets targets = bridge_targets(model, anchor);
  const std::size_t count = targets.points.size();
  std::vector<Vector> v(count);
  for (std::size_t j = 0; j < count; ++j) v[j] = state.frame.transpose() * model.log(state.x, targets.points[j]);

  BridgeStep out;
  if (tau <= h * (1.0 + 1e-9)) {
    // Last step: chain density at the anchor, summed over its preimages.
    std::vector<double> terms(count);
    for (std::size_t j = 0; j < count; ++j) {
      const Vector w = state.frame * v[j];
      terms[j] = targets.log_jacobians[j] + log_gaussian(v[j], Vector::Zero(n), tau) -
                 std::log(model.exp_jacobian(state.x, w));
    }
    const double total = log_sum_exp(terms);
    out.log_weight = total;
    std::size_t branch = 0;
    if (count > 1) {
      double u = rng.uniform();
      for (branch = 0; branch + 1 < count; ++branch) {
        u -= std::exp(terms[branch] - total);
        if (u <= 0.0) break;
      }
    }
    out.state = advance(model, state, state.frame * v[branch], tau);
    if (branch > 0 && !out.state.contact) out.state.valid = false;
    out.state.x = anchor;
    out.log_weight += sample_local_time(model, state.x, state, out.state, tau, rng);
    out.state.time = t;
    if (!std::isfinite(total)) out.state.valid = false;
    return out;
  }

  std::vector<double> logw(count);
  for (std::size_t j = 0; j < count; ++j) logw[j] = targets.log_jacobians[j] - 0.5 * v[j].squaredNorm() / tau;
  const double norm = log_sum_exp(logw);
  std::size_t pick = 0;
  if (count > 1) {
    double u = rng.uniform();
    for (pick = 0; pick + 1 < count; ++pick) {
      u -= std::exp(logw[pick] - norm);
      if (u <= 0.0) break;
    }
  }
  const double var = h * (tau - h) / tau;
  const Vector xi = standard_normal(n, rng);
  const Vector w = h / tau * v[pick] + std::sqrt(var) * xi;

  std::vector<double> logq(count);
  for (std::size_t j = 0; j < count; ++j) logq[j] = logw[j] - norm + log_gaussian(w, h / tau * v[j], var);
  out.log_weight = log_gaussian(w, Vector::Zero(n), h) - log_sum_exp(logq);
  out.state = advance(model, state, state.frame * w, h);
  out.log_weight += sample_local_time(model, state.x, state, out.state, h, rng);
  return out;
}

PathSample simulate_bridge(const ManifoldModel& model, const Vector& anchor, double t, int steps, RngStream& rng,
                           bool record) {
  if (steps < 1) throw ValidationError("steps must be >= 1");
  const double h = t / steps;
  PathState s = initial_state(model, anchor);
  PathSample path = start_path(s, record);
  for (int k = 1; k <= steps; ++k) {
    const double now = (k - 1) * h;
    BridgeStep step = step_bridge(model, s, now, t, anchor, k == steps ? t - now : h, rng);
    s = std::move(step.state);
    path.log_weight += step.log_weight;
    if (!s.valid) {
      path.valid = false;
      break;
    }
    if (s.contact) path.contacts.push_back(make_contact(model, s, k));
    path.max_displacement = std::max(path.max_displacement, model.distance(anchor, s.x));
    record_state(path, s, record);
  }
  finish_path(path, s);
  return path;
}

TransportResult evolve_transport(const ManifoldModel& model, const PathSample& path, int k0, int k1) {
  const int last = static_cast<int>(path.times.size()) - 1;
  if (k1 < 0) k1 = last;
  if (k0 < 0 || k0 > k1 || k1 > last) throw ValidationError("evolve_transport: step range out of bounds");
  const bool whole = k0 == 0 && k1 == last;
  if (!whole && path.frames.size() != path.times.size())
    throw ValidationError("evolve_transport: partial ranges need a recorded path");
  const Vector& x0 = k0 == 0 ? path.start : path.positions[k0];
  const Vector& x1 = k1 == last ? path.end : path.positions[k1];
  const Matrix& u0 = k0 == 0 ? path.start_frame : path.frames[k0];
  const Matrix& u1 = k1 == last ? path.end_frame : path.frames[k1];
  // Drift from orthonormality beyond roundoff means the frame integration failed.
  const int n = model.dimension();
  if ((u1.transpose() * u1 - Matrix::Identity(n, n)).norm() > 1e-6 ||
      (model.tangent_projector(x1) * u1 - u1).norm() > 1e-6)
    throw NumericalError("transport lost orthogonality");
  Matrix o = model.tangent_frame(x1).transpose() * u1 * u0.transpose() * model.tangent_frame(x0);
  GradedOperator forward = exterior::lift(o);
  GradedOperator inverse = exterior::lift(o.transpose());
  return {std::move(o), std::move(forward), std::move(inverse)};
}

InteriorPropagator::InteriorPropagator(const GradedOperator& dr) : n_(dr.dimension()) {
  flat_ = dr.matrix().isZero(0.0);
  if (flat_) return;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (dr.matrix() + dr.matrix().transpose()));
  q_ = es.eigenvectors();
  lambda_ = es.eigenvalues();
}

GradedOperator InteriorPropagator::operator()(double s) const {
  if (flat_) return GradedOperator(n_, Matrix::Identity(exterior::algebra_size(n_), exterior::algebra_size(n_)));
  const Vector d = (-0.5 * s * lambda_.array()).exp().matrix();
  return GradedOperator(n_, q_ * d.asDiagonal() * q_.transpose());
}

void InteriorPropagator::apply_right(Matrix& m, double s) const {
  if (s == 0.0 || flat_) return;
  const Vector d = (-0.5 * s * lambda_.array()).exp().matrix();
  m = ((m * q_) * d.asDiagonal()) * q_.transpose();
}

Matrix contact_jump(const ContactEvent& c, FunctionalMode mode) {
  if (mode.kind == FunctionalMode::Kind::Epsilon) {
    const GradedOperator gen = exterior::penalized_shape_operator(c.shape, c.normal, mode.epsilon);
    return exterior::symmetric_exp(gen.matrix(), -c.delta_lambda);
  }
  // exp(-DA s) is the algebra map induced by exp(-A s).
  const Matrix e = exterior::lift(exterior::symmetric_exp(c.shape, -c.delta_lambda)).matrix();
  return e * exterior::boundary_projections(c.normal).tangential.matrix();
}

GradedOperator evolve_functional(const ManifoldModel& model, const PathSample& path, FunctionalMode mode, double t0,
                                 std::optional<double> t1) {
  if (mode.kind == FunctionalMode::Kind::Epsilon && !(mode.epsilon > 0.0))
    throw ValidationError("epsilon mode needs epsilon > 0");
  const double end = t1.value_or(path.total_time);
  const GradedOperator dr = exterior::curvature_to_operator(model.curvature(path.start, path.start_frame));
  const InteriorPropagator propagate(dr);
  const int n = model.dimension();
  Matrix m = Matrix::Identity(exterior::algebra_size(n), exterior::algebra_size(n));
  double last = t0;
  for (const ContactEvent& c : path.contacts) {
    if (c.time <= t0 || c.time > end) continue;
    propagate.apply_right(m, c.time - last);
    m = m * contact_jump(c, mode);
    last = c.time;
  }
  propagate.apply_right(m, end - last);
  return GradedOperator(n, std::move(m));
}

Fraction confinement_fraction(const ManifoldModel& model, const Vector& x, double rho, double t, int samples,
                              RngStream& rng, int steps) {
  if (!(rho > 0.0)) throw ValidationError("confinement radius must be positive");
  std::vector<double> w;
  std::vector<double> f;
  for (int i = 0; i < samples; ++i) {
    const PathSample p = simulate_bridge(model, x, t, steps, rng);
    if (!p.valid) continue;
    w.push_back(p.log_weight);
    f.push_back(p.max_displacement < rho ? 1.0 : 0.0);
  }
  if (w.empty()) throw NumericalError("confinement_fraction: no valid bridge");
  const double top = *std::max_element(w.begin(), w.end());
  double sw = 0.0, swf = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(w[i] - top);
    sw += w[i];
    swf += w[i] * f[i];
  }
  Fraction out;
  out.value = swf / sw;
  double var = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) var += w[i] * w[i] * (f[i] - out.value) * (f[i] - out.value);
  out.standard_error = std::sqrt(var) / sw;
  return out;
}

}  // namespace gbmc::stochastic
