#include "gbmc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "gbmc/errors.hpp"

namespace gbmc::geometry {

namespace {

constexpr double kPi = std::numbers::pi;

// Area of the unit k-sphere.
double unit_sphere_area(int k) {
  if (k < 0) return 0.0;
  return 2.0 * std::pow(kPi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double unit_ball_volume(int m) { return std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m + 1.0); }

// ∫_0^alpha sin^k
double sine_power_integral(int k, double alpha) {
  if (k == 0) return alpha;
  if (k == 1) return 1.0 - std::cos(alpha);
  return -std::pow(std::sin(alpha), k - 1) * std::cos(alpha) / k +
         (k - 1.0) / k * sine_power_integral(k - 2, alpha);
}

// Columns k.. of a full orthonormal basis whose first k columns span q.
Matrix orthogonal_complement(const Matrix& q) {
  const int dim = static_cast<int>(q.rows());
  const int k = static_cast<int>(q.cols());
  Eigen::HouseholderQR<Matrix> qr(q);
  const Matrix full = qr.householderQ() * Matrix::Identity(dim, dim);
  return full.rightCols(dim - k);
}

Vector unit(const Vector& v) { return v / v.norm(); }

Vector normal_vector(int dim, RngStream& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

ManifoldModel::ManifoldModel(std::string name, int sphere_dim, double sphere_radius, int ball_dim,
                             double ball_radius, double aperture, int euler_characteristic)
    : name_(std::move(name)),
      l_(sphere_dim),
      rho_(sphere_radius),
      m_(ball_dim),
      r_(ball_radius),
      alpha_(aperture),
      chi_(euler_characteristic) {
  const int n = l_ + m_;
  if (l_ < 0 || m_ < 0 || n < 1 || n > exterior::kMaxDimension)
    throw ValidationError("model dimension must lie in [1, 8]");
  if (l_ > 0 && !(rho_ > 0.0)) throw ValidationError("sphere radius must be positive");
  if (m_ > 0 && !(r_ > 0.0)) throw ValidationError("ball radius must be positive");
  if (!(alpha_ > 0.0 && alpha_ <= kPi)) throw ValidationError("aperture must lie in (0, pi)");
  if (m_ > 0 && alpha_ < kPi) throw ValidationError("a model carries boundary on one factor only");
  if (cap_boundary() && l_ < 2) throw ValidationError("caps need sphere dimension >= 2");
}

double ManifoldModel::volume() const {
  double v = 1.0;
  if (l_ > 0) {
    if (cap_boundary())
      v *= unit_sphere_area(l_ - 1) * std::pow(rho_, l_) * sine_power_integral(l_ - 1, alpha_);
    else
      v *= unit_sphere_area(l_) * std::pow(rho_, l_);
  }
  if (m_ > 0) v *= unit_ball_volume(m_) * std::pow(r_, m_);
  return v;
}

double ManifoldModel::boundary_volume() const {
  if (ball_boundary()) {
    const double sphere = l_ > 0 ? unit_sphere_area(l_) * std::pow(rho_, l_) : 1.0;
    return sphere * unit_sphere_area(m_ - 1) * std::pow(r_, m_ - 1);
  }
  if (cap_boundary()) return unit_sphere_area(l_ - 1) * std::pow(rho_ * std::sin(alpha_), l_ - 1);
  return 0.0;
}

// Hyperspherical coordinates about the pole e_0:
//   c_i = sin θ_1 ... sin θ_i cos θ_{i+1} (i < l),  c_l = sin θ_1 ... sin θ_l.
Vector ManifoldModel::chart(const Vector& x) const {
  Vector q(dimension());
  if (l_ > 0) {
    const Vector c = x.head(sphere_size()) / rho_;
    for (int k = 0; k < l_ - 1; ++k) q[k] = std::atan2(c.tail(l_ - k).norm(), c[k]);
    double last = std::atan2(c[l_], c[l_ - 1]);
    if (last < 0.0) last += 2.0 * kPi;
    q[l_ - 1] = last;
  }
  if (m_ > 0) q.tail(m_) = x.tail(m_);
  return q;
}

Vector ManifoldModel::chart_inverse(const Vector& q) const {
  Vector x(ambient_dimension());
  if (l_ > 0) {
    double prefix = 1.0;
    for (int i = 0; i < l_; ++i) {
      x[i] = rho_ * prefix * std::cos(q[i]);
      prefix *= std::sin(q[i]);
    }
    x[l_] = rho_ * prefix;
  }
  if (m_ > 0) x.tail(m_) = q.tail(m_);
  return x;
}

Matrix ManifoldModel::chart_jacobian(const Vector& q) const {
  Matrix jac = Matrix::Zero(ambient_dimension(), dimension());
  for (int k = 0; k < l_; ++k) {
    // d/dθ_{k+1}: replace the θ_{k+1} factor of every c_i by its derivative.
    for (int i = k; i <= l_; ++i) {
      double value = rho_;
      for (int j = 0; j < i; ++j) value *= (j == k) ? std::cos(q[j]) : std::sin(q[j]);
      if (i < l_) value *= (i == k) ? -std::sin(q[i]) : std::cos(q[i]);
      jac(i, k) = value;
    }
  }
  for (int i = 0; i < m_; ++i) jac(sphere_size() + i, l_ + i) = 1.0;
  return jac;
}

Matrix ManifoldModel::metric(const Vector& q) const {
  const Matrix jac = chart_jacobian(q);
  return jac.transpose() * jac;
}

// The sphere metric is diagonal with g_kk = ρ² Π_{j<k} sin²θ_j, so the only
// nonzero symbols are Γ^k_{ki} = cot θ_i (i < k) and
// Γ^k_{ii} = -sin θ_k cos θ_k Π_{k<j<i} sin²θ_j (k < i).
std::vector<Matrix> ManifoldModel::christoffel(const Vector& q) const {
  const int n = dimension();
  std::vector<Matrix> gamma(n, Matrix::Zero(n, n));
  for (int k = 0; k < l_; ++k) {
    for (int i = 0; i < k; ++i) {
      const double c = std::cos(q[i]) / std::sin(q[i]);
      gamma[k](k, i) = c;
      gamma[k](i, k) = c;
    }
    for (int i = k + 1; i < l_; ++i) {
      double v = -std::sin(q[k]) * std::cos(q[k]);
      for (int j = k + 1; j < i; ++j) v *= std::sin(q[j]) * std::sin(q[j]);
      gamma[k](i, i) = v;
    }
  }
  return gamma;
}

double ManifoldModel::chart_singularity_distance(const Vector& q) const {
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < l_; ++k) d = std::min({d, std::abs(q[k]), std::abs(kPi - q[k])});
  return d;
}

double ManifoldModel::polar_angle(const Vector& x) const {
  const Vector s = x.head(sphere_size());
  return std::atan2(s.tail(l_).norm(), s[0]);
}

bool ManifoldModel::contains(const Vector& x, double tol) const {
  if (x.size() != ambient_dimension()) return false;
  if (l_ > 0 && std::abs(x.head(sphere_size()).norm() - rho_) > tol * std::max(1.0, rho_)) return false;
  return boundary_distance(x) >= -tol;
}

Matrix ManifoldModel::tangent_projector(const Vector& x) const {
  Matrix p = Matrix::Identity(ambient_dimension(), ambient_dimension());
  if (l_ > 0) {
    const Vector s = x.head(sphere_size()) / rho_;
    p.topLeftCorner(sphere_size(), sphere_size()) -= s * s.transpose();
  }
  return p;
}

Matrix ManifoldModel::tangent_frame(const Vector& x) const {
  Matrix f = Matrix::Zero(ambient_dimension(), dimension());
  if (l_ > 0) f.topLeftCorner(sphere_size(), l_) = orthogonal_complement(unit(x.head(sphere_size())));
  if (m_ > 0) f.bottomRightCorner(m_, m_) = Matrix::Identity(m_, m_);
  return f;
}

Matrix ManifoldModel::adapted_frame(const Vector& x) const {
  if (!has_boundary()) return tangent_frame(x);
  Matrix f = Matrix::Zero(ambient_dimension(), dimension());
  const Vector nu = inward_normal(x);
  if (ball_boundary()) {
    if (l_ > 0) f.topLeftCorner(sphere_size(), l_) = orthogonal_complement(unit(x.head(sphere_size())));
    const Vector nb = nu.tail(m_);
    f.block(sphere_size(), l_, m_, m_ - 1) = orthogonal_complement(nb);
  } else {
    Matrix known(sphere_size(), 2);
    known.col(0) = unit(x.head(sphere_size()));
    known.col(1) = nu.head(sphere_size());
    f.topLeftCorner(sphere_size(), l_ - 1) = orthogonal_complement(known);
  }
  f.col(dimension() - 1) = nu;
  return f;
}

Vector ManifoldModel::exp(const Vector& x, const Vector& v) const {
  Vector y = x + v;
  if (l_ > 0) {
    const Vector s = x.head(sphere_size());
    const Vector vs = v.head(sphere_size());
    const double len = vs.norm();
    if (len > 0.0) {
      const double phi = len / rho_;
      Vector ys = std::cos(phi) * s + (rho_ * std::sin(phi) / len) * vs;
      y.head(sphere_size()) = ys * (rho_ / ys.norm());
    } else {
      y.head(sphere_size()) = s;
    }
  }
  return y;
}

Vector ManifoldModel::log(const Vector& x, const Vector& y) const {
  Vector v = y - x;
  if (l_ > 0) {
    const Vector xs = x.head(sphere_size()) / rho_;
    const Vector ys = y.head(sphere_size()) / rho_;
    const double c = xs.dot(ys);
    const Vector w = ys - c * xs;
    const double sn = w.norm();
    const double theta = std::atan2(sn, c);
    v.head(sphere_size()) = sn > 0.0 ? Vector(w * (rho_ * theta / sn)) : Vector::Zero(sphere_size());
  }
  return v;
}

double ManifoldModel::distance(const Vector& x, const Vector& y) const { return log(x, y).norm(); }

double ManifoldModel::exp_jacobian(const Vector& /*x*/, const Vector& v) const {
  if (l_ < 2) return 1.0;
  const double phi = v.head(sphere_size()).norm() / rho_;
  if (phi < 1e-8) return 1.0 - (l_ - 1) * phi * phi / 6.0;
  return std::pow(std::sin(phi) / phi, l_ - 1);
}

// Along the great circle through x with unit direction v̂, the v̂ component of a
// tangent vector rotates into cos φ v̂ - sin φ x̂ and the rest is unchanged.
Matrix ManifoldModel::transport(const Vector& x, const Vector& v, const Matrix& frame) const {
  Matrix out = frame;
  if (l_ < 1) return out;
  const Vector vs = v.head(sphere_size());
  const double len = vs.norm();
  if (len == 0.0) return out;
  const Vector vhat = vs / len;
  const Vector xhat = x.head(sphere_size()) / rho_;
  const double phi = len / rho_;
  const Vector delta = (std::cos(phi) - 1.0) * vhat - std::sin(phi) * xhat;
  for (int j = 0; j < out.cols(); ++j) {
    const double a = frame.col(j).head(sphere_size()).dot(vhat);
    out.col(j).head(sphere_size()) += a * delta;
  }
  return out;
}

CurvatureTensor ManifoldModel::curvature(const Vector& /*x*/, const Matrix& frame) const {
  const int k = static_cast<int>(frame.cols());
  if (l_ < 2) return CurvatureTensor(k);
  const Matrix s = frame.topRows(sphere_size());
  return CurvatureTensor::gauss_form(s.transpose() * s / rho_);
}

double ManifoldModel::boundary_distance(const Vector& x) const {
  if (ball_boundary()) return r_ - x.tail(m_).norm();
  if (cap_boundary()) return rho_ * (alpha_ - polar_angle(x));
  return std::numeric_limits<double>::infinity();
}

Vector ManifoldModel::inward_normal(const Vector& x) const {
  Vector nu = Vector::Zero(ambient_dimension());
  if (ball_boundary()) {
    const Vector b = x.tail(m_);
    const double len = b.norm();
    if (len == 0.0) throw ValidationError("inward normal undefined at the ball centre");
    nu.tail(m_) = -b / len;
  } else if (cap_boundary()) {
    const Vector s = x.head(sphere_size()) / rho_;
    const double theta = polar_angle(x);
    if (std::sin(theta) < 1e-14) throw ValidationError("inward normal undefined at the cap pole");
    Vector e0 = Vector::Zero(sphere_size());
    e0[0] = 1.0;
    nu.head(sphere_size()) = (e0 - std::cos(theta) * s) / std::sin(theta);
  } else {
    throw ValidationError("model " + name_ + " has no boundary");
  }
  return nu;
}

double ManifoldModel::boundary_principal_curvature() const {
  if (ball_boundary()) return 1.0 / r_;
  if (cap_boundary()) return std::cos(alpha_) / (std::sin(alpha_) * rho_);
  return 0.0;
}

Matrix ManifoldModel::shape_operator(const Vector& x) const {
  const Vector nu = inward_normal(x);
  Matrix p = Matrix::Zero(ambient_dimension(), ambient_dimension());
  if (ball_boundary()) {
    p.bottomRightCorner(m_, m_).setIdentity();
  } else {
    p.topLeftCorner(sphere_size(), sphere_size()) = tangent_projector(x).topLeftCorner(sphere_size(), sphere_size());
  }
  return boundary_principal_curvature() * (p - nu * nu.transpose());
}

Matrix ManifoldModel::shape_operator(const Vector& x, const Matrix& frame) const {
  return frame.transpose() * shape_operator(x) * frame;
}

CurvatureTensor ManifoldModel::boundary_curvature(const Vector& /*x*/, const Matrix& tangential_frame) const {
  const int k = static_cast<int>(tangential_frame.cols());
  CurvatureTensor rz(k);
  if (ball_boundary()) {
    if (l_ >= 2) {
      const Matrix s = tangential_frame.topRows(sphere_size());
      rz += CurvatureTensor::gauss_form(s.transpose() * s / rho_);
    }
    if (m_ >= 3) {
      const Matrix b = tangential_frame.bottomRows(m_);
      rz += CurvatureTensor::gauss_form(b.transpose() * b / r_);
    }
  } else if (cap_boundary() && l_ >= 3) {
    const Matrix s = tangential_frame.topRows(sphere_size());
    rz += CurvatureTensor::gauss_form(s.transpose() * s / (rho_ * std::sin(alpha_)));
  }
  return rz;
}

std::vector<MirrorImage> ManifoldModel::mirror_images(const Vector& a) const {
  std::vector<MirrorImage> out;
  if (ball_boundary()) {
    const Vector b = a.tail(m_);
    if (m_ == 1) {
      // Nearest end first.
      const double near = b[0] >= 0.0 ? r_ : -r_;
      for (double end : {near, -near}) {
        Vector z = a;
        z[sphere_size()] = 2.0 * end - b[0];
        out.push_back({z, 1.0});
      }
      return out;
    }
    const double s = b.norm();
    if (s == 0.0) return out;
    Vector z = a;
    z.tail(m_) = b * ((2.0 * r_ - s) / s);
    out.push_back({z, std::pow((2.0 * r_ - s) / s, m_ - 1)});
  } else if (cap_boundary()) {
    const double theta = polar_angle(a);
    const double image = 2.0 * alpha_ - theta;
    const double sa = std::sin(theta);
    if (image > kPi || sa < 1e-12) return out;
    const Vector s = a.head(sphere_size()) / rho_;
    Vector e0 = Vector::Zero(sphere_size());
    e0[0] = 1.0;
    const Vector w = (s - std::cos(theta) * e0) / sa;
    Vector z = a;
    z.head(sphere_size()) = rho_ * (std::cos(image) * e0 + std::sin(image) * w);
    out.push_back({z, std::pow(std::sin(image) / sa, l_ - 1)});
  }
  return out;
}

Reflection ManifoldModel::reflect(const Vector& z, const Matrix& frame) const {
  Reflection out{z, frame, 0.0, false, true};
  const double depth = -boundary_distance(z);
  if (!(depth > 0.0)) return out;
  out.contact = true;
  out.delta_lambda = 2.0 * depth;
  if (ball_boundary()) {
    const Vector b = z.tail(m_);
    const double s = b.norm();
    const double image = 2.0 * r_ - s;
    if (image < 0.0) {
      out.valid = false;
      return out;
    }
    out.point.tail(m_) = b * (image / s);
    return out;
  }
  const double theta = polar_angle(z);
  const double image = 2.0 * alpha_ - theta;
  if (image < 0.0 || std::sin(theta) < 1e-14) {
    out.valid = false;
    return out;
  }
  const Vector s = z.head(sphere_size()) / rho_;
  Vector e0 = Vector::Zero(sphere_size());
  e0[0] = 1.0;
  const Vector w = (s - std::cos(theta) * e0) / std::sin(theta);
  out.point.head(sphere_size()) = rho_ * (std::cos(image) * e0 + std::sin(image) * w);
  out.frame = transport(z, log(z, out.point), frame);
  return out;
}

Vector ManifoldModel::sample_uniform(RngStream& rng) const {
  Vector x(ambient_dimension());
  if (l_ > 0) {
    for (;;) {
      const Vector s = unit(normal_vector(sphere_size(), rng));
      if (!cap_boundary() || std::atan2(s.tail(l_).norm(), s[0]) <= alpha_) {
        x.head(sphere_size()) = rho_ * s;
        break;
      }
    }
  }
  if (m_ > 0) {
    const Vector dir = unit(normal_vector(m_, rng));
    x.tail(m_) = dir * (r_ * std::pow(rng.uniform(), 1.0 / m_));
  }
  return x;
}

Vector ManifoldModel::sample_interior(RngStream& rng, double depth) const {
  if (depth <= 0.0 || !has_boundary()) return sample_uniform(rng);
  if (depth >= max_collar_width()) throw ValidationError("sample_interior: depth exceeds the collar");
  if (ball_boundary()) {
    Vector x = sample_uniform(rng);
    x.tail(m_) *= (r_ - depth) / r_;
    return x;
  }
  // Polar angle on [0, α'] with density ∝ sin^{l-1}θ, by rejection.
  const double top = alpha_ - depth / rho_;
  const double peak = std::sin(std::min(top, 0.5 * kFullSphere));
  double theta = 0.0;
  for (;;) {
    theta = top * rng.uniform();
    if (rng.uniform() < std::pow(std::sin(theta) / peak, l_ - 1)) break;
  }
  Vector w = normal_vector(sphere_size(), rng);
  w[0] = 0.0;
  w = unit(w);
  Vector e0 = Vector::Zero(sphere_size());
  e0[0] = 1.0;
  Vector x(ambient_dimension());
  x.head(sphere_size()) = rho_ * (std::cos(theta) * e0 + std::sin(theta) * w);
  return x;
}

Vector ManifoldModel::sample_boundary(RngStream& rng) const {
  if (!has_boundary()) throw ValidationError("model " + name_ + " has no boundary");
  Vector x(ambient_dimension());
  if (ball_boundary()) {
    if (l_ > 0) x.head(sphere_size()) = rho_ * unit(normal_vector(sphere_size(), rng));
    x.tail(m_) = r_ * unit(normal_vector(m_, rng));
    return x;
  }
  Vector w = normal_vector(sphere_size(), rng);
  w[0] = 0.0;
  w = unit(w);
  Vector e0 = Vector::Zero(sphere_size());
  e0[0] = 1.0;
  x.head(sphere_size()) = rho_ * (std::cos(alpha_) * e0 + std::sin(alpha_) * w);
  return x;
}

Vector ManifoldModel::collar_point(const Vector& z, double y) const {
  Vector x = z;
  if (ball_boundary()) {
    x.tail(m_) = z.tail(m_) * ((r_ - y) / z.tail(m_).norm());
  } else if (cap_boundary()) {
    const Vector s = z.head(sphere_size()) / rho_;
    const double theta = polar_angle(z);
    Vector e0 = Vector::Zero(sphere_size());
    e0[0] = 1.0;
    const Vector w = (s - std::cos(theta) * e0) / std::sin(theta);
    const double target = alpha_ - y / rho_;
    x.head(sphere_size()) = rho_ * (std::cos(target) * e0 + std::sin(target) * w);
  }
  return x;
}

double ManifoldModel::collar_density(double y) const {
  if (ball_boundary()) return std::pow((r_ - y) / r_, m_ - 1);
  if (cap_boundary()) return std::pow(std::sin(alpha_ - y / rho_) / std::sin(alpha_), l_ - 1);
  return 1.0;
}

double ManifoldModel::max_collar_width() const {
  if (ball_boundary()) return r_;
  if (cap_boundary()) return rho_ * alpha_;
  return 0.0;
}

namespace {

int integer_param(const ModelParameters& p, const std::string& key, int fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  const double v = it->second;
  if (v != std::floor(v)) throw ValidationError("model parameter " + key + " must be an integer");
  return static_cast<int>(v);
}

double real_param(const ModelParameters& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void check_keys(const std::string& name, const ModelParameters& p, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : p) {
    if (!allowed.count(key)) throw ValidationError("model " + name + " does not accept parameter '" + key + "'");
  }
}

}  // namespace

std::vector<std::string> catalog_names() { return {"ball", "hemisphere", "cap", "sphere", "product", "cylinder"}; }

ManifoldModel model_catalog(const std::string& name, const ModelParameters& params) {
  if (name == "ball") {
    check_keys(name, params, {"dimension", "radius"});
    return ManifoldModel(name, 0, 1.0, integer_param(params, "dimension", 2), real_param(params, "radius", 1.0),
                         kPi, 1);
  }
  if (name == "hemisphere" || name == "cap") {
    check_keys(name, params, name == "cap" ? std::set<std::string>{"dimension", "radius", "aperture"}
                                           : std::set<std::string>{"dimension", "radius"});
    const int n = integer_param(params, "dimension", 2);
    if (n < 2) throw ValidationError(name + " needs dimension >= 2");
    const double alpha = name == "cap" ? real_param(params, "aperture", kPi / 3.0) : kPi / 2.0;
    if (!(alpha > 0.0 && alpha < kPi)) throw ValidationError("cap aperture must lie in (0, pi)");
    return ManifoldModel(name, n, real_param(params, "radius", 1.0), 0, 0.0, alpha, 1);
  }
  if (name == "sphere") {
    check_keys(name, params, {"dimension", "radius"});
    const int n = integer_param(params, "dimension", 2);
    return ManifoldModel(name, n, real_param(params, "radius", 1.0), 0, 0.0, kPi, n % 2 == 0 ? 2 : 0);
  }
  if (name == "product") {
    check_keys(name, params, {"sphere_dimension", "sphere_radius", "ball_dimension", "ball_radius"});
    const int l = integer_param(params, "sphere_dimension", 1);
    const int m = integer_param(params, "ball_dimension", 2);
    if (l < 1 || m < 1) throw ValidationError("product needs sphere_dimension >= 1 and ball_dimension >= 1");
    return ManifoldModel(name, l, real_param(params, "sphere_radius", 1.0), m, real_param(params, "ball_radius", 1.0),
                         kPi, l % 2 == 0 ? 2 : 0);
  }
  if (name == "cylinder") {
    check_keys(name, params, {"length", "radius"});
    const double length = real_param(params, "length", 1.0);
    if (!(length > 0.0)) throw ValidationError("cylinder length must be positive");
    return ManifoldModel(name, 1, real_param(params, "radius", 1.0), 1, 0.5 * length, kPi, 0);
  }
  throw ValidationError("unknown model '" + name + "'");
}

BoundaryGeometry boundary_geometry(const ManifoldModel& model, const Vector& z, const Matrix& tangential_frame) {
  BoundaryGeometry g{tangential_frame,
                     tangential_frame.transpose() * tangential_frame,
                     model.curvature(z, tangential_frame),
                     model.boundary_curvature(z, tangential_frame),
                     CurvatureTensor(static_cast<int>(tangential_frame.cols())),
                     model.shape_operator(z, tangential_frame)};
  g.gauss_form = CurvatureTensor::gauss_form(g.shape_operator);
  return g;
}

double gauss_equation_check(const ManifoldModel& model, RngStream& rng, int points) {
  if (!model.has_boundary()) throw ValidationError("gauss_equation_check needs a model with boundary");
  const int n = model.dimension();
  if (n < 3) return 0.0;
  double worst = 0.0;
  for (int p = 0; p < points; ++p) {
    const Vector z = model.sample_boundary(rng);
    const Matrix tangential = model.adapted_frame(z).leftCols(n - 1);
    Matrix g(n - 1, n - 1);
    for (int i = 0; i < n - 1; ++i)
      for (int j = 0; j < n - 1; ++j) g(i, j) = rng.normal();
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(n - 1, n - 1);
    const BoundaryGeometry b = boundary_geometry(model, z, tangential * q);
    CurvatureTensor diff = b.ambient_curvature + b.gauss_form;
    diff += CurvatureTensor(b.intrinsic_curvature) *= -1.0;
    worst = std::max(worst, diff.max_abs());
  }
  return worst;
}

}  // namespace gbmc::geometry
