#include "gbmc/heat_kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gbmc/errors.hpp"

namespace gbmc::heat {

namespace {

constexpr double kPi = std::numbers::pi;
// Terms with exp(-kCut) relative weight or less are dropped.
constexpr double kCut = 40.0;

double gaussian_1d(double t, double d) { return std::exp(-0.5 * d * d / t) / std::sqrt(2.0 * kPi * t); }

void check_terms(long long needed, const char* what) {
  if (needed > kMaxTerms)
    throw NumericalError(std::string(what) + ": series needs " + std::to_string(needed) + " terms (limit " +
                         std::to_string(kMaxTerms) + "); increase t");
}

double zero_derivative(int dimension, int m, double x) {
  if (dimension == 2) {
    if (m == 0) return -std::cyl_bessel_j(1.0, x);
    return 0.5 * (std::cyl_bessel_j(m - 1.0, x) - std::cyl_bessel_j(m + 1.0, x));
  }
  if (m == 0) return -std::sph_bessel(1, x);
  return std::sph_bessel(m - 1, x) - (m + 1.0) / x * std::sph_bessel(m, x);
}

double angle_between(const Vector& a, const Vector& b) {
  const double c = a.dot(b);
  const double s = (b - c / a.squaredNorm() * a).norm() * a.norm();
  return std::atan2(s, c);
}

// cos(m γ) for m = 0..M by the Chebyshev recurrence.
std::vector<double> cosines(double c, int count) {
  std::vector<double> out(std::max(count, 2));
  out[0] = 1.0;
  out[1] = c;
  for (int m = 2; m < count; ++m) out[m] = 2.0 * c * out[m - 1] - out[m - 2];
  return out;
}

}  // namespace

std::vector<double> neumann_zeros(int dimension, int m, double limit) {
  if (dimension != 2 && dimension != 3) throw ValidationError("neumann_zeros: dimension must be 2 or 3");
  std::vector<double> out;
  const double start = m == 0 ? 0.1 : 0.5 * std::sqrt(m * (m + 1.0)) + 0.1;
  const double step = 0.2;
  double a = start;
  double fa = zero_derivative(dimension, m, a);
  while (a < limit + step) {
    const double b = a + step;
    const double fb = zero_derivative(dimension, m, b);
    if (fa == 0.0) {
      out.push_back(a);
    } else if (fa * fb < 0.0) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = zero_derivative(dimension, m, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double z = 0.5 * (lo + hi);
      if (z <= limit) out.push_back(z);
    }
    a = b;
    fa = fb;
  }
  return out;
}

double interval_kernel(double t, double half_length, double x, double y, int* terms) {
  // [-r, r] -> [0, L]; images 2jL ± y.
  const double len = 2.0 * half_length;
  const double s = x + half_length;
  const double u = y + half_length;
  const int reach = 2 + static_cast<int>(std::ceil(std::sqrt(2.0 * kCut * t) / len));
  check_terms(2LL * (2 * reach + 1), "interval kernel");
  double sum = 0.0;
  for (int j = -reach; j <= reach; ++j) sum += gaussian_1d(t, s - u + 2.0 * j * len) + gaussian_1d(t, s + u + 2.0 * j * len);
  if (terms) *terms += 2 * (2 * reach + 1);
  return sum;
}

double circle_kernel(double t, double radius, double angle, int* terms) {
  const double period = 2.0 * kPi * radius;
  const int reach = 2 + static_cast<int>(std::ceil(std::sqrt(2.0 * kCut * t) / period));
  check_terms(2LL * reach + 1, "circle kernel");
  double sum = 0.0;
  for (int j = -reach; j <= reach; ++j) sum += gaussian_1d(t, radius * angle + j * period);
  if (terms) *terms += 2 * reach + 1;
  return sum;
}

// Zonal expansion: Σ_k exp(-k(k+l-1)t / 2ρ²) (2k+l-1)/(l-1) C_k^{(l-1)/2}(cos γ) / |S^l_ρ|.
double sphere_kernel(int l, double radius, double t, double angle, int* terms) {
  if (l < 2) throw ValidationError("sphere_kernel needs l >= 2");
  const double area = 2.0 * std::pow(kPi, 0.5 * (l + 1)) / std::tgamma(0.5 * (l + 1)) * std::pow(radius, l);
  const double lambda = 0.5 * (l - 1);
  const double scaled = t / (2.0 * radius * radius);
  const long long kmax = static_cast<long long>(std::ceil(std::sqrt(kCut / scaled))) + l + 2;
  check_terms(kmax, "sphere kernel");
  const double x = std::cos(angle);
  double c_prev = 1.0;
  double c = 2.0 * lambda * x;
  double sum = 1.0;  // k = 0 term: (l-1)/(l-1) C_0 = 1
  for (long long k = 1; k <= kmax; ++k) {
    if (k > 1) {
      const double next = (2.0 * x * (k + lambda - 1.0) * c - (k + 2.0 * lambda - 2.0) * c_prev) / k;
      c_prev = c;
      c = next;
    }
    sum += std::exp(-k * (k + l - 1.0) * scaled) * (2.0 * k + l - 1.0) / (l - 1.0) * c;
  }
  if (terms) *terms += static_cast<int>(kmax + 1);
  return sum / area;
}

double gaussian_parametrix(const ManifoldModel& model, double t, const Vector& x, const Vector& y) {
  const int n = model.dimension();
  const double norm = std::pow(2.0 * kPi * t, -0.5 * n);
  double sum = std::exp(-0.5 * std::pow(model.distance(x, y), 2) / t);
  for (const auto& img : model.mirror_images(y)) sum += img.jacobian * std::exp(-0.5 * std::pow(model.distance(x, img.point), 2) / t);
  return norm * sum;
}

NeumannHeatKernel::NeumannHeatKernel(const ManifoldModel& model) : model_(model) {
  const int l = model.sphere_dimension();
  const int m = model.ball_dimension();
  const bool sphere_ok = l == 0 || !model.has_boundary() || m > 0 || std::abs(model.aperture() - 0.5 * kPi) < 1e-15;
  const bool ball_ok = m <= 3;
  exact_ = sphere_ok && ball_ok;
}

const std::vector<double>& NeumannHeatKernel::zeros(int m, double limit) const {
  auto it = zero_limit_.find(m);
  if (it == zero_limit_.end() || it->second < limit) {
    zero_cache_[m] = neumann_zeros(model_.ball_dimension(), m, limit);
    zero_limit_[m] = limit;
  }
  return zero_cache_[m];
}

double NeumannHeatKernel::ball_factor(double t, const Vector& x, const Vector& y, int& terms) const {
  const int m = model_.ball_dimension();
  const double r = model_.ball_radius();
  const Vector xb = x.tail(m);
  const Vector yb = y.tail(m);
  if (m == 1) return interval_kernel(t, r, xb[0], yb[0], &terms);
  const double limit = std::sqrt(2.0 * kCut * r * r / t);
  check_terms(static_cast<long long>(limit * limit / 2.0), m == 2 ? "disk kernel" : "ball kernel");
  const double px = xb.norm() / r;
  const double py = yb.norm() / r;
  const double c = (px > 0.0 && py > 0.0) ? xb.dot(yb) / (xb.norm() * yb.norm()) : 1.0;
  double sum = 0.0;
  if (m == 2) {
    sum = 1.0 / (kPi * r * r);
    const int mmax = static_cast<int>(std::ceil(limit)) + 1;
    const std::vector<double> cs = cosines(c, mmax + 1);
    for (int order = 0; order <= mmax; ++order) {
      const auto& zs = zeros(order, limit);
      if (zs.empty()) break;
      for (double j : zs) {
        const double jm = std::cyl_bessel_j(double(order), j);
        const double norm = 0.5 * r * r * (1.0 - double(order) * order / (j * j)) * jm * jm;
        const double f = std::cyl_bessel_j(double(order), j * px) * std::cyl_bessel_j(double(order), j * py) / norm;
        sum += std::exp(-0.5 * j * j * t / (r * r)) * f * (order == 0 ? 1.0 / (2.0 * kPi) : cs[order] / kPi);
        ++terms;
      }
    }
    return sum;
  }
  if (m == 3) {
    sum = 3.0 / (4.0 * kPi * r * r * r);
    const int lmax = static_cast<int>(std::ceil(limit)) + 1;
    double p_prev = 1.0, p = c;  // Legendre P_{l-1}, P_l
    for (int order = 0; order <= lmax; ++order) {
      const double pl = order == 0 ? 1.0 : p;
      const auto& zs = zeros(order, limit);
      if (zs.empty()) break;
      for (double z : zs) {
        const double jz = std::sph_bessel(order, z);
        const double norm = 0.5 * r * r * r * jz * jz * (1.0 - order * (order + 1.0) / (z * z));
        const double f = std::sph_bessel(order, z * px) * std::sph_bessel(order, z * py) / norm;
        sum += std::exp(-0.5 * z * z * t / (r * r)) * f * (2.0 * order + 1.0) / (4.0 * kPi) * pl;
        ++terms;
      }
      if (order >= 1) {
        const double next = ((2.0 * order + 1.0) * c * p - order * p_prev) / (order + 1.0);
        p_prev = p;
        p = next;
      }
    }
    return sum;
  }
  throw ValidationError("no closed-form kernel for ball dimension " + std::to_string(m));
}

double NeumannHeatKernel::sphere_factor(double t, const Vector& x, const Vector& y, int& terms) const {
  const int l = model_.sphere_dimension();
  const int size = l + 1;
  const Vector xs = x.head(size);
  const Vector ys = y.head(size);
  const double rho = model_.sphere_radius();
  if (l == 1) return circle_kernel(t, rho, angle_between(xs, ys), &terms);
  double value = sphere_kernel(l, rho, t, angle_between(xs, ys), &terms);
  if (model_.has_boundary() && model_.ball_dimension() == 0) {
    Vector mirrored = ys;
    mirrored[0] = -mirrored[0];
    value += sphere_kernel(l, rho, t, angle_between(xs, mirrored), &terms);
  }
  return value;
}

KernelValue NeumannHeatKernel::operator()(double t, const Vector& x, const Vector& y) const {
  if (!(t > 0.0)) throw ValidationError("heat kernel needs t > 0");
  KernelValue out;
  out.exact = exact_;
  if (!exact_) {
    out.value = gaussian_parametrix(model_, t, x, y);
    out.terms = 1;
    return out;
  }
  double value = 1.0;
  if (model_.sphere_dimension() > 0) value *= sphere_factor(t, x, y, out.terms);
  if (model_.ball_dimension() > 0) value *= ball_factor(t, x, y, out.terms);
  out.value = value;
  return out;
}

KernelValue neumann_heat_kernel(const ManifoldModel& model, double t, const Vector& x, const Vector& y) {
  return NeumannHeatKernel(model)(t, x, y);
}

}  // namespace gbmc::heat
