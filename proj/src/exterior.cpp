#include "gbmc/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gbmc/errors.hpp"

namespace gbmc::exterior {

namespace {

void check_dimension(int n) {
  if (n < 1 || n > kMaxDimension) {
    throw ValidationError("exterior dimension must lie in [1, 8], got " + std::to_string(n));
  }
}

void check_same(int a, int b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
}

// Sign of e_s ∧ e_t for disjoint s, t: parity of pairs (i in s, j in t) with i > j.
double wedge_sign(Mask s, Mask t) {
  int inversions = 0;
  for (Mask rest = t; rest != 0; rest &= rest - 1) {
    const int j = __builtin_ctz(rest);
    inversions += degree(s & ~((Mask{2} << j) - 1));
  }
  return (inversions & 1) ? -1.0 : 1.0;
}

// Adds sign * row(s) of x into row(t) of out for the elementary derivation
// e_a ∧ ι_b, i.e. out += D(E_ab) * x with E_ab = e_a e_b^T.
void accumulate_elementary(int n, int a, int b, double coeff, const Matrix& x, Matrix& out) {
  const Mask bit_a = Mask{1} << a;
  const Mask bit_b = Mask{1} << b;
  const Mask count = static_cast<Mask>(algebra_size(n));
  for (Mask s = 0; s < count; ++s) {
    if (!(s & bit_b)) continue;
    const Mask rest = s & ~bit_b;
    if (rest & bit_a) continue;
    const double sign = sign_below(s, b) * sign_below(rest, a);
    out.row(rest | bit_a) += (coeff * sign) * x.row(s);
  }
}

}  // namespace

// ---------------------------------------------------------------- MultiVector

MultiVector::MultiVector(int n) : n_(n) {
  check_dimension(n);
  coefficients_ = Vector::Zero(static_cast<Eigen::Index>(algebra_size(n)));
}

MultiVector MultiVector::basis(int n, Mask s) {
  MultiVector out(n);
  if (s >= algebra_size(n)) throw ValidationError("basis mask out of range");
  out[s] = 1.0;
  return out;
}

MultiVector MultiVector::scalar(int n, double value) {
  MultiVector out(n);
  out[0] = value;
  return out;
}

MultiVector MultiVector::from_vector(const Vector& v) {
  MultiVector out(static_cast<int>(v.size()));
  for (int i = 0; i < v.size(); ++i) out[Mask{1} << i] = v[i];
  return out;
}

MultiVector MultiVector::degree_part(int p) const {
  MultiVector out(n_);
  for (Mask s = 0; s < size(); ++s) {
    if (degree(s) == p) out[s] = coefficients_[s];
  }
  return out;
}

MultiVector& MultiVector::operator+=(const MultiVector& other) {
  check_same(n_, other.n_, "MultiVector +");
  coefficients_ += other.coefficients_;
  return *this;
}

MultiVector& MultiVector::operator-=(const MultiVector& other) {
  check_same(n_, other.n_, "MultiVector -");
  coefficients_ -= other.coefficients_;
  return *this;
}

MultiVector& MultiVector::operator*=(double s) {
  coefficients_ *= s;
  return *this;
}

MultiVector operator+(MultiVector a, const MultiVector& b) { return a += b; }
MultiVector operator-(MultiVector a, const MultiVector& b) { return a -= b; }
MultiVector operator*(double s, MultiVector a) { return a *= s; }

double inner(const MultiVector& a, const MultiVector& b) {
  check_same(a.dimension(), b.dimension(), "inner");
  return a.coefficients().dot(b.coefficients());
}

MultiVector wedge(const MultiVector& a, const MultiVector& b) {
  check_same(a.dimension(), b.dimension(), "wedge");
  MultiVector out(a.dimension());
  const Mask count = static_cast<Mask>(a.size());
  for (Mask s = 0; s < count; ++s) {
    if (a[s] == 0.0) continue;
    for (Mask t = 0; t < count; ++t) {
      if ((s & t) || b[t] == 0.0) continue;
      out[s | t] += wedge_sign(s, t) * a[s] * b[t];
    }
  }
  return out;
}

MultiVector contract(const Vector& v, const MultiVector& a) {
  check_same(static_cast<int>(v.size()), a.dimension(), "contract");
  MultiVector out(a.dimension());
  const Mask count = static_cast<Mask>(a.size());
  for (Mask s = 0; s < count; ++s) {
    if (a[s] == 0.0) continue;
    for (Mask rest = s; rest != 0; rest &= rest - 1) {
      const int i = __builtin_ctz(rest);
      out[s & ~(Mask{1} << i)] += sign_below(s, i) * v[i] * a[s];
    }
  }
  return out;
}

// ------------------------------------------------------------- GradedOperator

GradedOperator::GradedOperator(int n) : n_(n) {
  check_dimension(n);
  const auto size = static_cast<Eigen::Index>(algebra_size(n));
  m_ = Matrix::Zero(size, size);
}

GradedOperator::GradedOperator(int n, Matrix m) : n_(n), m_(std::move(m)) {
  check_dimension(n);
  const auto size = static_cast<Eigen::Index>(algebra_size(n));
  if (m_.rows() != size || m_.cols() != size) {
    throw ValidationError("GradedOperator matrix must be 2^n x 2^n");
  }
}

GradedOperator GradedOperator::identity(int n) {
  const auto size = static_cast<Eigen::Index>(algebra_size(n));
  return GradedOperator(n, Matrix::Identity(size, size));
}

MultiVector GradedOperator::apply(const MultiVector& a) const {
  check_same(n_, a.dimension(), "GradedOperator::apply");
  MultiVector out(n_);
  out.coefficients() = m_ * a.coefficients();
  return out;
}

Matrix GradedOperator::block(int p) const {
  std::vector<Mask> masks;
  for (Mask s = 0; s < algebra_size(n_); ++s) {
    if (degree(s) == p) masks.push_back(s);
  }
  const auto k = static_cast<Eigen::Index>(masks.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m_(masks[i], masks[j]);
  }
  return out;
}

double GradedOperator::off_block_norm() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m_.rows(); ++i) {
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
      if (degree(static_cast<Mask>(i)) != degree(static_cast<Mask>(j))) {
        worst = std::max(worst, std::abs(m_(i, j)));
      }
    }
  }
  return worst;
}

GradedOperator& GradedOperator::operator+=(const GradedOperator& o) {
  check_same(n_, o.n_, "GradedOperator +");
  m_ += o.m_;
  return *this;
}

GradedOperator& GradedOperator::operator-=(const GradedOperator& o) {
  check_same(n_, o.n_, "GradedOperator -");
  m_ -= o.m_;
  return *this;
}

GradedOperator& GradedOperator::operator*=(double s) {
  m_ *= s;
  return *this;
}

GradedOperator operator+(GradedOperator a, const GradedOperator& b) { return a += b; }
GradedOperator operator-(GradedOperator a, const GradedOperator& b) { return a -= b; }
GradedOperator operator*(double s, GradedOperator a) { return a *= s; }

GradedOperator operator*(const GradedOperator& a, const GradedOperator& b) {
  check_same(a.dimension(), b.dimension(), "GradedOperator *");
  return GradedOperator(a.dimension(), a.matrix() * b.matrix());
}

GradedOperator wedge_operator(const Vector& v) {
  const int n = static_cast<int>(v.size());
  GradedOperator out(n);
  for (Mask s = 0; s < algebra_size(n); ++s) {
    for (int i = 0; i < n; ++i) {
      const Mask bit = Mask{1} << i;
      if (s & bit) continue;
      out.matrix()(s | bit, s) += sign_below(s, i) * v[i];
    }
  }
  return out;
}

GradedOperator contraction_operator(const Vector& v) {
  const int n = static_cast<int>(v.size());
  GradedOperator out(n);
  for (Mask s = 0; s < algebra_size(n); ++s) {
    for (int i = 0; i < n; ++i) {
      const Mask bit = Mask{1} << i;
      if (!(s & bit)) continue;
      out.matrix()(s & ~bit, s) += sign_below(s, i) * v[i];
    }
  }
  return out;
}

GradedOperator derivation_extend(const Matrix& b) {
  if (b.rows() != b.cols()) throw ValidationError("derivation_extend: matrix must be square");
  const int n = static_cast<int>(b.rows());
  GradedOperator out(n);
  Matrix& m = out.matrix();
  for (Mask s = 0; s < algebra_size(n); ++s) {
    for (Mask from = s; from != 0; from &= from - 1) {
      const int j = __builtin_ctz(from);
      const Mask rest = s & ~(Mask{1} << j);
      const double sj = sign_below(s, j);
      for (int i = 0; i < n; ++i) {
        const double bij = b(i, j);
        if (bij == 0.0) continue;
        const Mask bit = Mask{1} << i;
        if (rest & bit) continue;
        m(rest | bit, s) += sj * sign_below(rest, i) * bij;
      }
    }
  }
  return out;
}

GradedOperator pair_extend(int n, std::span<const PairTerm> terms) {
  GradedOperator out(n);
  for (const auto& term : terms) {
    if (term.t.rows() != n || term.t.cols() != n || term.u.rows() != n || term.u.cols() != n) {
      throw ValidationError("pair_extend: all matrices must be n x n");
    }
    out.matrix().noalias() -=
        term.weight * (derivation_extend(term.t).matrix() * derivation_extend(term.u).matrix());
  }
  return out;
}

GradedOperator lift(const Matrix& q) {
  if (q.rows() != q.cols()) throw ValidationError("lift: matrix must be square");
  const int n = static_cast<int>(q.rows());
  GradedOperator out(n);
  const Mask count = static_cast<Mask>(algebra_size(n));
  std::vector<int> rows;
  std::vector<int> cols;
  for (Mask s = 0; s < count; ++s) {
    cols.clear();
    for (int i = 0; i < n; ++i) {
      if (s & (Mask{1} << i)) cols.push_back(i);
    }
    const int p = static_cast<int>(cols.size());
    if (p == 0) {
      out.matrix()(0, 0) = 1.0;
      continue;
    }
    for (Mask t = 0; t < count; ++t) {
      if (degree(t) != p) continue;
      rows.clear();
      for (int i = 0; i < n; ++i) {
        if (t & (Mask{1} << i)) rows.push_back(i);
      }
      Matrix minor(p, p);
      for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) minor(a, b) = q(rows[a], cols[b]);
      }
      out.matrix()(t, s) = minor.determinant();
    }
  }
  return out;
}

// ------------------------------------------------------------ CurvatureTensor

CurvatureTensor::CurvatureTensor(int n) : n_(n) {
  check_dimension(n);
  r_.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
}

CurvatureTensor CurvatureTensor::constant_curvature(int n, double kappa) {
  CurvatureTensor out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      out(i, j, i, j) = kappa;
      out(i, j, j, i) = -kappa;
    }
  }
  return out;
}

CurvatureTensor CurvatureTensor::gauss_form(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  CurvatureTensor out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out(i, j, k, l) = a(i, k) * a(j, l) - a(i, l) * a(j, k);
  return out;
}

CurvatureTensor CurvatureTensor::in_frame(const Matrix& frame) const {
  if (frame.rows() != n_) throw ValidationError("in_frame: frame rows must equal dimension");
  const int m = static_cast<int>(frame.cols());
  // Contract one index at a time.
  const auto idx = [](int d, int i, int j, int k, int l) {
    return ((static_cast<std::size_t>(i) * d + j) * d + k) * d + l;
  };
  std::vector<double> cur = r_;
  std::vector<int> dims = {n_, n_, n_, n_};
  for (int slot = 0; slot < 4; ++slot) {
    std::vector<int> nd = dims;
    nd[slot] = m;
    std::vector<double> next(static_cast<std::size_t>(nd[0]) * nd[1] * nd[2] * nd[3], 0.0);
    const auto at = [](const std::vector<int>& d, int i, int j, int k, int l) {
      return ((static_cast<std::size_t>(i) * d[1] + j) * d[2] + k) * d[3] + l;
    };
    for (int i = 0; i < nd[0]; ++i)
      for (int j = 0; j < nd[1]; ++j)
        for (int k = 0; k < nd[2]; ++k)
          for (int l = 0; l < nd[3]; ++l) {
            double acc = 0.0;
            int src[4] = {i, j, k, l};
            const int target = src[slot];
            for (int x = 0; x < n_; ++x) {
              src[slot] = x;
              acc += frame(x, target) * cur[at(dims, src[0], src[1], src[2], src[3])];
            }
            next[at(nd, i, j, k, l)] = acc;
          }
    cur.swap(next);
    dims = nd;
  }
  CurvatureTensor out(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) out(i, j, k, l) = cur[idx(m, i, j, k, l)];
  return out;
}

double CurvatureTensor::symmetry_violation() const {
  double worst = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          const double r = (*this)(i, j, k, l);
          worst = std::max(worst, std::abs(r + (*this)(j, i, k, l)));
          worst = std::max(worst, std::abs(r + (*this)(i, j, l, k)));
          worst = std::max(worst, std::abs(r - (*this)(k, l, i, j)));
          worst = std::max(worst, std::abs(r + (*this)(i, k, l, j) + (*this)(i, l, j, k)));
        }
  return worst;
}

double CurvatureTensor::max_abs() const {
  double worst = 0.0;
  for (double v : r_) worst = std::max(worst, std::abs(v));
  return worst;
}

CurvatureTensor& CurvatureTensor::operator+=(const CurvatureTensor& o) {
  check_same(n_, o.n_, "CurvatureTensor +");
  for (std::size_t i = 0; i < r_.size(); ++i) r_[i] += o.r_[i];
  return *this;
}

CurvatureTensor& CurvatureTensor::operator*=(double s) {
  for (double& v : r_) v *= s;
  return *this;
}

CurvatureTensor operator+(CurvatureTensor a, const CurvatureTensor& b) { return a += b; }

// R = Σ_ab E_ab ⊗ R_ab with (R_ab)_{cd} = R_abcd and DR = Σ_ab -D(E_ab) D(R_ab).
GradedOperator curvature_to_operator(const CurvatureTensor& r) {
  const int n = r.dimension();
  const double scale = std::max(1.0, r.max_abs());
  if (r.symmetry_violation() > 1e-10 * scale) {
    throw ValidationError("curvature tensor violates its algebraic symmetries");
  }
  GradedOperator out(n);
  Matrix slice(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      bool any = false;
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          slice(c, d) = r(a, b, c, d);
          any = any || slice(c, d) != 0.0;
        }
      if (!any) continue;
      const Matrix inner_op = derivation_extend(slice).matrix();
      accumulate_elementary(n, a, b, -1.0, inner_op, out.matrix());
    }
  }
  return out;
}

GradedOperator parity(int n) {
  GradedOperator out(n);
  for (Mask s = 0; s < algebra_size(n); ++s) out.matrix()(s, s) = (degree(s) & 1) ? -1.0 : 1.0;
  return out;
}

double supertrace(const GradedOperator& o) {
  double acc = 0.0;
  for (Mask s = 0; s < algebra_size(o.dimension()); ++s) {
    acc += ((degree(s) & 1) ? -1.0 : 1.0) * o.matrix()(s, s);
  }
  return acc;
}

BoundaryProjections boundary_projections(const Vector& nu) {
  if (std::abs(nu.norm() - 1.0) > 1e-12) {
    throw ValidationError("boundary_projections: normal must be a unit vector");
  }
  const GradedOperator w = wedge_operator(nu);
  const GradedOperator c = contraction_operator(nu);
  // I - ν∧ν⌐ rather than ν⌐ν∧ keeps the scalar block exactly 1.
  GradedOperator normal = w * c;
  const std::size_t size = algebra_size(static_cast<int>(nu.size()));
  GradedOperator tangential(static_cast<int>(nu.size()), Matrix::Identity(size, size) - normal.matrix());
  return {std::move(tangential), std::move(normal)};
}

GradedOperator shape_operator_extension(const Matrix& a, const Vector& nu) {
  if (a.rows() != nu.size() || a.cols() != nu.size()) {
    throw ValidationError("shape_operator_extension: shape operator must be n x n");
  }
  if ((a * nu).norm() > 1e-12 * std::max(1.0, a.norm())) {
    throw ValidationError("shape_operator_extension: shape operator must annihilate the normal");
  }
  return derivation_extend(a);
}

GradedOperator penalized_shape_operator(const Matrix& a, const Vector& nu, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("penalized_shape_operator: epsilon must be positive");
  return shape_operator_extension(a, nu) + (1.0 / epsilon) * boundary_projections(nu).normal;
}

double pfaffian_supertrace(const CurvatureTensor& r) {
  const int n = r.dimension();
  if (n % 2 != 0) throw ValidationError("pfaffian_supertrace: dimension must be even");
  const GradedOperator dr = curvature_to_operator(r);
  GradedOperator power = GradedOperator::identity(n);
  for (int i = 0; i < n / 2; ++i) power = power * dr;
  return supertrace(power);
}

double kronecker_contraction(const CurvatureTensor& r) {
  const int n = r.dimension();
  if (n % 2 != 0) throw ValidationError("kronecker_contraction: dimension must be even");
  if (n > 6) throw ValidationError("kronecker_contraction: brute force limited to n <= 6");
  std::vector<int> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  const auto perm_sign = [](const std::vector<int>& p) {
    int inv = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j) inv += p[i] > p[j];
    return (inv & 1) ? -1.0 : 1.0;
  };
  double total = 0.0;
  do {
    const double ss = perm_sign(sigma);
    std::vector<int> tau(n);
    std::iota(tau.begin(), tau.end(), 0);
    do {
      double term = ss * perm_sign(tau);
      for (int k = 0; k < n && term != 0.0; k += 2) {
        term *= r(sigma[k], sigma[k + 1], tau[k], tau[k + 1]);
      }
      total += term;
    } while (std::next_permutation(tau.begin(), tau.end()));
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total;
}

Matrix symmetric_exp(const Matrix& s, double scale) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Vector ev = (scale * eig.eigenvalues().array()).exp();
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace gbmc::exterior
