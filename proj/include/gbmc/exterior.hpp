#pragma once

// Exterior algebra over R^n with a dense graded-operator calculus.
//
// Basis elements of Lambda R^n are indexed by bitmasks: bit i set means e_{i+1}
// is a factor, and the factors are taken in ascending index order. Operators are
// dense 2^n x 2^n matrices over that basis, which is plenty for n <= 8.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace gbmc::exterior {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = std::uint32_t;

inline constexpr int kMaxDimension = 8;

inline int degree(Mask s) { return __builtin_popcount(s); }
inline std::size_t algebra_size(int n) { return std::size_t{1} << n; }

// (-1)^{number of elements of s strictly below index i}
inline double sign_below(Mask s, int i) {
  return (degree(s & ((Mask{1} << i) - 1)) & 1) ? -1.0 : 1.0;
}

class MultiVector {
 public:
  explicit MultiVector(int n);

  static MultiVector basis(int n, Mask s);
  static MultiVector scalar(int n, double value);
  static MultiVector from_vector(const Vector& v);

  int dimension() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(coefficients_.size()); }

  double operator[](Mask s) const { return coefficients_[s]; }
  double& operator[](Mask s) { return coefficients_[s]; }

  const Vector& coefficients() const { return coefficients_; }
  Vector& coefficients() { return coefficients_; }

  // Projection onto the degree-p component.
  MultiVector degree_part(int p) const;

  MultiVector& operator+=(const MultiVector& other);
  MultiVector& operator-=(const MultiVector& other);
  MultiVector& operator*=(double s);

 private:
  int n_;
  Vector coefficients_;
};

MultiVector operator+(MultiVector a, const MultiVector& b);
MultiVector operator-(MultiVector a, const MultiVector& b);
MultiVector operator*(double s, MultiVector a);

double inner(const MultiVector& a, const MultiVector& b);
MultiVector wedge(const MultiVector& a, const MultiVector& b);
// Interior product v ⌐ a.
MultiVector contract(const Vector& v, const MultiVector& a);

class GradedOperator {
 public:
  explicit GradedOperator(int n);
  GradedOperator(int n, Matrix m);

  static GradedOperator identity(int n);

  int dimension() const { return n_; }
  const Matrix& matrix() const { return m_; }
  Matrix& matrix() { return m_; }

  MultiVector apply(const MultiVector& a) const;

  // Restriction to Lambda^p, in the order of increasing mask.
  Matrix block(int p) const;
  // Largest entry connecting different degrees.
  double off_block_norm() const;
  bool is_degree_preserving(double tol = 1e-14) const { return off_block_norm() <= tol; }

  GradedOperator transpose() const { return GradedOperator(n_, m_.transpose()); }

  GradedOperator& operator+=(const GradedOperator& o);
  GradedOperator& operator-=(const GradedOperator& o);
  GradedOperator& operator*=(double s);

 private:
  int n_;
  Matrix m_;
};

GradedOperator operator+(GradedOperator a, const GradedOperator& b);
GradedOperator operator-(GradedOperator a, const GradedOperator& b);
GradedOperator operator*(double s, GradedOperator a);
GradedOperator operator*(const GradedOperator& a, const GradedOperator& b);

// Left multiplication by v (v ∧ ·) and interior product (v ⌐ ·) as operators.
GradedOperator wedge_operator(const Vector& v);
GradedOperator contraction_operator(const Vector& v);

// Unique derivation of Lambda R^n restricting to B on vectors.
GradedOperator derivation_extend(const Matrix& b);

struct PairTerm {
  Matrix t;
  Matrix u;
  double weight = 1.0;
};

// Sum of weight * (-D(T) o D(U)). An empty list yields the zero operator.
GradedOperator pair_extend(int n, std::span<const PairTerm> terms);

// Induced algebra automorphism Lambda(Q): e_S -> Q e_{s1} ∧ ... ∧ Q e_{sp}.
GradedOperator lift(const Matrix& q);

class CurvatureTensor {
 public:
  explicit CurvatureTensor(int n);

  // R_{ijkl} = kappa (d_ik d_jl - d_il d_jk).
  static CurvatureTensor constant_curvature(int n, double kappa);
  // Gauss form A_ik A_jl - A_il A_jk of a symmetric endomorphism.
  static CurvatureTensor gauss_form(const Matrix& a);

  int dimension() const { return n_; }
  double operator()(int i, int j, int k, int l) const { return r_[index(i, j, k, l)]; }
  double& operator()(int i, int j, int k, int l) { return r_[index(i, j, k, l)]; }

  // Components along the orthonormal columns of `frame` (n x m).
  CurvatureTensor in_frame(const Matrix& frame) const;

  // Largest violation among the pair antisymmetries, pair symmetry and the
  // first Bianchi identity.
  double symmetry_violation() const;
  double max_abs() const;

  CurvatureTensor& operator+=(const CurvatureTensor& o);
  CurvatureTensor& operator*=(double s);

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l;
  }

  int n_;
  std::vector<double> r_;
};

CurvatureTensor operator+(CurvatureTensor a, const CurvatureTensor& b);

// Weitzenbock curvature term DR. Normalised so that DR_p = kappa p (n - p) on
// the constant curvature kappa space form.
GradedOperator curvature_to_operator(const CurvatureTensor& r);

GradedOperator parity(int n);
double supertrace(const GradedOperator& o);

struct BoundaryProjections {
  GradedOperator tangential;
  GradedOperator normal;
};

// Splitting I = ν⌐ν∧ + ν∧ν⌐ for a unit vector ν.
BoundaryProjections boundary_projections(const Vector& nu);

// DA for a shape operator with Aν = 0.
GradedOperator shape_operator_extension(const Matrix& a, const Vector& nu);
// DA + ε^{-1} Π_nor.
GradedOperator penalized_shape_operator(const Matrix& a, const Vector& nu, double epsilon);

// Str DR^{n/2}; n must be even.
double pfaffian_supertrace(const CurvatureTensor& r);
// Σ δ^{i1..in}_{j1..jn} R_{i1 i2 j1 j2} ... R_{i(n-1) in j(n-1) jn}, by brute force
// over pairs of permutations. Limited to n <= 6.
double kronecker_contraction(const CurvatureTensor& r);

// exp(scale * S) for symmetric S via eigendecomposition.
Matrix symmetric_exp(const Matrix& s, double scale);

}  // namespace gbmc::exterior
