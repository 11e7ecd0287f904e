#pragma once

// Closed-form model manifolds S^l_rho x D^m_r embedded in R^{l+1} x R^m.
//
// Points, tangent vectors and frames are stored in ambient coordinates: the
// first l+1 entries hold the sphere factor (absent when l = 0) and the last m
// entries the flat ball factor. At most one factor has boundary: either the
// ball (m >= 1) or a spherical cap of aperture alpha around the sphere pole.
// A frame is an ambient x n matrix whose columns are orthonormal tangent vectors.

#include <map>
#include <string>
#include <vector>

#include "gbmc/exterior.hpp"
#include "gbmc/rng.hpp"

namespace gbmc::geometry {

using exterior::CurvatureTensor;
using exterior::Matrix;
using exterior::Vector;

using ModelParameters = std::map<std::string, double>;

// Preimage z of a point a under the boundary mirror, together with the factor
// converting a volume density at z into the density of the reflected point at a.
struct MirrorImage {
  Vector point;
  double jacobian = 1.0;
};

struct Reflection {
  Vector point;
  Matrix frame;
  double delta_lambda = 0.0;  // mirror push 2·depth; stochastic steps resample it from the conditional law
  bool contact = false;
  bool valid = true;
};

struct ChartBounds {
  Vector lower;
  Vector upper;
};

class ManifoldModel {
 public:
  ManifoldModel(std::string name, int sphere_dim, double sphere_radius, int ball_dim, double ball_radius,
                double aperture, int euler_characteristic);

  const std::string& name() const { return name_; }
  int dimension() const { return l_ + m_; }
  int ambient_dimension() const { return (l_ > 0 ? l_ + 1 : 0) + m_; }
  int sphere_dimension() const { return l_; }
  int ball_dimension() const { return m_; }
  double sphere_radius() const { return rho_; }
  double ball_radius() const { return r_; }
  double aperture() const { return alpha_; }
  int euler_characteristic() const { return chi_; }
  bool has_boundary() const { return ball_boundary() || cap_boundary(); }
  // True when the curvature tensor is parallel, so its components are constant
  // in a parallel frame. Holds for every product of round spheres and flat balls.
  bool parallel_curvature() const { return true; }

  double volume() const;
  double boundary_volume() const;

  // Single global chart: hyperspherical angles on the sphere factor (polar
  // angle measured from the pole first), Cartesian coordinates on the ball.
  Vector chart(const Vector& x) const;
  Vector chart_inverse(const Vector& q) const;
  Matrix chart_jacobian(const Vector& q) const;
  Matrix metric(const Vector& q) const;
  // Gamma[k](i, j) = Gamma^k_{ij}.
  std::vector<Matrix> christoffel(const Vector& q) const;
  // Distance from q to the coordinate singularities of the chart.
  double chart_singularity_distance(const Vector& q) const;
  static constexpr double kChartExclusion = 1e-6;

  bool contains(const Vector& x, double tol = 1e-12) const;
  Matrix tangent_projector(const Vector& x) const;
  Matrix tangent_frame(const Vector& x) const;
  // Orthonormal frame of T_x whose first n-1 columns span the tangent space of
  // the level set of boundary_distance and whose last column is the inward normal.
  Matrix adapted_frame(const Vector& x) const;

  Vector exp(const Vector& x, const Vector& v) const;
  Vector log(const Vector& x, const Vector& y) const;
  double distance(const Vector& x, const Vector& y) const;
  // Density of exp_x(v) w.r.t. the volume measure is G(v) / exp_jacobian(x, v)
  // for a density G on T_x.
  double exp_jacobian(const Vector& x, const Vector& v) const;
  // Parallel transport of the columns of `frame` along t -> exp_x(t v), t in [0, 1].
  Matrix transport(const Vector& x, const Vector& v, const Matrix& frame) const;

  // Components R(f_i, f_j, f_k, f_l) in the columns of `frame`.
  CurvatureTensor curvature(const Vector& x, const Matrix& frame) const;
  CurvatureTensor curvature(const Vector& x) const { return curvature(x, tangent_frame(x)); }

  // Signed distance to Z, positive inside; +infinity for closed models.
  double boundary_distance(const Vector& x) const;
  Vector inward_normal(const Vector& x) const;
  // Ambient shape operator A = -∇ν of Z, extended to the collar by parallel
  // translation along normal geodesics and by Aν = 0.
  Matrix shape_operator(const Vector& x) const;
  Matrix shape_operator(const Vector& x, const Matrix& frame) const;
  // Principal curvature of Z (all principal curvatures along the bounding factor agree).
  double boundary_principal_curvature() const;
  // Intrinsic curvature of Z at the foot point of x in the columns of a
  // tangential frame (ambient x (n-1), orthogonal to ν).
  CurvatureTensor boundary_curvature(const Vector& x, const Matrix& tangential_frame) const;

  std::vector<MirrorImage> mirror_images(const Vector& a) const;
  // Mirror reflection of a point that left the manifold; the frame is parallel
  // transported along the normal geodesic from z back to the reflected point.
  Reflection reflect(const Vector& z, const Matrix& frame) const;

  Vector sample_uniform(RngStream& rng) const;
  // Uniform on {d(x, Z) >= depth}, for depth below max_collar_width().
  Vector sample_interior(RngStream& rng, double depth) const;
  Vector sample_boundary(RngStream& rng) const;
  // Point at distance y from the boundary point z along the inward normal geodesic.
  Vector collar_point(const Vector& z, double y) const;
  // Volume density factor: dX = collar_density(y) dy dZ in the collar.
  double collar_density(double y) const;
  double max_collar_width() const;

 private:
  bool ball_boundary() const { return m_ > 0; }
  bool cap_boundary() const { return m_ == 0 && l_ > 0 && alpha_ < kFullSphere; }
  int sphere_size() const { return l_ > 0 ? l_ + 1 : 0; }
  double polar_angle(const Vector& x) const;

  static constexpr double kFullSphere = 3.14159265358979323846;

  std::string name_;
  int l_;
  double rho_;
  int m_;
  double r_;
  double alpha_;
  int chi_;
};

// Builds a catalog model. Names: "ball" (dimension, radius), "hemisphere"
// (dimension, radius), "cap" (dimension, radius, aperture), "sphere"
// (dimension, radius), "product" (sphere_dimension, sphere_radius,
// ball_dimension, ball_radius), "cylinder" (length, radius).
ManifoldModel model_catalog(const std::string& name, const ModelParameters& params = {});
std::vector<std::string> catalog_names();

struct BoundaryGeometry {
  Matrix tangential_frame;  // ambient x (n-1)
  Matrix induced_metric;    // (n-1) x (n-1)
  CurvatureTensor ambient_curvature;  // R restricted to the tangential frame
  CurvatureTensor intrinsic_curvature;  // R_Z
  CurvatureTensor gauss_form;  // 𝒜 built from the shape operator
  Matrix shape_operator;  // A in the tangential frame
};

BoundaryGeometry boundary_geometry(const ManifoldModel& model, const Vector& z, const Matrix& tangential_frame);

// Max over sampled boundary points and random tangential frames of |R + 𝒜 - R_Z|.
// Returns 0 for n = 2 where R_Z is trivial.
double gauss_equation_check(const ManifoldModel& model, RngStream& rng, int points = 32);

}  // namespace gbmc::geometry
