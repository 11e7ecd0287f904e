#pragma once

// Pointwise Gauss-Bonnet integrands and the table of universal constants that
// weights them.
//
// Boundary supertraces are taken over the exterior algebra of the tangent space
// of Z, Λ(ν^⊥) ≅ Λℝ^{n-1}, where the functional lives after the normal part of a
// form has been projected out at a boundary contact.

#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "gbmc/geometry.hpp"

namespace gbmc {

struct CalibrationRun {
  int dimension = 0;
  std::vector<std::string> models;
  std::vector<std::string> unknowns;
  int rank = 0;
  double max_residual = 0.0;
  std::vector<double> residuals;
};

struct ConstantTable {
  std::map<int, double> bulk;  // b_n, n even
  std::map<std::tuple<int, int, int>, double> boundary;  // b_{n,k,l}, 2k + l = n - 1
  std::map<int, double> odd;  // d_n, n odd
  std::map<int, double> ratio;  // e_n = d_n / b_{n-1}
  std::map<int, double> pfaffian;  // c_n
  std::vector<CalibrationRun> runs;

  // Throws ValidationError naming the first missing constant for dimension n.
  void require(int n) const;
};

namespace geometry {

// Str DR^{n/2} at x for n even, 0 for n odd.
double bulk_supertrace(const ManifoldModel& model, const Vector& x);
// Str_T DR_T^k DA_T^l over Λ(ν^⊥) for every 2k + l = n - 1, n even. Empty for n odd.
std::map<std::pair<int, int>, double> boundary_supertraces(const ManifoldModel& model, const Vector& z);
// Str_T D(R_T + 𝒜)^{(n-1)/2} for n odd, which equals Str DR_Z^{(n-1)/2} by the Gauss equation.
double odd_boundary_supertrace(const ManifoldModel& model, const Vector& z);

struct GaussBonnetIntegrands {
  std::function<double(const Vector&)> bulk;      // density w.r.t. dX
  std::function<double(const Vector&)> boundary;  // density w.r.t. dZ
};

GaussBonnetIntegrands analytic_gb_integrands(const ManifoldModel& model, const ConstantTable& constants);

// Integrals of the calibrated integrands over X and Z; every catalog model is
// homogeneous along X and along Z, so a single evaluation point suffices.
struct GaussBonnetTotals {
  double bulk = 0.0;
  double boundary = 0.0;
  double total() const { return bulk + boundary; }
};
GaussBonnetTotals integrate_gb(const ManifoldModel& model, const ConstantTable& constants);

// Representative interior and boundary points used for the homogeneous integrals.
Vector reference_interior_point(const ManifoldModel& model);
Vector reference_boundary_point(const ManifoldModel& model);

}  // namespace geometry
}  // namespace gbmc
