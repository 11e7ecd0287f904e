#pragma once

// Neumann heat kernels of ½Δ on the catalog models.
//
// Exact representations: image sums on the interval and the circle, zonal
// Gegenbauer series on round spheres, the method of images on hemispheres,
// Bessel eigenfunction series on the disk and the 3-ball, and products of
// these. Other models fall back to a Gaussian parametrix with a mirror image
// term, flagged as approximate.

#include <map>
#include <memory>
#include <vector>

#include "gbmc/geometry.hpp"

namespace gbmc::heat {

using geometry::ManifoldModel;
using exterior::Vector;

struct KernelValue {
  double value = 0.0;
  bool exact = false;
  int terms = 0;
};

// Largest number of series terms a single evaluation may use.
inline constexpr int kMaxTerms = 2'000'000;

// Zeros of d/dx of J_m (cylindrical, dimension 2) or j_m (spherical,
// dimension 3), in increasing order up to `limit`. The zero at x = 0 for m = 0
// is not included.
std::vector<double> neumann_zeros(int dimension, int m, double limit);

// Reusable kernel: caches Bessel zeros between evaluations.
class NeumannHeatKernel {
 public:
  explicit NeumannHeatKernel(const ManifoldModel& model);

  KernelValue operator()(double t, const Vector& x, const Vector& y) const;
  bool exact() const { return exact_; }

 private:
  double ball_factor(double t, const Vector& x, const Vector& y, int& terms) const;
  double sphere_factor(double t, const Vector& x, const Vector& y, int& terms) const;
  const std::vector<double>& zeros(int m, double limit) const;

  ManifoldModel model_;
  bool exact_;
  mutable std::map<int, std::vector<double>> zero_cache_;
  mutable std::map<int, double> zero_limit_;
};

KernelValue neumann_heat_kernel(const ManifoldModel& model, double t, const Vector& x, const Vector& y);

// Building blocks, exposed for testing.
double interval_kernel(double t, double half_length, double x, double y, int* terms = nullptr);
double circle_kernel(double t, double radius, double angle, int* terms = nullptr);
double sphere_kernel(int l, double radius, double t, double angle, int* terms = nullptr);
double gaussian_parametrix(const ManifoldModel& model, double t, const Vector& x, const Vector& y);

}  // namespace gbmc::heat
