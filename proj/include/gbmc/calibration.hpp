#pragma once

// Universal constants of the local Gauss-Bonnet integrands, fitted by least
// squares so that the integrated formula returns χ on a family of models.
// Every left-hand side is a closed-form integral over homogeneous models, so
// the fit is deterministic.

#include <string>
#include <vector>

#include "gbmc/integrands.hpp"

namespace gbmc {

// Names of the unknowns for dimension n: "b_4", "b_{4,0,3}", ..., or "d_3".
std::vector<std::string> calibration_unknowns(int n);

// One design row: the integrals multiplying each unknown on `model`.
std::vector<double> calibration_row(const geometry::ManifoldModel& model);

// Default family for n: S^l x D^{n-l} products, balls, hemispheres and spheres.
std::vector<geometry::ManifoldModel> calibration_family(int n);

// Fits the constants of dimension n into `table` and appends a CalibrationRun.
// Throws ValidationError naming the first undetermined unknown when the design
// is rank deficient. For odd n the ratio e_n = d_n / b_{n-1} is filled when
// b_{n-1} is already present.
void calibrate_dimension(int n, const std::vector<geometry::ManifoldModel>& models, ConstantTable& table);

// Calibrates every requested dimension with its default family, in increasing
// order, and fills the Pfaffian normalisations c_n for even n.
ConstantTable calibrate_constants(const std::vector<int>& dimensions = {2, 3, 4});

// c_n = Str DR^{n/2} / (δ-contraction of R^{n/2}), evaluated on the unit sphere.
double pfaffian_constant(int n);

}  // namespace gbmc
