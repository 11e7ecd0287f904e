#include "gbmc/calibration.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "gbmc/errors.hpp"

namespace gbmc {

using exterior::Matrix;
using exterior::Vector;
using geometry::ManifoldModel;
using geometry::model_catalog;

namespace {

std::string boundary_name(int n, int k, int l) {
  return "b_{" + std::to_string(n) + "," + std::to_string(k) + "," + std::to_string(l) + "}";
}

std::string suggestion(int n, int column) {
  if (n % 2 == 1) return "add a ball D^" + std::to_string(n);
  if (column == 0) return "add the sphere S^" + std::to_string(n);
  // Column 1 + k carries Str DR^k DA^{n-1-2k}, which S^{2k} x D^{n-2k} isolates.
  const int k = column - 1;
  if (k == 0) return "add the ball D^" + std::to_string(n);
  return "add the product S^" + std::to_string(2 * k) + " x D^" + std::to_string(n - 2 * k);
}

}  // namespace

std::vector<std::string> calibration_unknowns(int n) {
  if (n < 2) throw ValidationError("calibration needs dimension >= 2");
  if (n % 2 == 1) return {"d_" + std::to_string(n)};
  std::vector<std::string> out = {"b_" + std::to_string(n)};
  for (int k = 0; 2 * k <= n - 1; ++k) out.push_back(boundary_name(n, k, n - 1 - 2 * k));
  return out;
}

std::vector<double> calibration_row(const ManifoldModel& model) {
  const int n = model.dimension();
  if (n % 2 == 1) {
    if (!model.has_boundary()) return {0.0};
    const Vector z = geometry::reference_boundary_point(model);
    return {geometry::odd_boundary_supertrace(model, z) * model.boundary_volume()};
  }
  std::vector<double> row;
  row.push_back(geometry::bulk_supertrace(model, geometry::reference_interior_point(model)) * model.volume());
  std::map<std::pair<int, int>, double> b;
  if (model.has_boundary()) b = geometry::boundary_supertraces(model, geometry::reference_boundary_point(model));
  for (int k = 0; 2 * k <= n - 1; ++k) {
    const auto it = b.find({k, n - 1 - 2 * k});
    row.push_back(it == b.end() ? 0.0 : it->second * model.boundary_volume());
  }
  return row;
}

std::vector<ManifoldModel> calibration_family(int n) {
  std::vector<ManifoldModel> out;
  const double dim = n;
  out.push_back(model_catalog("ball", {{"dimension", dim}}));
  out.push_back(model_catalog("hemisphere", {{"dimension", dim}}));
  for (int l = 1; l < n; ++l)
    out.push_back(model_catalog("product", {{"sphere_dimension", double(l)}, {"ball_dimension", double(n - l)}}));
  out.push_back(model_catalog("sphere", {{"dimension", dim}}));
  return out;
}

void calibrate_dimension(int n, const std::vector<ManifoldModel>& models, ConstantTable& table) {
  const std::vector<std::string> unknowns = calibration_unknowns(n);
  const int cols = static_cast<int>(unknowns.size());
  const int rows = static_cast<int>(models.size());
  if (rows == 0) throw ValidationError("calibration family for n = " + std::to_string(n) + " is empty");
  Matrix a(rows, cols);
  Vector chi(rows);
  CalibrationRun run;
  run.dimension = n;
  run.unknowns = unknowns;
  for (int i = 0; i < rows; ++i) {
    if (models[i].dimension() != n)
      throw ValidationError("calibration model " + models[i].name() + " has dimension " +
                            std::to_string(models[i].dimension()) + ", expected " + std::to_string(n));
    const auto row = calibration_row(models[i]);
    for (int j = 0; j < cols; ++j) a(i, j) = row[j];
    chi[i] = models[i].euler_characteristic();
    run.models.push_back(models[i].name() + "(l=" + std::to_string(models[i].sphere_dimension()) +
                         ",m=" + std::to_string(models[i].ball_dimension()) + ")");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(1e-10);
  run.rank = static_cast<int>(qr.rank());
  if (run.rank < cols) {
    // The unknown carrying the largest share of the null space is undetermined.
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const Vector null = svd.matrixV().col(cols - 1);
    Eigen::Index worst = 0;
    null.cwiseAbs().maxCoeff(&worst);
    throw ValidationError("calibration for n = " + std::to_string(n) + " is rank deficient (rank " +
                          std::to_string(run.rank) + " of " + std::to_string(cols) + "): " +
                          unknowns[worst] + " is undetermined; " + suggestion(n, static_cast<int>(worst)));
  }
  const Vector c = qr.solve(chi);
  const Vector r = a * c - chi;
  run.residuals.assign(r.data(), r.data() + r.size());
  run.max_residual = r.cwiseAbs().maxCoeff();
  if (n % 2 == 1) {
    table.odd[n] = c[0];
    if (table.bulk.count(n - 1)) table.ratio[n] = c[0] / table.bulk.at(n - 1);
  } else {
    table.bulk[n] = c[0];
    for (int k = 0; 2 * k <= n - 1; ++k) table.boundary[{n, k, n - 1 - 2 * k}] = c[1 + k];
  }
  table.runs.push_back(std::move(run));
}

double pfaffian_constant(int n) {
  if (n % 2 != 0 || n < 2 || n > 6) throw ValidationError("pfaffian_constant needs n in {2, 4, 6}");
  const auto r = exterior::CurvatureTensor::constant_curvature(n, 1.0);
  return exterior::pfaffian_supertrace(r) / exterior::kronecker_contraction(r);
}

ConstantTable calibrate_constants(const std::vector<int>& dimensions) {
  std::vector<int> dims = dimensions;
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  ConstantTable table;
  for (int n : dims) {
    calibrate_dimension(n, calibration_family(n), table);
    if (n % 2 == 0 && n <= 6) table.pfaffian[n] = pfaffian_constant(n);
  }
  return table;
}

}  // namespace gbmc
