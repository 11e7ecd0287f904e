#include "gbmc/integrands.hpp"

#include <cmath>

#include "gbmc/errors.hpp"

namespace gbmc {

void ConstantTable::require(int n) const {
  if (n % 2 == 0) {
    if (!bulk.count(n)) throw ValidationError("missing constant b_" + std::to_string(n));
    for (int k = 0; 2 * k <= n - 1; ++k) {
      const int l = n - 1 - 2 * k;
      if (!boundary.count({n, k, l}))
        throw ValidationError("missing constant b_{" + std::to_string(n) + "," + std::to_string(k) + "," +
                              std::to_string(l) + "}");
    }
  } else if (!odd.count(n)) {
    throw ValidationError("missing constant d_" + std::to_string(n));
  }
}

namespace geometry {

namespace {

exterior::GradedOperator power(const exterior::GradedOperator& op, int k) {
  exterior::GradedOperator out = exterior::GradedOperator::identity(op.dimension());
  for (int i = 0; i < k; ++i) out = out * op;
  return out;
}

struct TangentialData {
  CurvatureTensor r;
  Matrix a;
};

TangentialData tangential_data(const ManifoldModel& model, const Vector& z) {
  const int n = model.dimension();
  const Matrix frame = model.adapted_frame(z).leftCols(n - 1);
  return {model.curvature(z, frame), model.shape_operator(z, frame)};
}

Vector chart_point(const ManifoldModel& model, double polar, double ball_fraction) {
  Vector q(model.dimension());
  const int l = model.sphere_dimension();
  for (int i = 0; i < l; ++i) q[i] = 1.1 + 0.3 * i;
  if (l > 0) q[0] = polar;
  const int m = model.ball_dimension();
  for (int i = 0; i < m; ++i) q[l + i] = ball_fraction * model.ball_radius() / std::sqrt(double(m));
  return model.chart_inverse(q);
}

}  // namespace

double bulk_supertrace(const ManifoldModel& model, const Vector& x) {
  const int n = model.dimension();
  if (n % 2 != 0) return 0.0;
  return exterior::supertrace(power(exterior::curvature_to_operator(model.curvature(x)), n / 2));
}

std::map<std::pair<int, int>, double> boundary_supertraces(const ManifoldModel& model, const Vector& z) {
  std::map<std::pair<int, int>, double> out;
  const int n = model.dimension();
  if (n % 2 != 0 || !model.has_boundary()) return out;
  const TangentialData t = tangential_data(model, z);
  const auto dr = exterior::curvature_to_operator(t.r);
  const auto da = exterior::derivation_extend(t.a);
  for (int k = 0; 2 * k <= n - 1; ++k) {
    const int l = n - 1 - 2 * k;
    out[{k, l}] = exterior::supertrace(power(dr, k) * power(da, l));
  }
  return out;
}

double odd_boundary_supertrace(const ManifoldModel& model, const Vector& z) {
  const int n = model.dimension();
  if (n % 2 == 0 || !model.has_boundary()) return 0.0;
  const TangentialData t = tangential_data(model, z);
  const CurvatureTensor rz = t.r + CurvatureTensor::gauss_form(t.a);
  return exterior::supertrace(power(exterior::curvature_to_operator(rz), (n - 1) / 2));
}

GaussBonnetIntegrands analytic_gb_integrands(const ManifoldModel& model, const ConstantTable& constants) {
  const int n = model.dimension();
  constants.require(n);
  GaussBonnetIntegrands g;
  if (n % 2 == 0) {
    const double bn = constants.bulk.at(n);
    g.bulk = [&model, bn](const Vector& x) { return bn * bulk_supertrace(model, x); };
    std::map<std::pair<int, int>, double> weights;
    for (int k = 0; 2 * k <= n - 1; ++k) weights[{k, n - 1 - 2 * k}] = constants.boundary.at({n, k, n - 1 - 2 * k});
    g.boundary = [&model, weights](const Vector& z) {
      if (!model.has_boundary()) return 0.0;
      double total = 0.0;
      for (const auto& [kl, value] : boundary_supertraces(model, z)) total += weights.at(kl) * value;
      return total;
    };
  } else {
    const double dn = constants.odd.at(n);
    g.bulk = [](const Vector&) { return 0.0; };
    g.boundary = [&model, dn](const Vector& z) { return dn * odd_boundary_supertrace(model, z); };
  }
  return g;
}

Vector reference_interior_point(const ManifoldModel& model) {
  const double polar = model.has_boundary() && model.ball_dimension() == 0 ? 0.5 * model.aperture() : 1.0;
  return chart_point(model, polar, 0.3);
}

Vector reference_boundary_point(const ManifoldModel& model) {
  if (!model.has_boundary()) throw ValidationError("model " + model.name() + " has no boundary");
  if (model.ball_dimension() > 0) {
    Vector x = chart_point(model, 1.0, 0.3);
    const int m = model.ball_dimension();
    x.tail(m) *= model.ball_radius() / x.tail(m).norm();
    return x;
  }
  return chart_point(model, model.aperture(), 0.0);
}

GaussBonnetTotals integrate_gb(const ManifoldModel& model, const ConstantTable& constants) {
  const GaussBonnetIntegrands g = analytic_gb_integrands(model, constants);
  GaussBonnetTotals totals;
  totals.bulk = g.bulk(reference_interior_point(model)) * model.volume();
  if (model.has_boundary()) totals.boundary = g.boundary(reference_boundary_point(model)) * model.boundary_volume();
  return totals;
}

}  // namespace geometry
}  // namespace gbmc
