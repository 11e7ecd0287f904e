#include "gbmc/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "gbmc/errors.hpp"
#include "gbmc/heat_kernel.hpp"

namespace gbmc {

using geometry::ManifoldModel;

namespace {

struct Moments {
  double sum = 0.0;
  double sum2 = 0.0;
  long count = 0;

  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++count;
  }
  double mean() const { return count ? sum / count : 0.0; }
  double standard_error() const {
    if (count < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum2 / count - m * m)) / (count - 1));
  }
};

int worker_count(int requested, long tasks) {
  int w = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  w = std::max(1, w);
  return static_cast<int>(std::min<long>(w, std::max<long>(1, tasks)));
}

// Runs body(i) for i in [0, count) on a pool of workers. Each index writes its
// own result slot, so the reduction order is fixed by the caller.
template <class Body>
void parallel_for(long count, int workers, Body body) {
  const int w = worker_count(workers, count);
  if (w == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int k = 0; k < w; ++k) {
    pool.emplace_back([&] {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double geometric_length(const ManifoldModel& model) {
  double len = std::numeric_limits<double>::infinity();
  if (model.sphere_dimension() > 0) len = std::min(len, model.sphere_radius());
  if (model.ball_dimension() > 0) len = std::min(len, model.ball_radius());
  if (model.has_boundary() && model.ball_dimension() == 0)
    len = std::min(len, model.sphere_radius() * model.aperture());
  return len;
}

// |{d(x, Z) < w}| = |Z| ∫_0^w ζ(y) dy by composite Simpson.
double collar_volume(const ManifoldModel& model, double w) {
  if (w <= 0.0) return 0.0;
  const int n = 256;
  double sum = model.collar_density(0.0) + model.collar_density(w);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * model.collar_density(w * i / n);
  return model.boundary_volume() * sum * w / (3.0 * n);
}

const char* mode_name(const stochastic::FunctionalMode& mode) {
  return mode.kind == stochastic::FunctionalMode::Kind::Epsilon ? "epsilon" : "exact-jump";
}

// Mean over loops at x of the quantity whose x-integral is χ.
struct PointValue {
  double value = 0.0;
  double degree0 = 0.0;
  long invalid = 0;
};

PointValue point_value(const ManifoldModel& model, const heat::NeumannHeatKernel* kernel, const Vector& x, double t,
                       int bridges, RngStream& rng, const EstimatorOptions& options) {
  const PointEstimate e = supertrace_expectation(model, x, t, bridges, rng, options);
  PointValue out;
  out.invalid = e.invalid;
  out.degree0 = e.degree0;
  out.value = options.kernel == KernelMode::Analytic ? (*kernel)(t, x, x).value * e.supertrace : e.weighted;
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

void check_invalid_rate(long invalid, long accepted, double limit, const std::string& where) {
  const long total = invalid + accepted;
  if (total > 0 && static_cast<double>(invalid) / total > limit)
    throw NumericalError(where + ": resample rate " + std::to_string(double(invalid) / total) + " exceeds " +
                         std::to_string(limit) + " (" + std::to_string(invalid) + " of " + std::to_string(total) +
                         " loops rejected); increase steps or decrease t");
}

}  // namespace

LoopSample sample_loop(const ManifoldModel& model, const Vector& x, double t, RngStream& rng,
                       const EstimatorOptions& options) {
  LoopSample out;
  const stochastic::PathSample p = stochastic::simulate_bridge(model, x, t, options.steps, rng);
  if (!p.valid || !std::isfinite(p.log_weight)) return out;
  exterior::GradedOperator v(model.dimension());
  try {
    v = stochastic::evolve_transport(model, p).inverse;
  } catch (const NumericalError&) {
    return out;
  }
  const exterior::GradedOperator mv = stochastic::evolve_functional(model, p, options.mode) * v;
  out.log_weight = p.log_weight;
  out.supertrace = exterior::supertrace(mv);
  out.degree0 = mv.matrix()(0, 0);
  out.valid = true;
  return out;
}

PointEstimate supertrace_expectation(const ManifoldModel& model, const Vector& x, double t, int bridges,
                                     RngStream& rng, const EstimatorOptions& options) {
  if (!(t > 0.0)) throw ValidationError("t must be positive");
  if (bridges < 1) throw ValidationError("bridges must be >= 1");
  if (!model.contains(x, 1e-9)) throw ValidationError("base point is not on the model");
  PointEstimate e;
  Moments w, ws;
  double cross = 0.0, wd = 0.0;
  // Invalid loops are redrawn; give up once the rate is clearly out of bounds.
  const long max_attempts = std::max<long>(50, static_cast<long>(bridges / options.max_invalid_rate) + 10);
  while (e.accepted < bridges) {
    if (e.accepted + e.invalid >= max_attempts) break;
    const LoopSample s = sample_loop(model, x, t, rng, options);
    if (!s.valid) {
      ++e.invalid;
      continue;
    }
    ++e.accepted;
    const double weight = std::exp(s.log_weight);
    w.add(weight);
    ws.add(weight * s.supertrace);
    cross += weight * weight * s.supertrace;
    wd += weight * s.degree0;
  }
  if (e.accepted == 0) throw NumericalError("no valid loop at the base point after " + std::to_string(e.invalid) + " attempts");
  if (e.accepted < bridges) check_invalid_rate(e.invalid, e.accepted, options.max_invalid_rate, "supertrace_expectation");
  e.kernel = w.mean();
  e.kernel_stderr = w.standard_error();
  e.weighted = ws.mean();
  e.weighted_stderr = ws.standard_error();
  e.supertrace = e.weighted / e.kernel;
  e.degree0 = wd / w.sum;
  if (e.accepted > 1) {
    // Delta method for the ratio of means.
    const double n = static_cast<double>(e.accepted);
    const double r = e.supertrace;
    const double var = (ws.sum2 - 2.0 * r * cross + r * r * w.sum2) / (n * (n - 1.0)) / (e.kernel * e.kernel);
    e.supertrace_stderr = std::sqrt(std::max(0.0, var));
  }
  return e;
}

TimeWindow validity_window(const ManifoldModel& model) {
  const double len = geometric_length(model);
  return {len * len * 1e-4, len * len / 9.0};
}

bool EstimateReport::covers_reference(double floor) const {
  return std::abs(estimate - reference) <= std::max(1.96 * standard_error, floor);
}

EstimateReport estimate_chi(const ManifoldModel& model, double t, long base_points, int bridges, std::uint64_t seed,
                            const EstimatorOptions& options) {
  if (!(t > 0.0)) throw ValidationError("t must be positive");
  if (base_points < 2) throw ValidationError("base_points must be >= 2");
  if (bridges < 1) throw ValidationError("bridges must be >= 1");
  if (options.steps < 1) throw ValidationError("steps must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  EstimateReport r;
  r.model = model.name();
  r.dimension = model.dimension();
  r.t = t;
  r.steps = options.steps;
  r.base_points = base_points;
  r.bridges_per_point = bridges;
  r.reference = model.euler_characteristic();
  r.window = validity_window(model);
  r.in_window = r.window.contains(t);
  r.kernel = options.kernel == KernelMode::Analytic ? "analytic" : "weighted";
  r.functional = mode_name(options.mode);
  r.seed = seed;

  const bool stratified = options.stratified && model.has_boundary();
  const double width = stratified ? std::min(options.collar_factor * std::sqrt(t), model.max_collar_width()) : 0.0;
  r.collar_width = width;
  std::unique_ptr<heat::NeumannHeatKernel> kernel;
  if (options.kernel == KernelMode::Analytic) kernel = std::make_unique<heat::NeumannHeatKernel>(model);

  struct Slot {
    double value = 0.0;
    double degree0 = 0.0;
    long invalid = 0;
    bool collar = false;
  };
  std::vector<Slot> slots(base_points);
  const RngStream root(seed, 0);
  const double boundary_volume = model.has_boundary() ? model.boundary_volume() : 0.0;
  // Interior stratum: uniform on {d >= w} by rejection, weighted by its volume.
  const double volume = model.volume() - collar_volume(model, width);
  const bool interior = width < model.max_collar_width() && volume > 1e-9 * model.volume();
  // The Bessel zero cache of the analytic kernel is not thread-safe.
  const int workers = kernel ? 1 : options.workers;
  parallel_for(base_points, workers, [&](long i) {
    RngStream rng = root.substream(static_cast<std::uint64_t>(i));
    Slot& s = slots[i];
    if (stratified && (i % 2 == 1 || !interior)) {
      s.collar = true;
      const Vector z = model.sample_boundary(rng);
      const double y = width * rng.uniform();
      const Vector x = model.collar_point(z, y);
      const PointValue v = point_value(model, kernel.get(), x, t, bridges, rng, options);
      s.value = boundary_volume * width * model.collar_density(y) * v.value;
      s.degree0 = v.degree0;
      s.invalid = v.invalid;
      return;
    }
    const Vector x = model.sample_interior(rng, width);
    const PointValue v = point_value(model, kernel.get(), x, t, bridges, rng, options);
    s.value = volume * v.value;
    s.degree0 = v.degree0;
    s.invalid = v.invalid;
  });

  Moments uniform, collar;
  double degree0 = 0.0;
  for (const Slot& s : slots) {
    (s.collar ? collar : uniform).add(s.value);
    degree0 += s.degree0;
    r.invalid += s.invalid;
  }
  r.degree0_mean = degree0 / base_points;
  const long loops = base_points * static_cast<long>(bridges);
  r.invalid_rate = static_cast<double>(r.invalid) / (loops + r.invalid);
  check_invalid_rate(r.invalid, loops, options.max_invalid_rate, "estimate_chi");
  if (!stratified || interior)
    r.strata.push_back({stratified ? "interior" : "uniform", uniform.count, uniform.mean(), uniform.standard_error()});
  if (stratified) r.strata.push_back({"collar", collar.count, collar.mean(), collar.standard_error()});
  r.estimate = uniform.mean() + collar.mean();
  r.standard_error = std::hypot(uniform.standard_error(), collar.standard_error());
  r.interval_low = r.estimate - 1.96 * r.standard_error;
  r.interval_high = r.estimate + 1.96 * r.standard_error;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

LimitTable local_limit_check(const ManifoldModel& model, const Vector& x, const std::vector<double>& ts, int samples,
                             std::uint64_t seed, const ConstantTable& constants, const EstimatorOptions& options) {
  if (ts.empty()) throw ValidationError("local_limit_check needs at least one t");
  if (samples < 2) throw ValidationError("local_limit_check needs samples >= 2");
  if (!model.contains(x, 1e-9)) throw ValidationError("point is not on the model");
  const geometry::GaussBonnetIntegrands g = geometry::analytic_gb_integrands(model, constants);
  LimitTable table;
  table.model = model.name();
  table.point = x;
  const bool boundary = model.has_boundary() && std::abs(model.boundary_distance(x)) < 1e-9;
  table.kind = boundary ? "boundary" : "interior";
  const double analytic = boundary ? g.boundary(x) : g.bulk(x);

  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double t = ts[k];
    if (!(t > 0.0)) throw ValidationError("t must be positive");
    const RngStream root(seed, k + 1);
    std::vector<double> values(samples);
    std::vector<long> invalid(samples, 0);
    const double width = boundary ? std::min(options.collar_factor * std::sqrt(t), model.max_collar_width()) : 0.0;
    parallel_for(samples, options.workers, [&](long i) {
      RngStream rng = root.substream(static_cast<std::uint64_t>(i));
      if (!boundary) {
        const PointEstimate e = supertrace_expectation(model, x, t, 1, rng, options);
        values[i] = e.weighted;
        invalid[i] = e.invalid;
        return;
      }
      const double y = width * rng.uniform();
      const Vector p = model.collar_point(x, y);
      const PointEstimate e = supertrace_expectation(model, p, t, 1, rng, options);
      values[i] = width * model.collar_density(y) * (e.weighted - g.bulk(p));
      invalid[i] = e.invalid;
    });
    Moments m;
    long bad = 0;
    for (int i = 0; i < samples; ++i) {
      m.add(values[i]);
      bad += invalid[i];
    }
    check_invalid_rate(bad, samples, options.max_invalid_rate, "local_limit_check");
    LimitRow row;
    row.t = t;
    row.value = m.mean();
    row.standard_error = m.standard_error();
    row.analytic = analytic;
    row.ratio = analytic != 0.0 ? row.value / analytic : std::numeric_limits<double>::quiet_NaN();
    table.rows.push_back(row);
  }
  std::vector<double> tv, dev;
  for (const auto& row : table.rows) {
    tv.push_back(row.t);
    dev.push_back(std::abs(row.value - row.analytic));
  }
  table.observed_order = loglog_slope(tv, dev);
  return table;
}

std::string mckean_singer_note() {
  return "chi(X) = Str exp(-t Box/2) for every t > 0, where Box is the Hodge Laplacian on forms with absolute "
         "boundary conditions (McKean-Singer). Nonzero eigenvalues pair up between even and odd forms through "
         "d + d*, so only harmonic forms survive and chi(X) = dim H+ - dim H-. This library evaluates the same "
         "supertrace as a path integral over reflected Brownian loops; the spectral decomposition is not computed.";
}

}  // namespace gbmc
