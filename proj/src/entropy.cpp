#include <liestab/entropy.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace liestab {

CompactSet::CompactSet(Vector c, Vector hw, int resolution)
    : center(std::move(c)), half_widths(std::move(hw)), grid_resolution(resolution)
{
  if (center.size() != half_widths.size())
    throw InputError("box center and half widths differ in dimension");
  if (center.size() == 0) throw InputError("box must have positive dimension");
  if (!center.allFinite() || !half_widths.allFinite())
    throw InputError("box parameters must be finite");
  if ((half_widths.array() <= 0.0).any())
    throw InputError("box half widths must be positive");
  if (grid_resolution < 2) throw InputError("grid resolution must be at least 2");
}

std::vector<Vector> CompactSet::grid_points() const
{
  const auto n = static_cast<int>(center.size());
  const int res = grid_resolution;
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(res);

  std::vector<Vector> pts;
  pts.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (std::size_t c = 0; c < total; ++c) {
    Vector p(n);
    for (int a = 0; a < n; ++a) {
      const double frac = static_cast<double>(idx[static_cast<std::size_t>(a)]) /
                          static_cast<double>(res - 1);
      p(a) = center(a) - half_widths(a) + 2.0 * half_widths(a) * frac;
    }
    pts.push_back(std::move(p));
    for (int a = 0; a < n; ++a) {
      if (++idx[static_cast<std::size_t>(a)] < res) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
  return pts;
}

Vector flow_map(const PropagatorTrace& trace, const Vector& x, double t)
{
  if (!trace.has_factored()) throw InputError("flow_map needs a factored trace");
  const std::size_t k = trace.index_of(t);
  return std::exp(trace.scale_log_h[k]) * (trace.phi_h[k] * x);
}

namespace {

// Strided subset of the trace grid used to approximate the sup over [0, T];
// sample 0 and every requested horizon are always present.
struct FlowSampling {
  std::vector<double> times;
  std::vector<Matrix> mats;  // scale-corrected Phi_h
};

FlowSampling make_sampling(const PropagatorTrace& trace, double max_t,
                           const std::vector<double>& forced_times, int max_samples)
{
  if (!trace.has_factored()) throw InputError("entropy operations need a factored trace");

  const std::size_t end = trace.index_of(max_t);
  std::vector<std::size_t> indices;
  const std::size_t stride =
      std::max<std::size_t>(1, (end + 1) / static_cast<std::size_t>(std::max(2, max_samples)));
  for (std::size_t k = 0; k <= end; k += stride) indices.push_back(k);
  indices.push_back(end);
  for (double t : forced_times)
    if (t <= max_t + 1e-12) indices.push_back(trace.index_of(t));
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

  FlowSampling s;
  s.times.reserve(indices.size());
  s.mats.reserve(indices.size());
  for (std::size_t k : indices) {
    s.times.push_back(trace.times[k]);
    s.mats.push_back(std::exp(trace.scale_log_h[k]) * trace.phi_h[k]);
  }
  return s;
}

// Pseudo-distances from one point to a batch of points, restricted to
// sampling times <= T.
Vector distances_to(const FlowSampling& s, double T, const Matrix& points, const Vector& from)
{
  const Eigen::Index g = points.cols();
  Matrix diff = points.colwise() - from;
  Vector worst = Vector::Zero(g);
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    if (s.times[k] > T + 1e-12) break;
    worst = worst.cwiseMax((s.mats[k] * diff).colwise().norm().transpose());
  }
  return worst;
}

Matrix stack_points(const std::vector<Vector>& pts)
{
  if (pts.empty()) return Matrix(0, 0);
  Matrix m(pts[0].size(), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = pts[j];
  return m;
}

std::vector<std::size_t> greedy_cover_indices(const FlowSampling& s, double T,
                                              const std::vector<Vector>& grid, double eps)
{
  std::vector<std::size_t> centers;
  const std::size_t g = grid.size();
  if (g == 0) return centers;

  std::vector<bool> covered(g, false);
  std::vector<std::size_t> open(g);
  for (std::size_t j = 0; j < g; ++j) open[j] = j;

  for (std::size_t j = 0; j < g; ++j) {
    if (covered[j]) continue;
    centers.push_back(j);

    // batch over the points still uncovered
    std::vector<std::size_t> still;
    still.reserve(open.size());
    for (std::size_t idx : open)
      if (!covered[idx]) still.push_back(idx);
    Matrix pts(grid[0].size(), static_cast<Eigen::Index>(still.size()));
    for (std::size_t c = 0; c < still.size(); ++c)
      pts.col(static_cast<Eigen::Index>(c)) = grid[still[c]];

    const Vector d = distances_to(s, T, pts, grid[j]);
    for (std::size_t c = 0; c < still.size(); ++c)
      if (d(static_cast<Eigen::Index>(c)) <= eps) covered[still[c]] = true;
    open = std::move(still);
  }
  return centers;
}

void check_eps(double eps)
{
  if (!(eps > 0.0)) throw InputError("epsilon must be positive");
}

} // namespace

bool is_spanning(const std::vector<Vector>& f, const std::vector<Vector>& k_grid,
                 const PropagatorTrace& trace, double T, double eps,
                 const EntropyOptions& opts)
{
  check_eps(eps);
  if (k_grid.empty()) return true;
  if (f.empty()) return false;

  const FlowSampling s = make_sampling(trace, T, {T}, opts.max_time_samples);
  const Matrix pts = stack_points(k_grid);
  Vector best = Vector::Constant(static_cast<Eigen::Index>(k_grid.size()),
                                 std::numeric_limits<double>::infinity());
  for (const Vector& y : f) best = best.cwiseMin(distances_to(s, T, pts, y));
  return (best.array() <= eps).all();
}

std::vector<Vector> greedy_spanning_centers(const PropagatorTrace& trace,
                                            const std::vector<Vector>& k_grid, double T,
                                            double eps, const EntropyOptions& opts)
{
  check_eps(eps);
  const FlowSampling s = make_sampling(trace, T, {T}, opts.max_time_samples);
  std::vector<Vector> out;
  for (std::size_t j : greedy_cover_indices(s, T, k_grid, eps)) out.push_back(k_grid[j]);
  return out;
}

long spanning_number(const PropagatorTrace& trace, const std::vector<Vector>& k_grid,
                     double T, double eps, const EntropyOptions& opts)
{
  check_eps(eps);
  const FlowSampling s = make_sampling(trace, T, {T}, opts.max_time_samples);
  return static_cast<long>(greedy_cover_indices(s, T, k_grid, eps).size());
}

long spanning_number(const PropagatorTrace& trace, const CompactSet& k, double T, double eps,
                     const EntropyOptions& opts)
{
  return spanning_number(trace, k.grid_points(), T, eps, opts);
}

long spanning_number_exact_1d(const PropagatorTrace& trace, const std::vector<Vector>& k_grid,
                              double T, double eps, const EntropyOptions& opts)
{
  check_eps(eps);
  if (k_grid.empty()) return 0;
  if (k_grid[0].size() != 1)
    throw InputError("exact 1-d oracle requires scalar states");

  // For scalar flows the pseudo-distance is gain * |x - y|; the optimal cover
  // of collinear points picks the rightmost admissible grid point as center.
  const FlowSampling s = make_sampling(trace, T, {T}, opts.max_time_samples);
  double gain = 0.0;
  for (std::size_t k = 0; k < s.times.size(); ++k)
    if (s.times[k] <= T + 1e-12) gain = std::max(gain, std::abs(s.mats[k](0, 0)));
  if (gain == 0.0) return 1;
  const double rho = eps / gain;

  std::vector<double> xs;
  xs.reserve(k_grid.size());
  for (const Vector& p : k_grid) xs.push_back(p(0));
  std::sort(xs.begin(), xs.end());

  long count = 0;
  std::size_t i = 0;
  while (i < xs.size()) {
    // rightmost grid point within rho of the leftmost uncovered point
    std::size_t c = i;
    while (c + 1 < xs.size() && xs[c + 1] <= xs[i] + rho) ++c;
    ++count;
    const double reach = xs[c] + rho;
    while (i < xs.size() && xs[i] <= reach) ++i;
  }
  return count;
}

long spanning_number_exact_tiny(const PropagatorTrace& trace,
                                const std::vector<Vector>& k_grid, double T, double eps,
                                const EntropyOptions& opts)
{
  check_eps(eps);
  const std::size_t g = k_grid.size();
  if (g == 0) return 0;
  if (g > 20) throw InputError("exhaustive oracle limited to 20 grid points");

  const FlowSampling s = make_sampling(trace, T, {T}, opts.max_time_samples);
  const Matrix pts = stack_points(k_grid);
  std::vector<std::uint32_t> ball(g, 0);
  for (std::size_t j = 0; j < g; ++j) {
    const Vector d = distances_to(s, T, pts, k_grid[j]);
    for (std::size_t c = 0; c < g; ++c)
      if (d(static_cast<Eigen::Index>(c)) <= eps) ball[j] |= (1u << c);
  }
  const std::uint32_t full = (g == 32) ? ~0u : ((1u << g) - 1u);

  for (long k = 1; k <= static_cast<long>(g); ++k) {
    std::vector<std::size_t> comb(static_cast<std::size_t>(k));
    for (long i = 0; i < k; ++i) comb[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
    while (true) {
      std::uint32_t cover = 0;
      for (std::size_t j : comb) cover |= ball[j];
      if (cover == full) return k;
      // next combination
      long i = k - 1;
      while (i >= 0 && comb[static_cast<std::size_t>(i)] == g - static_cast<std::size_t>(k - i))
        --i;
      if (i < 0) break;
      ++comb[static_cast<std::size_t>(i)];
      for (long j = i + 1; j < k; ++j)
        comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return static_cast<long>(g);
}

namespace {

struct SlopeFit {
  double slope = 0.0;
  double rms = 0.0;
};

SlopeFit fit_log_slope(const std::vector<double>& ts, const std::vector<double>& logs)
{
  const auto n = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += logs[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * logs[i];
  }
  const double denom = n * stt - st * st;
  SlopeFit f;
  if (denom == 0.0) return f;
  f.slope = (n * sty - st * sy) / denom;
  const double intercept = (sy - f.slope * st) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = logs[i] - (intercept + f.slope * ts[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

} // namespace

EntropyEstimate entropy_estimate(const PropagatorTrace& trace,
                                 const std::vector<Vector>& k_grid,
                                 std::vector<double> epsilons, std::vector<double> horizons,
                                 const EntropyOptions& opts)
{
  if (horizons.size() < 3) throw InputError("need at least 3 horizons");
  if (epsilons.size() < 2) throw InputError("need at least 2 epsilons");
  if (k_grid.empty()) throw InputError("empty test grid");
  for (double e : epsilons) check_eps(e);

  std::sort(horizons.begin(), horizons.end());
  std::sort(epsilons.begin(), epsilons.end(), std::greater<double>());
  for (double t : horizons) (void)trace.index_of(t);  // OffGrid if absent

  const FlowSampling s =
      make_sampling(trace, horizons.back(), horizons, opts.max_time_samples);

  EntropyEstimate est;
  est.epsilons = epsilons;
  est.horizons = horizons;
  est.spanning_counts.assign(epsilons.size(), std::vector<long>(horizons.size(), 0));

  bool all_saturated = true;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      const long r = static_cast<long>(
          greedy_cover_indices(s, horizons[h], k_grid, epsilons[e]).size());
      est.spanning_counts[e][h] = r;
      if (r < static_cast<long>(k_grid.size())) all_saturated = false;
    }
  }
  if (all_saturated)
    throw InsufficientGrowthData(
        "every spanning count saturated the test grid; raise grid_resolution or epsilon");

  // finite stand-in for the limsup: slope over the top half of the horizons
  std::size_t start = horizons.size() / 2;
  if (start > horizons.size() - 2) start = horizons.size() - 2;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    std::vector<double> ts, logs;
    for (std::size_t h = start; h < horizons.size(); ++h) {
      ts.push_back(horizons[h]);
      logs.push_back(std::log(static_cast<double>(std::max(1L, est.spanning_counts[e][h]))));
    }
    const SlopeFit f = fit_log_slope(ts, logs);
    est.slope_fits.push_back(f.slope);
    est.fit_residuals.push_back(f.rms);
  }

  for (std::size_t e = 0; e + 1 < epsilons.size(); ++e)
    for (std::size_t h = 0; h < horizons.size(); ++h)
      if (est.spanning_counts[e + 1][h] < est.spanning_counts[e][h])
        est.monotone_in_epsilon = false;

  est.h_estimate = std::max(0.0, est.slope_fits.back());
  return est;
}

EntropyEstimate entropy_estimate(const PropagatorTrace& trace, const CompactSet& k,
                                 std::vector<double> epsilons, std::vector<double> horizons,
                                 const EntropyOptions& opts)
{
  return entropy_estimate(trace, k.grid_points(), std::move(epsilons), std::move(horizons),
                          opts);
}

LyapunovEstimate lyapunov_det_exponent(const PropagatorTrace& trace)
{
  if (trace.logdet_h.empty() || trace.times.size() != trace.logdet_h.size())
    throw InputError("trace has no log-determinant channel");
  const double T = trace.times.back();
  if (!(T > 0.0)) throw InputError("trace horizon must be positive");

  LyapunovEstimate est;
  est.horizon_used = T;
  for (std::size_t k = 0; k < trace.times.size(); ++k)
    if (trace.times[k] > 0.0)
      est.convergence_series.emplace_back(trace.times[k], trace.logdet_h[k] / trace.times[k]);
  est.lambda_star = est.convergence_series.back().second;
  return est;
}

} // namespace liestab
