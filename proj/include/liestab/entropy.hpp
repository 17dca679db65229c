#ifndef LIESTAB_ENTROPY_HPP
#define LIESTAB_ENTROPY_HPP

#include <liestab/errors.hpp>
#include <liestab/switched_system.hpp>
#include <liestab/types.hpp>

#include <vector>

namespace liestab {

/// Axis-aligned box with a uniform test grid, the working realization of a
/// compact subset of state space.
struct CompactSet {
  Vector center;
  Vector half_widths;      ///< all positive
  int grid_resolution = 9; ///< points per axis, at least 2

  CompactSet() = default;
  CompactSet(Vector c, Vector hw, int resolution);

  /// Full tensor grid, resolution^n points, axis-0 fastest.
  std::vector<Vector> grid_points() const;
};

struct EntropyOptions {
  /// Target number of grid times used to approximate the sup over [0, T].
  /// The horizon samples themselves are always included.
  int max_time_samples = 129;
};

/// Spanning-count table with per-epsilon growth-rate fits.
struct EntropyEstimate {
  std::vector<double> epsilons;  ///< decreasing
  std::vector<double> horizons;  ///< increasing
  std::vector<std::vector<long>> spanning_counts;  ///< [epsilon][horizon]
  std::vector<double> slope_fits;      ///< log r vs T slope per epsilon
  std::vector<double> fit_residuals;   ///< RMS residual of each fit
  double h_estimate = 0.0;             ///< slope at smallest epsilon, clamped at 0
  bool monotone_in_epsilon = true;     ///< diagnostic: r grew as epsilon shrank
};

/// Determinant-based Lyapunov exponent of the integrated flow.
struct LyapunovEstimate {
  double lambda_star = 0.0;
  double horizon_used = 0.0;
  std::vector<std::pair<double, double>> convergence_series;  ///< (t, logdet/t)
};

/// Phi_h(t) x for a grid time t.
Vector flow_map(const PropagatorTrace& trace, const Vector& x, double t);

/// True iff every grid point of K is within eps of some point of F in the
/// flow pseudo-distance max_{t in [0,T]} |Phi_h(t)(x - y)|.
bool is_spanning(const std::vector<Vector>& f, const std::vector<Vector>& k_grid,
                 const PropagatorTrace& trace, double T, double eps,
                 const EntropyOptions& opts = {});

/// Greedy cover upper bound on the minimal spanning cardinality: grid points
/// are scanned in index order, each uncovered point becomes a center and
/// covers everything within eps.  The result is within a covering-vs-packing
/// factor of the true minimum.
long spanning_number(const PropagatorTrace& trace, const CompactSet& k, double T, double eps,
                     const EntropyOptions& opts = {});
long spanning_number(const PropagatorTrace& trace, const std::vector<Vector>& k_grid,
                     double T, double eps, const EntropyOptions& opts = {});

/// The centers chosen by the greedy cover (always a spanning set).
std::vector<Vector> greedy_spanning_centers(const PropagatorTrace& trace,
                                            const std::vector<Vector>& k_grid, double T,
                                            double eps, const EntropyOptions& opts = {});

/// Exact minimal spanning cardinality for scalar (n = 1) flows, by the
/// optimal sweep cover of collinear points.  Calibrates the greedy gap.
long spanning_number_exact_1d(const PropagatorTrace& trace, const std::vector<Vector>& k_grid,
                              double T, double eps, const EntropyOptions& opts = {});

/// Exact minimal spanning cardinality by exhaustive subset search; intended
/// for tiny grids (at most ~20 points).
long spanning_number_exact_tiny(const PropagatorTrace& trace,
                                const std::vector<Vector>& k_grid, double T, double eps,
                                const EntropyOptions& opts = {});

/// Fills the spanning-count table over all (epsilon, horizon) cells and fits
/// the growth rate of log r over the largest horizons; the reported entropy
/// is the slope at the smallest epsilon, clamped at zero.  Throws
/// InsufficientGrowthData when every cell saturates the grid.
EntropyEstimate entropy_estimate(const PropagatorTrace& trace, const CompactSet& k,
                                 std::vector<double> epsilons, std::vector<double> horizons,
                                 const EntropyOptions& opts = {});
EntropyEstimate entropy_estimate(const PropagatorTrace& trace,
                                 const std::vector<Vector>& k_grid,
                                 std::vector<double> epsilons, std::vector<double> horizons,
                                 const EntropyOptions& opts = {});

/// lambda* = logdet(T) / T with the full convergence series.
LyapunovEstimate lyapunov_det_exponent(const PropagatorTrace& trace);

} // namespace liestab

#endif
