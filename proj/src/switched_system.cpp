#include <liestab/switched_system.hpp>

#include <liestab/rng.hpp>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace liestab {

SwitchingSignal::SwitchingSignal(std::vector<double> bps, std::vector<int> modes, double T)
    : breakpoints(std::move(bps)), mode_indices(std::move(modes)), horizon(T)
{
  if (breakpoints.empty() || breakpoints.front() != 0.0)
    throw InputError("switching signal must start at t = 0");
  if (breakpoints.size() != mode_indices.size())
    throw InputError("one mode index per interval required");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InputError("signal horizon must be positive and finite");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw InputError("breakpoints must be strictly increasing");
  if (!(breakpoints.back() < horizon))
    throw InputError("last breakpoint must lie before the horizon");
  for (int p : mode_indices)
    if (p < 1) throw InputError("mode indices are 1-based");
}

int SwitchingSignal::mode_at(double t) const
{
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  const std::size_t idx = (it == breakpoints.begin()) ? 0 : (it - breakpoints.begin() - 1);
  return mode_indices[idx];
}

SwitchingSignal random_signal(std::uint64_t seed, double switch_rate, double T, int N)
{
  if (!(T > 0.0)) throw InputError("horizon must be positive");
  if (N < 1) throw InputError("need at least one mode");
  if (switch_rate < 0.0) throw InputError("switch rate must be nonnegative");

  Rng rng(seed);
  std::vector<double> bps{0.0};
  std::vector<int> modes{1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(N)))};
  if (switch_rate > 0.0) {
    double t = rng.exponential(switch_rate);
    while (t < T) {
      bps.push_back(t);
      modes.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(N))));
      t += rng.exponential(switch_rate);
    }
  }
  return SwitchingSignal(std::move(bps), std::move(modes), T);
}

std::size_t PropagatorTrace::index_of(double t) const
{
  const double tol = 1e-9 * std::max(1.0, times.empty() ? 1.0 : times.back());
  auto it = std::lower_bound(times.begin(), times.end(), t - tol);
  if (it == times.end() || std::abs(*it - t) > tol)
    throw OffGrid("time " + std::to_string(t) + " is not a grid sample");
  return static_cast<std::size_t>(it - times.begin());
}

namespace {

// Uniform step grid merged with all breakpoints and the horizon.
std::vector<double> sample_grid(const SwitchingSignal& sig, double step)
{
  if (!(step > 0.0)) throw InputError("integration step must be positive");
  const double T = sig.horizon;
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor(T / step + 1e-9));
  g.reserve(count + sig.breakpoints.size() + 2);
  for (std::size_t k = 0; k <= count; ++k) g.push_back(static_cast<double>(k) * step);
  for (double b : sig.breakpoints) g.push_back(b);
  g.push_back(T);
  std::sort(g.begin(), g.end());
  const double merge_tol = 1e-9 * std::max(1.0, T);
  std::vector<double> out;
  out.reserve(g.size());
  for (double t : g)
    if (out.empty() || t - out.back() > merge_tol) out.push_back(t);
  out.back() = T;
  return out;
}

// Degree-4 Taylor polynomial of exp(X); equals one classical RK4 step of the
// constant-coefficient matrix ODE.
Matrix rk4_transition(const Matrix& x)
{
  const Eigen::Index n = x.rows();
  const Matrix x2 = x * x;
  return Matrix::Identity(n, n) + x + 0.5 * x2 + (1.0 / 6.0) * x2 * x +
         (1.0 / 24.0) * x2 * x2;
}

struct GapCheck {
  double halving = 0.0;
  double exact = 0.0;
};

// Local error proxies for the transition over one gap of the semi-simple /
// full channel (constant coefficient A on the gap).
GapCheck check_transition(const Matrix& a, double gap, const Matrix& coarse,
                          const EvolveOptions& opts)
{
  GapCheck c;
  if (opts.check_halving) {
    const Matrix half = rk4_transition(0.5 * gap * a);
    c.halving = operator_norm(coarse - half * half);
  }
  if (opts.check_exact && a.rows() <= 8) {
    const Matrix e = (gap * a).exp();
    c.exact = operator_norm(coarse - e);
  }
  return c;
}

void require_fine_enough(const GapCheck& c, double t, const EvolveOptions& opts)
{
  if (c.halving > opts.ode_tol)
    throw StepTooCoarse("halving proxy " + std::to_string(c.halving) + " at t = " +
                        std::to_string(t));
  if (c.exact > opts.ode_tol)
    throw StepTooCoarse("exponential channel deviation " + std::to_string(c.exact) +
                        " at t = " + std::to_string(t));
}

void rescale_if_needed(Matrix& m, double& scale_log, double threshold)
{
  if (m.cwiseAbs().maxCoeff() > threshold) {
    const double s = m.norm();
    m /= s;
    scale_log += std::log(s);
  }
}

// One classical RK4 step of the coupled system
//   H' = Ah H,   M' = (H^{-1} Am H) M
// started at (h0, I); returns the end value of H and the M transition.
// The M update is linear in M, so the transition applies to any M.
void coupled_step(const Matrix& ah, const Matrix& am, const Matrix& h0, double gap,
                  Matrix& h_end, Matrix& m_transition)
{
  const Eigen::Index n = h0.rows();
  const Matrix eye = Matrix::Identity(n, n);

  auto conj = [&](const Matrix& h) -> Matrix { return h.partialPivLu().solve(am * h); };

  const Matrix k1h = ah * h0;
  const Matrix k1m = conj(h0);  // times M = I

  const Matrix h2 = h0 + 0.5 * gap * k1h;
  const Matrix m2 = eye + 0.5 * gap * k1m;
  const Matrix k2h = ah * h2;
  const Matrix k2m = conj(h2) * m2;

  const Matrix h3 = h0 + 0.5 * gap * k2h;
  const Matrix m3 = eye + 0.5 * gap * k2m;
  const Matrix k3h = ah * h3;
  const Matrix k3m = conj(h3) * m3;

  const Matrix h4 = h0 + gap * k3h;
  const Matrix m4 = eye + gap * k3m;
  const Matrix k4h = ah * h4;
  const Matrix k4m = conj(h4) * m4;

  h_end = h0 + (gap / 6.0) * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
  m_transition = eye + (gap / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
}

} // namespace

PropagatorTrace evolve_full(const GeneratorSet& gens, const SwitchingSignal& sig,
                            double step, const EvolveOptions& opts)
{
  for (int p : sig.mode_indices)
    if (p > gens.mode_count())
      throw InputError("signal uses mode " + std::to_string(p) + " but only " +
                       std::to_string(gens.mode_count()) + " modes exist");

  const int n = gens.n;
  PropagatorTrace tr;
  tr.step = step;
  tr.times = sample_grid(sig, step);

  Matrix phi = Matrix::Identity(n, n);
  double logdet = 0.0;
  double scale_log = 0.0;

  tr.phi.push_back(phi);
  tr.logdet_h.push_back(0.0);
  tr.scale_log_phi.push_back(0.0);

  int current_mode = 0;
  std::map<double, std::pair<Matrix, GapCheck>> transition_cache;

  for (std::size_t k = 1; k < tr.times.size(); ++k) {
    const double t0 = tr.times[k - 1];
    const double gap = tr.times[k] - t0;
    const int p = sig.mode_at(t0);
    if (p != current_mode) {
      transition_cache.clear();
      current_mode = p;
    }
    const Matrix& a = gens.mode(p);

    auto it = transition_cache.find(gap);
    if (it == transition_cache.end()) {
      Matrix tmat = rk4_transition(gap * a);
      GapCheck chk = check_transition(a, gap, tmat, opts);
      it = transition_cache.emplace(gap, std::make_pair(std::move(tmat), chk)).first;
    }
    require_fine_enough(it->second.second, t0, opts);

    phi = it->second.first * phi;
    logdet += a.trace() * gap;
    rescale_if_needed(phi, scale_log, opts.overflow_threshold);
    if (!phi.allFinite()) throw IllConditioned("non-finite entries in the full operator");

    tr.phi.push_back(phi);
    tr.logdet_h.push_back(logdet);
    tr.scale_log_phi.push_back(scale_log);
  }
  return tr;
}

PropagatorTrace evolve_factored(const LeviDecomposition& decomp, const SwitchingSignal& sig,
                                double step, const EvolveOptions& opts)
{
  const auto mode_count = static_cast<int>(decomp.radical_parts.size());
  for (int p : sig.mode_indices)
    if (p > mode_count)
      throw InputError("signal uses mode " + std::to_string(p) + " but only " +
                       std::to_string(mode_count) + " splits exist");
  if (decomp.radical_parts.empty()) throw InputError("decomposition has no modes");

  const Eigen::Index n = decomp.radical_parts[0].rows();
  PropagatorTrace tr;
  tr.step = step;
  tr.times = sample_grid(sig, step);

  Matrix h = Matrix::Identity(n, n);
  Matrix m = Matrix::Identity(n, n);
  double logdet = 0.0;
  double scale_h = 0.0;
  double scale_m = 0.0;

  tr.phi_h.push_back(h);
  tr.phi_m.push_back(m);
  tr.logdet_h.push_back(0.0);
  tr.scale_log_h.push_back(0.0);
  tr.scale_log_m.push_back(0.0);

  for (std::size_t k = 1; k < tr.times.size(); ++k) {
    const double t0 = tr.times[k - 1];
    const double gap = tr.times[k] - t0;
    const int p = sig.mode_at(t0);
    const Matrix& ah = decomp.levi_parts[static_cast<std::size_t>(p - 1)];
    const Matrix& am = decomp.radical_parts[static_cast<std::size_t>(p - 1)];

    Matrix h_end, m_trans;
    coupled_step(ah, am, h, gap, h_end, m_trans);

    if (opts.check_halving || opts.check_exact) {
      GapCheck chk = check_transition(ah, gap, rk4_transition(gap * ah), opts);
      if (opts.check_halving) {
        Matrix h_mid, t1, h_end2, t2;
        coupled_step(ah, am, h, 0.5 * gap, h_mid, t1);
        coupled_step(ah, am, h_mid, 0.5 * gap, h_end2, t2);
        chk.halving = std::max(chk.halving, operator_norm(m_trans - t2 * t1));
      }
      require_fine_enough(chk, t0, opts);
    }

    h = std::move(h_end);
    m = m_trans * m;
    logdet += ah.trace() * gap;

    rescale_if_needed(h, scale_h, opts.overflow_threshold);
    rescale_if_needed(m, scale_m, opts.overflow_threshold);
    if (!h.allFinite() || !m.allFinite())
      throw IllConditioned("non-finite entries in a factored operator");

    {
      const Eigen::JacobiSVD<Matrix> svd(h);
      const double smin = svd.singularValues()(svd.singularValues().size() - 1);
      const double smax = svd.singularValues()(0);
      if (!(smin > 0.0) || smax / smin > opts.cond_limit)
        throw IllConditioned("semi-simple factor condition estimate exceeds limit at t = " +
                             std::to_string(tr.times[k]));
    }

    tr.phi_h.push_back(h);
    tr.phi_m.push_back(m);
    tr.logdet_h.push_back(logdet);
    tr.scale_log_h.push_back(scale_h);
    tr.scale_log_m.push_back(scale_m);
  }
  return tr;
}

double factorization_residual(const PropagatorTrace& full, const PropagatorTrace& factored)
{
  if (full.times.size() != factored.times.size())
    throw GridMismatch("sample counts differ");
  const double tol = 1e-9 * std::max(1.0, full.times.back());
  for (std::size_t k = 0; k < full.times.size(); ++k)
    if (std::abs(full.times[k] - factored.times[k]) > tol)
      throw GridMismatch("grids deviate at sample " + std::to_string(k));
  if (!full.has_full() || !factored.has_factored())
    throw InputError("need one full trace and one factored trace");

  double worst = 0.0;
  for (std::size_t k = 0; k < full.times.size(); ++k) {
    const double sf = full.scale_log_phi[k];
    const double sp = factored.scale_log_h[k] + factored.scale_log_m[k];
    const double smax = std::max(sf, sp);
    const Matrix diff = std::exp(sf - smax) * full.phi[k] -
                        std::exp(sp - smax) * (factored.phi_h[k] * factored.phi_m[k]);
    worst = std::max(worst, operator_norm(diff) * std::exp(smax));
  }
  return worst;
}

StateTrajectory state_trajectory(const GeneratorSet& gens, const SwitchingSignal& sig,
                                 const Vector& x0, double step, const EvolveOptions& opts)
{
  if (!x0.allFinite()) throw InputError("initial state must be finite");
  if (x0.size() != gens.n) throw InputError("initial state dimension mismatch");

  const PropagatorTrace tr = evolve_full(gens, sig, step, opts);
  StateTrajectory out;
  out.times = tr.times;
  out.states.reserve(tr.times.size());
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    out.states.push_back(std::exp(tr.scale_log_phi[k]) * (tr.phi[k] * x0));
  return out;
}

} // namespace liestab
