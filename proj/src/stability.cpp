#include <liestab/stability.hpp>

#include <liestab/rng.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace liestab {

std::string to_string(Verdict v)
{
  return v == Verdict::CertifiedGues ? "CERTIFIED_GUES" : "INCONCLUSIVE";
}

double spectral_abscissa(const Matrix& a)
{
  if (!a.allFinite()) throw InputError("spectral abscissa of a non-finite matrix");
  if (a.rows() != a.cols()) throw InputError("spectral abscissa needs a square matrix");
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw EigenFailure("eigenvalue iteration did not converge");
  return es.eigenvalues().real().maxCoeff();
}

StabilityCertificate certify(const LeviDecomposition& decomp, const EntropyEstimate& h_est,
                             const LyapunovEstimate& lyap)
{
  if (decomp.radical_parts.empty()) throw InputError("decomposition has no modes");
  StabilityCertificate cert;
  for (const Matrix& am : decomp.radical_parts)
    cert.modal_abscissas.push_back(spectral_abscissa(am));
  const double worst =
      *std::max_element(cert.modal_abscissas.begin(), cert.modal_abscissas.end());

  cert.h_value = h_est.h_estimate;
  cert.lambda_star = lyap.lambda_star;
  cert.entropy_condition = cert.h_value < -worst;
  cert.rate_condition = worst + cert.lambda_star < 0.0;
  cert.verdict = cert.entropy_condition ? Verdict::CertifiedGues : Verdict::Inconclusive;

  if (decomp.radical.dim() == 0)
    cert.notes.push_back(
        "trivial radical: all radical parts vanish, so the worst modal abscissa is 0 and "
        "the entropy condition would require a negative entropy; the certificate cannot "
        "apply even though compact semi-simple families are known stable");
  return cert;
}

EnvelopeFit gues_fit(const std::vector<std::vector<double>>& trajectory_norms,
                     const std::vector<double>& times, double fit_window)
{
  if (trajectory_norms.size() < 10) throw InputError("need at least 10 trajectories");
  if (times.size() < 2) throw InputError("need at least 2 samples");
  if (!(fit_window > 0.0) || fit_window > 1.0)
    throw InputError("fit window must lie in (0, 1]");
  const double horizon = times.back();
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  for (const auto& traj : trajectory_norms)
    if (traj.size() != times.size()) throw InputError("trajectory sample count mismatch");

  std::vector<double> envelope(times.size(), 0.0);
  for (const auto& traj : trajectory_norms)
    for (std::size_t k = 0; k < times.size(); ++k)
      envelope[k] = std::max(envelope[k], traj[k]);

  if (*std::max_element(envelope.begin(), envelope.end()) == 0.0)
    throw DegenerateEnvelope("all trajectories vanish identically");

  const double t_start = horizon * (1.0 - fit_window);
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_start || envelope[k] <= 0.0) continue;
    const double y = std::log(envelope[k]);
    st += times[k];
    sy += y;
    stt += times[k] * times[k];
    sty += times[k] * y;
    ++count;
  }
  if (count < 2) throw DegenerateEnvelope("fit window holds fewer than 2 positive samples");

  const double denom = static_cast<double>(count) * stt - st * st;
  const double slope = (static_cast<double>(count) * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / static_cast<double>(count);

  EnvelopeFit fit;
  fit.lambda = -slope;
  fit.big_m = std::max(1.0, std::exp(intercept));
  fit.decaying = fit.lambda > 0.0 && envelope.back() < envelope.front();
  return fit;
}

RadicalBoundReport radical_bound_check(const LeviDecomposition& decomp,
                                       const SwitchingSignal& sig, double step,
                                       const EvolveOptions& opts)
{
  RadicalBoundReport report;
  double rate = -std::numeric_limits<double>::infinity();
  for (const Matrix& am : decomp.radical_parts) rate = std::max(rate, spectral_abscissa(am));
  report.rate = rate;

  const PropagatorTrace tr = evolve_factored(decomp, sig, step, opts);
  const auto n = decomp.radical_parts[0].rows();

  // standard basis plus 64 reproducible unit directions
  std::vector<Vector> dirs;
  for (Eigen::Index i = 0; i < n; ++i) dirs.push_back(Vector::Unit(n, i));
  Rng rng(0x5eedu);
  for (int k = 0; k < 64; ++k) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
    if (v.norm() == 0.0) v = Vector::Unit(n, 0);
    dirs.push_back(v / v.norm());
  }

  // worked in logs so rescaled or strongly decaying factors stay finite
  double best_log = 0.0;  // t = 0 gives exactly 1
  report.worst_time = 0.0;
  for (std::size_t k = 1; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    for (const Vector& x : dirs) {
      const double nrm = (tr.phi_m[k] * x).norm();
      if (nrm <= 0.0) continue;
      const double log_ratio = std::log(nrm) + tr.scale_log_m[k] - rate * t;
      if (log_ratio > best_log) {
        best_log = log_ratio;
        report.worst_time = t;
      }
    }
  }
  report.m_emp = std::exp(best_log);
  report.exceeds_unity = report.m_emp > 1.0 + 1e-6;
  return report;
}

} // namespace liestab
