#ifndef LIESTAB_STABILITY_HPP
#define LIESTAB_STABILITY_HPP

#include <liestab/entropy.hpp>
#include <liestab/errors.hpp>
#include <liestab/lie_algebra.hpp>
#include <liestab/switched_system.hpp>
#include <liestab/types.hpp>

#include <string>
#include <vector>

namespace liestab {

/// Envelope fit |x(t)| <= M exp(-lambda t).
struct EnvelopeFit {
  double big_m = 1.0;     ///< clamped to >= 1
  double lambda = 0.0;    ///< decay rate, positive when decaying
  bool decaying = false;
};

/// Verdicts are deliberately two-valued: the certificate is sufficient-only,
/// so its failure never means "unstable".
enum class Verdict { CertifiedGues, Inconclusive };

std::string to_string(Verdict v);

struct StabilityCertificate {
  std::vector<double> modal_abscissas;  ///< per mode, of the radical part
  double h_value = 0.0;                 ///< entropy estimate used
  double lambda_star = 0.0;             ///< determinant Lyapunov exponent
  bool entropy_condition = false;       ///< h < -max modal abscissa
  bool rate_condition = false;          ///< max modal abscissa + lambda* < 0
  Verdict verdict = Verdict::Inconclusive;
  EnvelopeFit empirical;
  std::vector<std::string> notes;
};

/// Empirical check of the radical decay bound.
struct RadicalBoundReport {
  double m_emp = 1.0;       ///< smallest constant M with |Phi_m(t)x| <= M e^{rate t}|x|
  double rate = 0.0;        ///< max modal abscissa of the radical parts
  double worst_time = 0.0;
  bool exceeds_unity = false;  ///< transient growth beyond the bare exponential bound
};

/// Max real part of the spectrum.
double spectral_abscissa(const Matrix& a);

/// Evaluates the certificate: the verdict is CertifiedGues iff the entropy
/// estimate lies below the negated worst modal abscissa of the radical
/// parts.  The rate condition is recorded independently as supporting
/// evidence and does not influence the verdict.
StabilityCertificate certify(const LeviDecomposition& decomp, const EntropyEstimate& h_est,
                             const LyapunovEstimate& lyap);

/// Fits the upper envelope of trajectory norms over the trailing fit window
/// (fraction of the horizon).  Requires at least 10 trajectories with
/// |x(0)| = 1; throws DegenerateEnvelope when the envelope vanishes.
EnvelopeFit gues_fit(const std::vector<std::vector<double>>& trajectory_norms,
                     const std::vector<double>& times, double fit_window);

/// Propagates the radical factor and measures the smallest constant M_emp
/// with |Phi_m(t) x| <= M_emp * exp(rate * t) |x| over sampled times and a
/// fixed set of unit directions (standard basis plus 64 pseudo-random).
/// M_emp > 1 flags non-normal transient growth.
RadicalBoundReport radical_bound_check(const LeviDecomposition& decomp,
                                       const SwitchingSignal& sig, double step,
                                       const EvolveOptions& opts = {});

} // namespace liestab

#endif
