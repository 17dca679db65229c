#include <liestab/pipeline.hpp>

#include <liestab/entropy.hpp>
#include <liestab/errors.hpp>
#include <liestab/lie_algebra.hpp>
#include <liestab/rng.hpp>
#include <liestab/stability.hpp>
#include <liestab/switched_system.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace liestab {

namespace {

std::string fmt(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

Json num(double x) { return sig12(x); }

Json num_list(const std::vector<double>& v)
{
  Json out = Json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

Json basis_json(const LieBasis& b)
{
  Json out = Json::array();
  for (const Matrix& m : b.elements) out.push_back(matrix_to_json(m));
  return out;
}

Json structure_constants_json(const LieBasis& b)
{
  Json out = Json::array();
  for (const Matrix& c : b.structure_constants) out.push_back(matrix_to_json(c));
  return out;
}

Json decomposition_json(const LeviDecomposition& d)
{
  Json out;
  out["n"] = d.radical_parts.empty() ? 0 : static_cast<int>(d.radical_parts[0].rows());
  out["algebra_dim"] = d.algebra.dim();
  out["radical_dim"] = d.radical.dim();
  out["levi_dim"] = d.levi.dim();
  out["structure_residual"] = num(d.algebra.structure_residual);
  out["reconstruction_error"] = num(d.reconstruction_error);
  if (d.levi.dim() > 0) {
    const Matrix k = killing_form(d.levi);
    const Eigen::JacobiSVD<Matrix> svd(k);
    const auto& sv = svd.singularValues();
    out["levi_killing_sigma_min"] = num(sv(sv.size() - 1));
    out["levi_killing_sigma_max"] = num(sv(0));
  }
  out["radical_basis"] = basis_json(d.radical);
  out["levi_basis"] = basis_json(d.levi);
  out["algebra_basis"] = basis_json(d.algebra);
  out["structure_constants"] = structure_constants_json(d.algebra);
  Json splits = Json::array();
  for (std::size_t p = 0; p < d.radical_parts.size(); ++p) {
    Json s;
    s["mode"] = static_cast<int>(p + 1);
    s["radical_part"] = matrix_to_json(d.radical_parts[p]);
    s["levi_part"] = matrix_to_json(d.levi_parts[p]);
    splits.push_back(std::move(s));
  }
  out["splits"] = std::move(splits);
  return out;
}

Json signal_json(const SwitchingSignal& sig)
{
  Json out;
  Json intervals = Json::array();
  for (std::size_t i = 0; i < sig.breakpoints.size(); ++i)
    intervals.push_back(Json::array({num(sig.breakpoints[i]), sig.mode_indices[i]}));
  out["intervals"] = std::move(intervals);  // (breakpoint, mode) pairs
  out["horizon"] = num(sig.horizon);
  return out;
}

Json entropy_json(const EntropyEstimate& est)
{
  Json out;
  out["epsilons"] = num_list(est.epsilons);
  out["horizons"] = num_list(est.horizons);
  Json table = Json::array();
  for (const auto& row : est.spanning_counts) table.push_back(row);
  out["spanning_counts"] = std::move(table);
  out["slopes"] = num_list(est.slope_fits);
  out["fit_residuals"] = num_list(est.fit_residuals);
  out["h_estimate"] = num(est.h_estimate);
  out["monotone_in_epsilon"] = est.monotone_in_epsilon;
  return out;
}

Json certificate_json(const StabilityCertificate& cert)
{
  Json out;
  out["modal_abscissas"] = num_list(cert.modal_abscissas);
  out["h_value"] = num(cert.h_value);
  out["lambda_star"] = num(cert.lambda_star);
  out["entropy_condition"] = cert.entropy_condition;
  out["rate_condition"] = cert.rate_condition;
  out["verdict"] = to_string(cert.verdict);
  out["empirical"] = {{"M", num(cert.empirical.big_m)},
                      {"lambda", num(cert.empirical.lambda)},
                      {"decaying", cert.empirical.decaying}};
  out["notes"] = cert.notes;
  return out;
}

int classify(const Error& e)
{
  if (dynamic_cast<const InsufficientGrowthData*>(&e) != nullptr) return 4;
  if (dynamic_cast<const InputError*>(&e) != nullptr) return 2;
  return 3;
}

EvolveOptions evolve_options(const RunConfig& cfg)
{
  EvolveOptions opts;
  opts.ode_tol = cfg.tolerances.ode;
  return opts;
}

EntropyOptions entropy_options(const RunConfig& cfg)
{
  EntropyOptions opts;
  opts.max_time_samples = cfg.entropy.time_samples;
  return opts;
}

std::string trace_csv(const PropagatorTrace& tr)
{
  const Eigen::Index n =
      tr.has_full() ? tr.phi[0].rows() : (tr.has_factored() ? tr.phi_h[0].rows() : 0);
  std::string out = "t";
  auto add_block = [&](const char* name) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        out += "," + std::string(name) + "_" + std::to_string(i) + "_" + std::to_string(j);
  };
  add_block("phi");
  add_block("phi_h");
  add_block("phi_m");
  out += ",logdet_h,scale_phi,scale_h,scale_m\n";

  const Matrix zero = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out += fmt(tr.times[k]);
    auto add_matrix = [&](const Matrix& m) {
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out += "," + fmt(m(i, j));
    };
    add_matrix(tr.has_full() ? tr.phi[k] : zero);
    add_matrix(tr.has_factored() ? tr.phi_h[k] : zero);
    add_matrix(tr.has_factored() ? tr.phi_m[k] : zero);
    out += "," + fmt(tr.logdet_h.empty() ? 0.0 : tr.logdet_h[k]);
    out += "," + fmt(tr.scale_log_phi.empty() ? 0.0 : tr.scale_log_phi[k]);
    out += "," + fmt(tr.scale_log_h.empty() ? 0.0 : tr.scale_log_h[k]);
    out += "," + fmt(tr.scale_log_m.empty() ? 0.0 : tr.scale_log_m[k]);
    out += "\n";
  }
  return out;
}

// Indices of the uniform step grid inside a trace grid (breakpoints skipped),
// shared across traces of equal horizon so envelopes can be aligned.
std::vector<std::size_t> uniform_indices(const PropagatorTrace& tr, double step, double T)
{
  std::vector<std::size_t> idx;
  const double tol = 1e-9 * std::max(1.0, T);
  std::size_t k = 0;
  const auto count = static_cast<std::size_t>(std::floor(T / step + 1e-9));
  for (std::size_t j = 0; j <= count + 1; ++j) {
    const double t = (j <= count) ? static_cast<double>(j) * step : T;
    while (k < tr.times.size() && tr.times[k] < t - tol) ++k;
    if (k >= tr.times.size()) break;
    if (std::abs(tr.times[k] - t) <= tol && (idx.empty() || idx.back() != k)) idx.push_back(k);
  }
  return idx;
}

struct EntropyStage {
  std::vector<SwitchingSignal> signals;
  std::vector<PropagatorTrace> traces;
  std::vector<EntropyEstimate> estimates;
  std::vector<LyapunovEstimate> lyapunovs;
  std::size_t argmax_h = 0;
  std::size_t argmax_lambda = 0;
};

EntropyStage run_entropy_stage(const RunConfig& cfg, const GeneratorSet& gens,
                               const LeviDecomposition& decomp)
{
  EntropyStage st;
  const EvolveOptions eopts = evolve_options(cfg);
  const CompactSet box(cfg.entropy.center, cfg.entropy.half_widths,
                       cfg.entropy.grid_resolution);
  for (int k = 0; k < cfg.signal.count; ++k) {
    Rng child = Rng::child(cfg.signal.seed, static_cast<std::uint64_t>(k));
    SwitchingSignal sig = random_signal(child.next_u64(), cfg.signal.switch_rate,
                                        cfg.signal.horizon, static_cast<int>(cfg.modes.size()));
    PropagatorTrace tr;
    if (cfg.entropy.channel == "full") {
      // diagnostic channel: estimate on the whole evolution operator
      tr = evolve_full(gens, sig, cfg.step, eopts);
      tr.phi_h = tr.phi;
      tr.scale_log_h = tr.scale_log_phi;
    } else {
      tr = evolve_factored(decomp, sig, cfg.step, eopts);
    }
    st.estimates.push_back(entropy_estimate(tr, box, cfg.entropy.epsilons,
                                            cfg.entropy.horizons, entropy_options(cfg)));
    st.lyapunovs.push_back(lyapunov_det_exponent(tr));
    st.signals.push_back(std::move(sig));
    st.traces.push_back(std::move(tr));
  }
  for (std::size_t i = 1; i < st.estimates.size(); ++i) {
    if (st.estimates[i].h_estimate > st.estimates[st.argmax_h].h_estimate) st.argmax_h = i;
    if (st.lyapunovs[i].lambda_star > st.lyapunovs[st.argmax_lambda].lambda_star)
      st.argmax_lambda = i;
  }
  return st;
}

Json entropy_stage_json(const EntropyStage& st)
{
  Json out;
  Json per = Json::array();
  for (std::size_t i = 0; i < st.estimates.size(); ++i) {
    Json one;
    one["signal_index"] = static_cast<int>(i);
    one["switch_count"] = static_cast<int>(st.signals[i].interval_count() - 1);
    one["estimate"] = entropy_json(st.estimates[i]);
    one["lambda_star"] = num(st.lyapunovs[i].lambda_star);
    per.push_back(std::move(one));
  }
  out["per_signal"] = std::move(per);
  out["family_max_h"] = num(st.estimates[st.argmax_h].h_estimate);
  out["family_max_lambda_star"] = num(st.lyapunovs[st.argmax_lambda].lambda_star);
  return out;
}

std::string r_table_csv(const EntropyStage& st)
{
  std::string out = "signal,eps,T,r\n";
  for (std::size_t i = 0; i < st.estimates.size(); ++i) {
    const auto& est = st.estimates[i];
    for (std::size_t e = 0; e < est.epsilons.size(); ++e)
      for (std::size_t h = 0; h < est.horizons.size(); ++h)
        out += std::to_string(i) + "," + fmt(est.epsilons[e]) + "," + fmt(est.horizons[h]) +
               "," + std::to_string(est.spanning_counts[e][h]) + "\n";
  }
  return out;
}

std::string convergence_csv(const EntropyStage& st)
{
  std::string out = "signal,t,lambda_estimate\n";
  for (std::size_t i = 0; i < st.lyapunovs.size(); ++i) {
    const auto& series = st.lyapunovs[i].convergence_series;
    const std::size_t stride = std::max<std::size_t>(1, series.size() / 1000);
    for (std::size_t k = 0; k < series.size(); k += stride)
      out += std::to_string(i) + "," + fmt(series[k].first) + "," + fmt(series[k].second) +
             "\n";
  }
  return out;
}

struct EnvelopeStage {
  std::vector<double> times;
  std::vector<double> envelope;
  EnvelopeFit fit;
};

// Chunked parallel loop; bodies write disjoint slots, so the result does not
// depend on scheduling.  The first exception wins and is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body)
{
  unsigned workers = std::thread::hardware_concurrency();
  if (workers < 2 || count < 4) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  workers = std::min(workers, 8u);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Monte-Carlo batch over random signals; each trace contributes the norms of
// the standard-basis starts plus two random unit starts.  Per-signal seeds
// derive from the root seed, so the batch parallelizes deterministically.
EnvelopeStage run_envelope_stage(const RunConfig& cfg, const GeneratorSet& gens)
{
  const EvolveOptions eopts = evolve_options(cfg);
  const int n = gens.n;
  const double T = cfg.signal.horizon;
  const std::size_t starts_per_signal = static_cast<std::size_t>(n) + 2;

  EnvelopeStage st;
  const auto count = static_cast<std::size_t>(std::floor(T / cfg.step + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) st.times.push_back(static_cast<double>(k) * cfg.step);
  if (st.times.back() < T - 1e-9 * std::max(1.0, T)) st.times.push_back(T);

  std::vector<std::vector<double>> norms(static_cast<std::size_t>(cfg.trajectories) *
                                         starts_per_signal);
  parallel_for(static_cast<std::size_t>(cfg.trajectories), [&](std::size_t s) {
    Rng sig_rng = Rng::child(cfg.signal.seed, 1000000 + s);
    const SwitchingSignal sig =
        random_signal(sig_rng.next_u64(), cfg.signal.switch_rate, T, gens.mode_count());
    const PropagatorTrace tr = evolve_full(gens, sig, cfg.step, eopts);
    const auto idx = uniform_indices(tr, cfg.step, T);

    std::vector<Vector> starts;
    for (int i = 0; i < n; ++i) starts.push_back(Vector::Unit(n, i));
    Rng dir_rng = Rng::child(cfg.signal.seed, 2000000 + s);
    for (int r = 0; r < 2; ++r) {
      Vector v(n);
      for (int i = 0; i < n; ++i) v(i) = dir_rng.normal();
      if (v.norm() == 0.0) v = Vector::Unit(n, 0);
      starts.push_back(v / v.norm());
    }
    for (std::size_t d = 0; d < starts.size(); ++d) {
      std::vector<double> traj;
      traj.reserve(idx.size());
      for (std::size_t k : idx)
        traj.push_back(std::exp(tr.scale_log_phi[k]) * (tr.phi[k] * starts[d]).norm());
      norms[s * starts_per_signal + d] = std::move(traj);
    }
  });

  st.fit = gues_fit(norms, st.times, cfg.fit_window);
  st.envelope.assign(st.times.size(), 0.0);
  for (const auto& traj : norms)
    for (std::size_t k = 0; k < traj.size(); ++k)
      st.envelope[k] = std::max(st.envelope[k], traj[k]);
  return st;
}

std::string envelope_csv(const EnvelopeStage& st)
{
  std::string out = "t,envelope\n";
  for (std::size_t k = 0; k < st.times.size(); ++k)
    out += fmt(st.times[k]) + "," + fmt(st.envelope[k]) + "\n";
  return out;
}

CommandResult make_result(const char* command, const RunConfig& cfg)
{
  CommandResult res;
  res.report["tool"] = "liestab";
  res.report["command"] = command;
  res.report["status"] = "ok";
  res.report["config"] = cfg.to_json();
  res.report["results"] = Json::object();
  return res;
}

void record_failure(CommandResult& res, const std::string& stage, const Error& e)
{
  res.report["status"] = "failed";
  res.report["failed_stage"] = stage;
  res.report["error"] = e.what();
  res.exit_code = classify(e);
}

} // namespace

CommandResult cmd_decompose(const RunConfig& cfg)
{
  CommandResult res = make_result("decompose", cfg);
  try {
    const GeneratorSet gens(cfg.modes);
    const LeviDecomposition decomp =
        levi_decompose(gens, cfg.tolerances.rank, cfg.tolerances.split);
    res.report["results"]["decomposition"] = decomposition_json(decomp);
  } catch (const Error& e) {
    record_failure(res, "decompose", e);
  }
  return res;
}

CommandResult cmd_simulate(const RunConfig& cfg)
{
  CommandResult res = make_result("simulate", cfg);
  std::string stage = "decompose";
  try {
    const GeneratorSet gens(cfg.modes);
    const LeviDecomposition decomp =
        levi_decompose(gens, cfg.tolerances.rank, cfg.tolerances.split);
    res.report["results"]["decomposition"] = decomposition_json(decomp);

    stage = "simulate";
    const EvolveOptions eopts = evolve_options(cfg);
    Rng child = Rng::child(cfg.signal.seed, 0);
    const SwitchingSignal sig = random_signal(child.next_u64(), cfg.signal.switch_rate,
                                              cfg.signal.horizon, gens.mode_count());
    const PropagatorTrace full = evolve_full(gens, sig, cfg.step, eopts);
    const PropagatorTrace factored = evolve_factored(decomp, sig, cfg.step, eopts);

    Json sim;
    sim["signal"] = signal_json(sig);
    sim["factorization_residual"] = num(factorization_residual(full, factored));
    const std::size_t last = factored.times.size() - 1;
    const double n_scale =
        static_cast<double>(factored.phi_h[last].rows()) * factored.scale_log_h[last];
    const double det_direct = factored.phi_h[last].determinant();
    const double logdet_direct = std::log(std::abs(det_direct)) + n_scale;
    sim["logdet_drift"] = num(std::abs(factored.logdet_h[last] - logdet_direct));
    sim["det_h_final"] = num(det_direct * std::exp(n_scale));
    sim["trace_csv"] = "trace.csv";
    res.report["results"]["simulation"] = std::move(sim);

    PropagatorTrace merged = factored;
    merged.phi = full.phi;
    merged.scale_log_phi = full.scale_log_phi;
    res.files.emplace_back("trace.csv", trace_csv(merged));
  } catch (const Error& e) {
    record_failure(res, stage, e);
  }
  return res;
}

CommandResult cmd_entropy(const RunConfig& cfg)
{
  CommandResult res = make_result("entropy", cfg);
  std::string stage = "decompose";
  try {
    const GeneratorSet gens(cfg.modes);
    const LeviDecomposition decomp =
        levi_decompose(gens, cfg.tolerances.rank, cfg.tolerances.split);
    res.report["results"]["decomposition"] = decomposition_json(decomp);

    stage = "entropy";
    const EntropyStage st = run_entropy_stage(cfg, gens, decomp);
    Json ent = entropy_stage_json(st);
    ent["r_table_csv"] = "r_table.csv";
    ent["convergence_csv"] = "lyapunov.csv";
    res.report["results"]["entropy"] = std::move(ent);
    res.files.emplace_back("r_table.csv", r_table_csv(st));
    res.files.emplace_back("lyapunov.csv", convergence_csv(st));
  } catch (const Error& e) {
    record_failure(res, stage, e);
  }
  return res;
}

CommandResult cmd_certify(const RunConfig& cfg_in)
{
  // the certificate is defined on the semi-simple factor; the diagnostic
  // full-flow channel never feeds a verdict
  RunConfig cfg = cfg_in;
  cfg.entropy.channel = "semi_simple";

  CommandResult res = make_result("certify", cfg);
  std::string stage = "decompose";
  try {
    const GeneratorSet gens(cfg.modes);
    const LeviDecomposition decomp =
        levi_decompose(gens, cfg.tolerances.rank, cfg.tolerances.split);
    res.report["results"]["decomposition"] = decomposition_json(decomp);

    stage = "simulate";
    const EntropyStage st = run_entropy_stage(cfg, gens, decomp);
    {
      const PropagatorTrace full = evolve_full(gens, st.signals[0], cfg.step,
                                               evolve_options(cfg));
      res.report["results"]["simulation"] = {
          {"signal", signal_json(st.signals[0])},
          {"factorization_residual", num(factorization_residual(full, st.traces[0]))}};
    }

    stage = "entropy";
    res.report["results"]["entropy"] = entropy_stage_json(st);
    res.files.emplace_back("r_table.csv", r_table_csv(st));
    res.files.emplace_back("lyapunov.csv", convergence_csv(st));

    stage = "certify";
    StabilityCertificate cert =
        certify(decomp, st.estimates[st.argmax_h], st.lyapunovs[st.argmax_lambda]);

    stage = "gues_fit";
    const EnvelopeStage env = run_envelope_stage(cfg, gens);
    cert.empirical = env.fit;
    res.files.emplace_back("envelope.csv", envelope_csv(env));

    stage = "radical_bound";
    const RadicalBoundReport bound =
        radical_bound_check(decomp, st.signals[0], cfg.step, evolve_options(cfg));

    Json cj = certificate_json(cert);
    cj["radical_bound"] = {{"m_emp", num(bound.m_emp)},
                           {"rate", num(bound.rate)},
                           {"worst_time", num(bound.worst_time)},
                           {"exceeds_unity", bound.exceeds_unity}};
    cj["predicted_rate"] = num(-( *std::max_element(cert.modal_abscissas.begin(),
                                                    cert.modal_abscissas.end()) +
                                  cert.lambda_star));
    res.report["results"]["certificate"] = std::move(cj);
  } catch (const Error& e) {
    record_failure(res, stage, e);
  }
  return res;
}

int run_command(const std::string& verb, const RunConfig& cfg)
{
  CommandResult res;
  if (verb == "decompose") res = cmd_decompose(cfg);
  else if (verb == "simulate") res = cmd_simulate(cfg);
  else if (verb == "entropy") res = cmd_entropy(cfg);
  else if (verb == "certify") res = cmd_certify(cfg);
  else throw InputError("unknown command " + verb);

  namespace fs = std::filesystem;
  fs::create_directories(cfg.outputs);
  {
    std::ofstream out(fs::path(cfg.outputs) / "report.json");
    out << res.report.dump(2) << "\n";
  }
  for (const auto& [name, content] : res.files) {
    std::ofstream out(fs::path(cfg.outputs) / name);
    out << content;
  }
  return res.exit_code;
}

} // namespace liestab
