// Acceptance suite: end-to-end checks at desk scale, one line per criterion.
// Exits nonzero if any criterion fails or overruns its time budget.

#include "fixtures.hpp"

#include <liestab/config.hpp>
#include <liestab/entropy.hpp>
#include <liestab/lie_algebra.hpp>
#include <liestab/pipeline.hpp>
#include <liestab/rng.hpp>
#include <liestab/stability.hpp>
#include <liestab/switched_system.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace liestab;
using namespace fixtures;

namespace {

int g_failures = 0;

void run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<std::string()>& body)
{
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  try {
    detail = body();
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0.0 && elapsed > budget_seconds) {
    ok = false;
    detail += " [over budget of " + std::to_string(budget_seconds) + " s]";
  }
  if (!ok) ++g_failures;
  std::printf("[%s] criterion %d: %s (%.1f s) %s\n", ok ? "PASS" : "FAIL", number,
              name.c_str(), elapsed, detail.c_str());
  std::fflush(stdout);
}

struct Check {
  bool ok = true;
  std::string msg;
  void require(bool cond, const std::string& what)
  {
    if (!cond) {
      ok = false;
      msg += (msg.empty() ? "" : "; ") + what;
    }
  }
  std::string done(const std::string& summary) const
  {
    if (!ok) throw std::runtime_error(msg);
    return summary;
  }
};

std::string fmt1(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

std::string algebra_suite()
{
  Check c;

  const LieBasis nil = closure(GeneratorSet({sl2_e(), sl2_f()}), 1e-9);
  c.require(nil.dim() == 3, "closure of the nilpotent pair has dim " +
                                std::to_string(nil.dim()));

  const LieBasis gl2 =
      closure(GeneratorSet({sl2_e(), sl2_f(), Matrix::Identity(2, 2)}), 1e-9);
  const LieBasis rad = radical(gl2, 1e-9);
  c.require(rad.dim() == 1, "radical of gl(2) has dim " + std::to_string(rad.dim()));
  if (rad.dim() == 1) {
    const Matrix dir = rad.elements[0] / rad.elements[0](0, 0);
    c.require((dir - Matrix::Identity(2, 2)).norm() < 1e-9, "radical is not span{I}");
  }

  const LieBasis levi = levi_complement(gl2, rad, 1e-9);
  c.require(levi.dim() == 3, "levi complement of gl(2) has dim " +
                                 std::to_string(levi.dim()));
  {
    const Eigen::JacobiSVD<Matrix> svd(killing_form(levi));
    const auto& sv = svd.singularValues();
    c.require(sv(sv.size() - 1) > 1e-9 * sv(0), "levi killing form is degenerate");
  }

  double worst_split = 0.0;
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = (trial < 50) ? 2 : 3;
    std::vector<Matrix> mats;
    const int count = 2 + static_cast<int>(rng.below(2));
    for (int i = 0; i < count; ++i) mats.push_back(random_matrix(rng, n));
    const LeviDecomposition d = levi_decompose(GeneratorSet(mats), 1e-9, 1e-9);
    worst_split = std::max(worst_split, d.reconstruction_error);
    c.require(d.radical.dim() + d.levi.dim() == d.algebra.dim(),
              "dimension arithmetic failed at trial " + std::to_string(trial));
  }
  c.require(worst_split < 1e-9, "worst split residual " + fmt1(worst_split));

  return c.done("dims 3/1/3, worst split residual " + fmt1(worst_split) +
                " over 100 random sets");
}

std::string lemma_factorization()
{
  Check c;
  Rng rng(777);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(2));
    const int modes = 1 + static_cast<int>(rng.below(3));
    std::vector<Matrix> mats;
    for (int p = 0; p < modes; ++p) mats.push_back(random_matrix_scaled(rng, n, 0.35));
    const GeneratorSet gens(mats);
    const LeviDecomposition d = levi_decompose(gens, 1e-9, 1e-9);
    const SwitchingSignal sig = random_signal(rng.next_u64(), 1.5, 10.0, modes);
    const double resid = factorization_residual(evolve_full(gens, sig, 1e-3),
                                                evolve_factored(d, sig, 1e-3));
    worst = std::max(worst, resid);
  }
  c.require(worst < 1e-5, "worst residual " + fmt1(worst));

  // order-4 convergence on a fixed instance
  Rng rng2(47);
  std::vector<Matrix> modes{random_matrix_scaled(rng2, 2, 1.2),
                            random_matrix_scaled(rng2, 2, 1.2)};
  const GeneratorSet gens(modes);
  const LeviDecomposition d = levi_decompose(gens, 1e-9, 1e-9);
  const SwitchingSignal sig({0.0, 0.7, 1.3}, {1, 2, 1}, 2.0);
  const double coarse = factorization_residual(evolve_full(gens, sig, 8e-3),
                                               evolve_factored(d, sig, 8e-3));
  const double fine = factorization_residual(evolve_full(gens, sig, 4e-3),
                                             evolve_factored(d, sig, 4e-3));
  const double factor = coarse / fine;
  c.require(coarse > 1e-12, "coarse residual at the rounding floor");
  c.require(factor > 8.0 && factor < 32.0, "halving factor " + fmt1(factor));

  return c.done("worst residual " + fmt1(worst) + " over 50 systems, halving factor " +
                fmt1(factor));
}

PropagatorTrace flow_trace(const Matrix& a, double T, double step = 1e-3)
{
  LeviDecomposition d;
  d.levi_parts = {a};
  d.radical_parts = {Matrix::Zero(a.rows(), a.cols())};
  return evolve_factored(d, SwitchingSignal({0.0}, {1}, T), step);
}

std::string entropy_oracles()
{
  Check c;

  // expanding scalar flow
  Matrix a1(1, 1);
  a1 << 1.0;
  const PropagatorTrace scalar_tr = flow_trace(a1, 4.0);
  const CompactSet seg(0.5 * Vector::Ones(1), 0.5 * Vector::Ones(1), 2001);
  const EntropyEstimate scalar_est =
      entropy_estimate(scalar_tr, seg, {0.25, 0.125}, {1, 2, 3, 4});
  c.require(scalar_est.h_estimate > 0.85 && scalar_est.h_estimate < 1.15,
            "scalar h " + fmt1(scalar_est.h_estimate));
  c.require(scalar_est.monotone_in_epsilon, "scalar table not monotone in eps");

  // switched rotations
  LeviDecomposition iso;
  iso.levi_parts = {so3_x(), so3_y()};
  iso.radical_parts = {Matrix::Zero(3, 3), Matrix::Zero(3, 3)};
  const PropagatorTrace iso_tr =
      evolve_factored(iso, random_signal(11, 1.5, 4.0, 2), 1e-3);
  const CompactSet cube(Vector::Zero(3), Vector::Constant(3, 0.5), 5);
  const EntropyEstimate iso_est = entropy_estimate(iso_tr, cube, {0.4, 0.2}, {1, 2, 3, 4});
  c.require(iso_est.h_estimate < 0.05, "isometry h " + fmt1(iso_est.h_estimate));
  c.require(iso_est.monotone_in_epsilon, "isometry table not monotone in eps");

  // contracting flow
  const PropagatorTrace contr_tr = flow_trace(mat2(-1, 0, 0, -2), 4.0);
  const CompactSet square(Vector::Zero(2), Vector::Constant(2, 0.5), 9);
  const EntropyEstimate contr_est =
      entropy_estimate(contr_tr, square, {0.3, 0.15}, {1, 2, 3, 4});
  c.require(contr_est.h_estimate == 0.0, "contracting h " + fmt1(contr_est.h_estimate));
  c.require(contr_est.monotone_in_epsilon, "contracting table not monotone in eps");

  // union of two boxes under a hyperbolic flow
  const PropagatorTrace hyp_tr = flow_trace(mat2(1, 0, 0, -1), 1.5);
  const CompactSet b1(Vector::Zero(2), Vector::Constant(2, 0.5), 41);
  Vector c2v(2);
  c2v << 2.0, 0.0;
  const CompactSet b2(c2v, Vector::Constant(2, 0.25), 41);
  const std::vector<double> eps{0.4, 0.2};
  const std::vector<double> horizons{0.5, 1.0, 1.5};
  const EntropyEstimate e1 = entropy_estimate(hyp_tr, b1, eps, horizons);
  const EntropyEstimate e2 = entropy_estimate(hyp_tr, b2, eps, horizons);
  auto grid = b1.grid_points();
  const auto g2 = b2.grid_points();
  grid.insert(grid.end(), g2.begin(), g2.end());
  const EntropyEstimate eu = entropy_estimate(hyp_tr, grid, eps, horizons);
  const double gap = std::abs(eu.h_estimate - std::max(e1.h_estimate, e2.h_estimate));
  c.require(gap < 0.1, "union-max gap " + fmt1(gap));
  c.require(e1.monotone_in_epsilon && e2.monotone_in_epsilon && eu.monotone_in_epsilon,
            "union tables not monotone in eps");

  return c.done("scalar h " + fmt1(scalar_est.h_estimate) + ", isometry h " +
                fmt1(iso_est.h_estimate) + ", contracting h 0, union gap " + fmt1(gap));
}

std::string lyapunov_exponents()
{
  Check c;

  // traceless semi-simple parts: lambda* vanishes
  Rng rng(901);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(2));
    std::vector<Matrix> mats;
    for (int p = 0; p < 2; ++p) mats.push_back(random_matrix_scaled(rng, n, 0.35));
    const LeviDecomposition d = levi_decompose(GeneratorSet(mats), 1e-9, 1e-9);
    const PropagatorTrace tr =
        evolve_factored(d, random_signal(rng.next_u64(), 1.5, 10.0, 2), 1e-3);
    worst = std::max(worst, std::abs(lyapunov_det_exponent(tr).lambda_star));
  }
  c.require(worst < 1e-8, "traceless lambda* " + fmt1(worst));

  // single-mode full traces: lambda* equals the trace
  double worst_full = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_matrix_scaled(rng, 3, 0.5);
    const PropagatorTrace tr =
        evolve_full(GeneratorSet({a}), SwitchingSignal({0.0}, {1}, 5.0), 1e-3);
    worst_full =
        std::max(worst_full, std::abs(lyapunov_det_exponent(tr).lambda_star - a.trace()));
  }
  c.require(worst_full < 1e-8, "single-mode lambda* error " + fmt1(worst_full));

  return c.done("traceless |lambda*| <= " + fmt1(worst) + ", single-mode error <= " +
                fmt1(worst_full));
}

Json certified_config(int trajectories)
{
  Json doc = Json::parse(R"({
    "modes": [[[-1,-1, 0], [ 1,-1, 0], [ 0, 0,-1]],
              [[-1, 0, 1], [ 0,-1, 0], [-1, 0,-1]]],
    "step": 0.001,
    "signal": {"seed": 11, "switch_rate": 1.5, "horizon": 10.0, "count": 2},
    "entropy": {"grid_resolution": 5, "epsilons": [0.4, 0.2],
                "horizons": [2.5, 5.0, 7.5, 10.0]}
  })");
  doc["trajectories"] = trajectories;
  return doc;
}

std::string certificate_end_to_end()
{
  Check c;

  const CommandResult good = cmd_certify(RunConfig::from_json(certified_config(200)));
  c.require(good.exit_code == 0, "certify exited " + std::to_string(good.exit_code));
  const Json& cert = good.report["results"]["certificate"];
  c.require(cert["verdict"] == "CERTIFIED_GUES",
            "verdict " + cert["verdict"].get<std::string>());
  c.require(cert["empirical"]["decaying"] == true, "envelope not decaying");
  const double lambda = cert["empirical"]["lambda"].get<double>();
  c.require(lambda > 0.0, "fitted lambda " + fmt1(lambda));

  Json bad_doc = certified_config(200);
  bad_doc["modes"] = Json::parse(R"([[[0.5,-1, 0], [ 1, 0.5, 0], [ 0, 0, 0.5]],
                                     [[0.5, 0, 1], [ 0, 0.5, 0], [-1, 0, 0.5]]])");
  const CommandResult bad = cmd_certify(RunConfig::from_json(bad_doc));
  c.require(bad.exit_code == 0, "unstable certify exited " + std::to_string(bad.exit_code));
  c.require(bad.report["results"]["certificate"]["verdict"] == "INCONCLUSIVE",
            "positive-abscissa fixture was not INCONCLUSIVE");

  return c.done("certified fixture decays (lambda " + fmt1(lambda) +
                " over 200 signals), unstable fixture INCONCLUSIVE");
}

std::string envelope_calibration()
{
  Check c;
  const GeneratorSet gens({-Matrix::Identity(1, 1)});
  const SwitchingSignal sig({0.0}, {1}, 10.0);
  const StateTrajectory tr = state_trajectory(gens, sig, Vector::Ones(1), 1e-3);

  std::vector<std::vector<double>> norms;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> traj;
    for (const Vector& x : tr.states) traj.push_back(x.norm());
    norms.push_back(std::move(traj));
  }
  const EnvelopeFit fit = gues_fit(norms, tr.times, 0.5);
  c.require(std::abs(fit.lambda - 1.0) < 0.02, "lambda " + fmt1(fit.lambda));
  c.require(std::abs(fit.big_m - 1.0) < 0.02, "M " + fmt1(fit.big_m));
  c.require(fit.decaying, "not decaying");
  return c.done("M " + fmt1(fit.big_m) + ", lambda " + fmt1(fit.lambda));
}

std::string determinism()
{
  Check c;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "liestab_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);

  const fs::path cfg_path = base / "config.json";
  {
    std::ofstream out(cfg_path);
    Json doc = certified_config(20);
    doc["outputs"] = (base / "out1").string();
    out << doc.dump(2) << "\n";
  }

  const std::string cli = LIESTAB_CLI_PATH;
  const std::string cmd1 = cli + " certify --config " + cfg_path.string() + " --out " +
                           (base / "out1").string();
  const std::string cmd2 = cli + " certify --config " + cfg_path.string() + " --out " +
                           (base / "out2").string();
  c.require(std::system(cmd1.c_str()) == 0, "first CLI run failed");
  c.require(std::system(cmd2.c_str()) == 0, "second CLI run failed");

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string r1 = slurp(base / "out1" / "report.json");
  std::string r2 = slurp(base / "out2" / "report.json");
  // the echoed output directory is the single allowed difference
  const std::string o1 = (base / "out1").string();
  const std::string o2 = (base / "out2").string();
  std::size_t pos;
  while ((pos = r1.find(o1)) != std::string::npos) r1.replace(pos, o1.size(), "OUT");
  while ((pos = r2.find(o2)) != std::string::npos) r2.replace(pos, o2.size(), "OUT");
  c.require(!r1.empty(), "empty report");
  c.require(r1 == r2, "reports differ between identically seeded runs");

  fs::remove_all(base);
  return c.done("byte-identical certify reports for a fixed seed");
}

} // namespace

int main()
{
  run_criterion(1, "algebra suite", 10.0, algebra_suite);
  run_criterion(2, "factored evolution residual", 60.0, lemma_factorization);
  run_criterion(3, "entropy oracles", 120.0, entropy_oracles);
  run_criterion(4, "determinant lyapunov exponents", 60.0, lyapunov_exponents);
  run_criterion(5, "certificate end to end", 120.0, certificate_end_to_end);
  run_criterion(6, "envelope fit calibration", 30.0, envelope_calibration);
  run_criterion(7, "report determinism", 60.0, determinism);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
