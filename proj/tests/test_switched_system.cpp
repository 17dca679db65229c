#include <doctest.h>

#include "fixtures.hpp"

#include <liestab/switched_system.hpp>

#include <cmath>

using namespace liestab;
using namespace fixtures;

namespace {

SwitchingSignal constant_signal(double T) { return SwitchingSignal({0.0}, {1}, T); }

// sigma'(t) = sigma(s + t) on [0, T - s]
SwitchingSignal shifted_signal(const SwitchingSignal& sig, double s)
{
  std::vector<double> bps{0.0};
  std::vector<int> modes{sig.mode_at(s)};
  for (std::size_t i = 0; i < sig.breakpoints.size(); ++i) {
    if (sig.breakpoints[i] > s) {
      bps.push_back(sig.breakpoints[i] - s);
      modes.push_back(sig.mode_indices[i]);
    }
  }
  return SwitchingSignal(std::move(bps), std::move(modes), sig.horizon - s);
}

LeviDecomposition parts_only_decomp(std::vector<Matrix> levi_parts,
                                    std::vector<Matrix> radical_parts)
{
  LeviDecomposition d;
  d.levi_parts = std::move(levi_parts);
  d.radical_parts = std::move(radical_parts);
  return d;
}

LeviDecomposition gl2_decomposition(std::vector<Matrix> modes)
{
  return levi_decompose(GeneratorSet(std::move(modes)), 1e-9, 1e-9);
}

} // namespace

TEST_CASE("signal validation")
{
  CHECK_THROWS_AS(SwitchingSignal({0.5}, {1}, 1.0), InputError);  // must start at 0
  CHECK_THROWS_AS(SwitchingSignal({0.0, 0.0}, {1, 2}, 1.0), InputError);
  CHECK_THROWS_AS(SwitchingSignal({0.0, 2.0}, {1, 2}, 1.0), InputError);
  CHECK_THROWS_AS(SwitchingSignal({0.0}, {0}, 1.0), InputError);  // 1-based modes
  const SwitchingSignal sig({0.0, 0.4}, {2, 1}, 1.0);
  CHECK(sig.mode_at(0.0) == 2);
  CHECK(sig.mode_at(0.39) == 2);
  CHECK(sig.mode_at(0.4) == 1);
  CHECK(sig.mode_at(1.0) == 1);
}

TEST_CASE("random signal with zero rate is constant")
{
  const SwitchingSignal sig = random_signal(7, 0.0, 5.0, 3);
  CHECK(sig.interval_count() == 1);
  CHECK(sig.horizon == 5.0);
}

TEST_CASE("random signal is deterministic in the seed")
{
  const SwitchingSignal a = random_signal(7, 2.0, 10.0, 2);
  const SwitchingSignal b = random_signal(7, 2.0, 10.0, 2);
  CHECK(a.breakpoints == b.breakpoints);
  CHECK(a.mode_indices == b.mode_indices);
  const SwitchingSignal c = random_signal(8, 2.0, 10.0, 2);
  CHECK(a.breakpoints != c.breakpoints);
}

TEST_CASE("random signal dwell statistics")
{
  // switch count ~ Poisson(rate * T); the mean over 100 seeds must sit
  // within +-50% of rate * T = 20
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    total += static_cast<double>(random_signal(seed, 2.0, 10.0, 2).interval_count() - 1);
  const double mean = total / 100.0;
  CHECK(mean > 10.0);
  CHECK(mean < 30.0);
}

TEST_CASE("evolve_full of the zero matrix is the identity")
{
  const GeneratorSet gens({Matrix::Zero(2, 2)});
  const PropagatorTrace tr = evolve_full(gens, constant_signal(1.0), 1e-3);
  CHECK((tr.phi.front() - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK((tr.phi.back() - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == 1.0);
}

TEST_CASE("evolve_full matches the diagonal exponential")
{
  const GeneratorSet gens({mat2(-1, 0, 0, -2)});
  const PropagatorTrace tr = evolve_full(gens, constant_signal(1.0), 1e-3);
  const Matrix expected = mat2(std::exp(-1.0), 0, 0, std::exp(-2.0));
  CHECK((tr.phi.back() - expected).norm() < 1e-8);
}

TEST_CASE("evolve_full across a switch matches the product of exponentials")
{
  const GeneratorSet gens({sl2_e(), sl2_f()});
  const SwitchingSignal sig({0.0, 0.5}, {1, 2}, 1.0);
  const PropagatorTrace tr = evolve_full(gens, sig, 1e-3);
  Matrix expected(2, 2);
  expected << 1.0, 0.5, 0.5, 1.25;
  CHECK((tr.phi.back() - expected).norm() < 1e-8);

  // every breakpoint is a grid sample
  CHECK_NOTHROW(tr.index_of(0.5));
}

TEST_CASE("breakpoints off the uniform grid are sampled exactly")
{
  const GeneratorSet gens({sl2_e(), sl2_f()});
  const SwitchingSignal sig({0.0, 1.0 / 3.0}, {1, 2}, 1.0);
  const PropagatorTrace tr = evolve_full(gens, sig, 1e-3);
  CHECK_NOTHROW(tr.index_of(1.0 / 3.0));
}

TEST_CASE("coarse steps are rejected")
{
  Matrix fast(2, 2);
  fast << 0, 5, -5, 0;
  const GeneratorSet gens({fast});
  CHECK_THROWS_AS(evolve_full(gens, constant_signal(2.0), 0.5), StepTooCoarse);
}

TEST_CASE("state trajectories")
{
  const GeneratorSet scalar({-Matrix::Identity(1, 1)});
  const StateTrajectory zero =
      state_trajectory(scalar, constant_signal(1.0), Vector::Zero(1), 1e-3);
  for (const Vector& x : zero.states) CHECK(x.norm() == 0.0);

  const StateTrajectory tr =
      state_trajectory(scalar, constant_signal(1.0), Vector::Ones(1), 1e-3);
  CHECK(tr.states.back()(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));

  const GeneratorSet nil({sl2_e(), sl2_f()});
  const SwitchingSignal sig({0.0, 0.5}, {1, 2}, 1.0);
  Vector x0(2);
  x0 << 1, 0;
  const StateTrajectory tn = state_trajectory(nil, sig, x0, 1e-3);
  CHECK(tn.states.back()(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(tn.states.back()(1) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("factored propagation of a commuting split")
{
  // diag(2,0) splits into I (radical) + diag(1,-1) (semi-simple); the
  // conjugated equation collapses and both factors have closed forms
  const LeviDecomposition d = gl2_decomposition({mat2(2, 0, 0, 0), sl2_e(), sl2_f()});
  REQUIRE((d.radical_parts[0] - Matrix::Identity(2, 2)).norm() < 1e-9);
  REQUIRE((d.levi_parts[0] - sl2_h()).norm() < 1e-9);

  const PropagatorTrace tr = evolve_factored(d, constant_signal(1.0), 1e-3);
  const double e1 = std::exp(1.0);
  CHECK((tr.phi_h.back() - mat2(e1, 0, 0, 1.0 / e1)).norm() < 1e-8);
  CHECK((tr.phi_m.back() - e1 * Matrix::Identity(2, 2)).norm() < 1e-8);
  CHECK((tr.phi_h.back() * tr.phi_m.back() - mat2(e1 * e1, 0, 0, 1.0)).norm() < 1e-7);
}

TEST_CASE("zero radical part freezes the radical factor")
{
  const LeviDecomposition d = parts_only_decomp({so3_x()}, {Matrix::Zero(3, 3)});
  const PropagatorTrace tr = evolve_factored(d, constant_signal(2.0), 1e-3);
  for (const Matrix& m : tr.phi_m) CHECK((m - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("zero semi-simple part reduces to the full system")
{
  const Matrix a = mat2(-0.3, 0.2, 0.1, -0.5);
  const LeviDecomposition d = parts_only_decomp({Matrix::Zero(2, 2)}, {a});
  const PropagatorTrace tr = evolve_factored(d, constant_signal(1.5), 1e-3);
  for (const Matrix& m : tr.phi_h) CHECK((m - Matrix::Identity(2, 2)).norm() < 1e-12);

  const PropagatorTrace full = evolve_full(GeneratorSet({a}), constant_signal(1.5), 1e-3);
  CHECK((tr.phi_m.back() - full.phi.back()).norm() < 1e-9);
}

TEST_CASE("factorization residual on closed forms")
{
  const LeviDecomposition d = gl2_decomposition({mat2(2, 0, 0, 0), sl2_e(), sl2_f()});
  const GeneratorSet gens({mat2(2, 0, 0, 0), sl2_e(), sl2_f()});
  const PropagatorTrace full = evolve_full(gens, constant_signal(1.0), 1e-3);
  const PropagatorTrace fact = evolve_factored(d, constant_signal(1.0), 1e-3);
  CHECK(factorization_residual(full, fact) < 1e-8);
}

TEST_CASE("factorization residual on a random three-mode system")
{
  Rng rng(71);
  std::vector<Matrix> modes;
  for (int p = 0; p < 3; ++p) modes.push_back(random_matrix_scaled(rng, 2, 0.35));
  const GeneratorSet gens(modes);
  const LeviDecomposition d = levi_decompose(gens, 1e-9, 1e-9);
  const SwitchingSignal sig = random_signal(5, 1.5, 10.0, 3);

  const PropagatorTrace full = evolve_full(gens, sig, 1e-3);
  const PropagatorTrace fact = evolve_factored(d, sig, 1e-3);
  CHECK(factorization_residual(full, fact) < 1e-5);
}

TEST_CASE("grid mismatch is detected")
{
  const GeneratorSet gens({mat2(-1, 0, 0, -2)});
  const PropagatorTrace a = evolve_full(gens, constant_signal(1.0), 1e-3);
  const PropagatorTrace b = evolve_full(gens, constant_signal(1.0), 1e-3);
  const LeviDecomposition d = parts_only_decomp({Matrix::Zero(2, 2)}, {mat2(-1, 0, 0, -2)});
  const PropagatorTrace fb = evolve_factored(d, constant_signal(1.0), 2e-3);
  CHECK_THROWS_AS(factorization_residual(a, fb), GridMismatch);
  CHECK_THROWS_AS(factorization_residual(a, b), InputError);  // b has no factored channel
}

TEST_CASE("cocycle property of the full propagator")
{
  Rng rng(41);
  std::vector<Matrix> modes{random_matrix_scaled(rng, 3, 0.4),
                            random_matrix_scaled(rng, 3, 0.4)};
  const GeneratorSet gens(modes);
  const SwitchingSignal sig = random_signal(13, 1.0, 10.0, 2);
  const PropagatorTrace tr = evolve_full(gens, sig, 1e-3);

  const double s = 4.0;
  const PropagatorTrace tail = evolve_full(gens, shifted_signal(sig, s), 1e-3);
  const Matrix recombined = tail.phi.back() * tr.phi[tr.index_of(s)];
  CHECK((recombined - tr.phi.back()).norm() < 1e-6);
}

TEST_CASE("log-determinant channel agrees with direct determinants")
{
  Rng rng(43);
  std::vector<Matrix> modes{random_matrix_scaled(rng, 2, 0.5),
                            random_matrix_scaled(rng, 2, 0.5)};
  const LeviDecomposition d = levi_decompose(GeneratorSet(modes), 1e-9, 1e-9);
  const SwitchingSignal sig = random_signal(3, 2.0, 8.0, 2);
  const PropagatorTrace tr = evolve_factored(d, sig, 1e-3);

  for (std::size_t k = 0; k < tr.times.size(); k += 1000) {
    const double direct = std::log(std::abs(tr.phi_h[k].determinant()));
    CHECK(std::abs(tr.logdet_h[k] - direct) < 1e-6);
  }
  // semi-simple parts are traceless, so the factor preserves volume
  for (std::size_t k = 0; k < tr.times.size(); k += 500)
    CHECK(std::abs(tr.phi_h[k].determinant() - 1.0) < 1e-6);
}

TEST_CASE("factorization residual shrinks at fourth order")
{
  Rng rng(47);
  std::vector<Matrix> modes{random_matrix_scaled(rng, 2, 1.2),
                            random_matrix_scaled(rng, 2, 1.2)};
  const GeneratorSet gens(modes);
  const LeviDecomposition d = levi_decompose(gens, 1e-9, 1e-9);
  const SwitchingSignal sig({0.0, 0.7, 1.3}, {1, 2, 1}, 2.0);

  auto residual_at = [&](double step) {
    return factorization_residual(evolve_full(gens, sig, step),
                                  evolve_factored(d, sig, step));
  };
  const double coarse = residual_at(8e-3);
  const double fine = residual_at(4e-3);
  CHECK(coarse > 1e-12);  // above the rounding floor
  const double factor = coarse / fine;
  CHECK(factor > 8.0);
  CHECK(factor < 32.0);
}

TEST_CASE("overflowing propagators are rescaled, not lost")
{
  Matrix a(1, 1);
  a << 3.0;
  const GeneratorSet gens({a});
  const PropagatorTrace tr = evolve_full(gens, constant_signal(130.0), 1e-2);
  CHECK(tr.phi.back().allFinite());
  CHECK(tr.scale_log_phi.back() > 0.0);
  // log phi(T) + scale = 3 T, up to the integrator's truncation error
  const double logval = std::log(tr.phi.back()(0, 0)) + tr.scale_log_phi.back();
  CHECK(logval == doctest::Approx(390.0).epsilon(1e-7));
  CHECK(tr.logdet_h.back() == doctest::Approx(390.0).epsilon(1e-12));
}

TEST_CASE("losing invertibility raises IllConditioned")
{
  const LeviDecomposition d = parts_only_decomp({mat2(2, 0, 0, -2)}, {Matrix::Zero(2, 2)});
  CHECK_THROWS_AS(evolve_factored(d, constant_signal(8.0), 1e-3), IllConditioned);
}

TEST_CASE("signals referencing missing modes are rejected")
{
  const GeneratorSet gens({sl2_e()});
  const SwitchingSignal sig({0.0, 0.5}, {1, 2}, 1.0);
  CHECK_THROWS_AS(evolve_full(gens, sig, 1e-3), InputError);
}
