#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sfg/errors.hpp"
#include "sfg/game.hpp"
#include "support/fixtures.hpp"

using namespace sfg;

namespace {

const double kSqrt2 = std::sqrt(2.0);

Vector v1(double a) {
  Vector v(1);
  v << a;
  return v;
}

}  // namespace

TEST_SUITE("game") {

TEST_CASE("zero cost game has identically zero gains") {
  const GameSpec spec = fixtures::zero_cost();
  const RiccatiSolution full = solve_full(spec, 0.5);
  const FeedbackLaw exact = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  const ReducedSolution red = solve_reduced(spec);
  const FeedbackLaw approx =
      make_feedback(FeedbackLaw::Kind::approximate, red, spec);
  for (double t : {0.0, 0.9, 2.0}) {
    for (const FeedbackLaw* law : {&exact, &approx}) {
      const GainSet g = law->at(t);
      CHECK(g.F11.norm() == 0.0);
      CHECK(g.F12.norm() == 0.0);
      CHECK(g.F21.norm() == 0.0);
      CHECK(g.F22.norm() == 0.0);
    }
  }
}

TEST_CASE("approximate law has constant fast gains") {
  const GameSpec spec = fixtures::s1();
  const ReducedSolution red = solve_reduced(spec);
  const FeedbackLaw law =
      make_feedback(FeedbackLaw::Kind::approximate, red, spec);
  for (double t : {0.0, 0.6, 1.4, 2.0}) {
    const GainSet g = law.at(t);
    CHECK(g.F12(0, 0) == 0.0);  // B21 = 0
    CHECK(g.F22(0, 0) == doctest::Approx(-(kSqrt2 - 1.0)).epsilon(1e-12));
    // Slow gains follow the reduced blocks.
    const double p11 = red.p11_at(t)(0, 0);
    const double p12 = red.p12_at(t)(0, 0);
    CHECK(g.F11(0, 0) == doctest::Approx(p11).epsilon(1e-12));
    CHECK(g.F21(0, 0) == doctest::Approx(-(0.5 * p11 + p12)).epsilon(1e-12));
  }
}

TEST_CASE("exact law reproduces the gain formulas") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.3;
  const RiccatiSolution full = solve_full(spec, eps);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);

  const GainSet gT = law.at(spec.T);  // all blocks vanish at the horizon
  CHECK(gT.F11.norm() == 0.0);
  CHECK(gT.F12.norm() == 0.0);
  CHECK(gT.F21.norm() == 0.0);
  CHECK(gT.F22.norm() == 0.0);

  const double t = 0.5;
  const auto b = full.at(t);
  const GainSet g = law.at(t);
  CHECK(g.F11(0, 0) == doctest::Approx(b.P11(0, 0)).epsilon(1e-14));
  CHECK(g.F12(0, 0) == doctest::Approx(eps * b.P12(0, 0)).epsilon(1e-14));
  CHECK(g.F21(0, 0) ==
        doctest::Approx(-(0.5 * b.P11(0, 0) + b.P12(0, 0))).epsilon(1e-14));
  CHECK(g.F22(0, 0) ==
        doctest::Approx(-(eps * 0.5 * b.P12(0, 0) + b.P22(0, 0)))
            .epsilon(1e-14));
}

TEST_CASE("law kind must match the solution type") {
  const GameSpec spec = fixtures::s1();
  const RiccatiSolution full = solve_full(spec, 0.5);
  const ReducedSolution red = solve_reduced(spec);
  CHECK_THROWS_AS(make_feedback(FeedbackLaw::Kind::approximate, full, spec),
                  KindMismatchError);
  CHECK_THROWS_AS(make_feedback(FeedbackLaw::Kind::exact, red, spec),
                  KindMismatchError);
}

TEST_CASE("gain perturbation adds exactly on the chosen row") {
  const GameSpec spec = fixtures::s1();
  const RiccatiSolution full = solve_full(spec, 0.5);
  const FeedbackLaw base = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  Matrix d(1, 2);
  d << 0.25, -0.5;
  const FeedbackLaw p2 = perturb_feedback(base, 2, d);
  const FeedbackLaw p1 = perturb_feedback(base, 1, d);
  for (double t : {0.0, 1.1}) {
    const GainSet gb = base.at(t);
    CHECK(p2.at(t).F21(0, 0) == gb.F21(0, 0) + 0.25);
    CHECK(p2.at(t).F22(0, 0) == gb.F22(0, 0) + -0.5);
    CHECK(p2.at(t).F11(0, 0) == gb.F11(0, 0));
    CHECK(p1.at(t).F11(0, 0) == gb.F11(0, 0) + 0.25);
    CHECK(p1.at(t).F21(0, 0) == gb.F21(0, 0));
  }
  CHECK_THROWS_AS(perturb_feedback(base, 3, d), SpecError);
  CHECK_THROWS_AS(perturb_feedback(base, 2, Matrix::Zero(1, 3)), SpecError);
}

TEST_CASE("law queries clamp to the horizon") {
  const GameSpec spec = fixtures::s1();
  const RiccatiSolution full = solve_full(spec, 0.5);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  CHECK(law.at(-3.0).F11(0, 0) == law.at(0.0).F11(0, 0));
  CHECK(law.at(spec.T + 4.0).F22(0, 0) == law.at(spec.T).F22(0, 0));
}

TEST_CASE("simulation guards: step budget, shapes, horizon") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.1;
  const RiccatiSolution full = solve_full(spec, eps);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  CHECK_THROWS_AS(simulate_game(spec, eps, law, v1(1), v1(1), eps / 5.0, 4, 1),
                  StepTooLargeError);
  Vector too_long(2);
  too_long << 1.0, 1.0;
  CHECK_THROWS_AS(
      simulate_game(spec, eps, law, too_long, v1(1), 1e-3, 4, 1), SpecError);
  // Law built for T = 2 cannot drive a horizon-0.01 simulation.
  const GameSpec other = fixtures::relaxation(1e-3);
  CHECK_THROWS_AS(simulate_game(other, eps, law, v1(1), v1(1), 1e-3, 4, 1),
                  GridMismatchError);
}

TEST_CASE("zero noise and zero start cost exactly nothing") {
  const GameSpec spec = fixtures::with_zero_noise(fixtures::zero_cost());
  const RiccatiSolution full = solve_full(spec, 0.5);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  const SimBatch b = simulate_game(spec, 0.5, law, v1(0), v1(0), 0.01, 8, 7);
  for (double c : b.costs) CHECK(c == 0.0);
  for (const Vector& x : b.terminals) CHECK(x.norm() == 0.0);
}

TEST_CASE("deterministic dynamics ignore the seed bitwise") {
  const GameSpec spec = fixtures::with_zero_noise(fixtures::s1());
  const double eps = 0.2;
  const RiccatiSolution full = solve_full(spec, eps);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  const SimBatch a = simulate_game(spec, eps, law, v1(1), v1(-1), 0.01, 3, 11);
  const SimBatch b = simulate_game(spec, eps, law, v1(1), v1(-1), 0.01, 3, 99);
  for (long p = 0; p < 3; ++p) {
    CHECK(a.costs[p] == b.costs[p]);
    CHECK(a.terminals[p] == b.terminals[p]);
  }
}

TEST_CASE("noise-free cost converges first order to the quadratic value") {
  const GameSpec noiseless = fixtures::with_zero_noise(fixtures::s1());
  const double eps = 0.1;
  const RiccatiSolution full = solve_full(noiseless, eps);
  const FeedbackLaw law =
      make_feedback(FeedbackLaw::Kind::exact, full, noiseless);
  // With sigma = 0 the closed form collapses to the quadratic form in x0.
  const Vector x1 = v1(1), x2 = v1(1);
  const double value = closed_form_value(full, noiseless, x1, x2);
  const auto b0 = full.at(0.0);
  const double quad = 0.5 * (b0.P11(0, 0) + 2.0 * eps * b0.P12(0, 0) +
                             eps * b0.P22(0, 0));
  CHECK(value == doctest::Approx(quad).epsilon(1e-12));

  const auto run = [&](double h) {
    return simulate_game(noiseless, eps, law, x1, x2, h, 1, 0).costs[0];
  };
  const double err_coarse = std::abs(run(1e-3) - value);
  const double err_fine = std::abs(run(5e-4) - value);
  CHECK(err_coarse > 0.0);
  const double ratio = err_coarse / err_fine;
  CHECK(ratio > 1.5);
  CHECK(ratio < 3.0);
}

TEST_CASE("zero-radius perturbation reproduces the batch bitwise") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.1;
  const RiccatiSolution full = solve_full(spec, eps);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  const FeedbackLaw same = perturb_feedback(law, 2, Matrix::Zero(1, 2));
  const SimBatch a = simulate_game(spec, eps, law, v1(1), v1(1), 1e-3, 5, 42);
  const SimBatch b = simulate_game(spec, eps, same, v1(1), v1(1), 1e-3, 5, 42);
  for (long p = 0; p < 5; ++p) CHECK(a.costs[p] == b.costs[p]);
}

TEST_CASE("uncontrolled fast state relaxes at the stretched rate") {
  const double eps = 1e-3;
  const GameSpec spec = fixtures::relaxation(eps);
  const RiccatiSolution full = solve_full(spec, eps);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  const double h = eps / 1000.0;
  const SimBatch b = simulate_game(spec, eps, law, v1(1), v1(1), h, 1, 0);
  const double x2_end = b.terminals[0](1);
  CHECK(x2_end == doctest::Approx(std::exp(-10.0)).epsilon(0.05));
  // The slow channel additionally absorbs the O(eps) quasi-steady response
  // to the decaying fast transient through A12.
  const double x1_end = b.terminals[0](0);
  CHECK(x1_end == doctest::Approx(std::exp(-0.01)).epsilon(5e-3));
}

TEST_CASE("second-moment probe sees the initial condition and stays finite") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.1;
  const RiccatiSolution full = solve_full(spec, eps);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  SimOptions opt;
  opt.track_moment_sup = true;
  const SimBatch b =
      simulate_game(spec, eps, law, v1(1), v1(1), 1e-3, 200, 5, opt);
  CHECK(b.moment_sup >= 1.999);  // includes |x0|^2 = 2 at the start
  CHECK(std::isfinite(b.moment_sup));
  CHECK(b.moment_sup < 100.0);
}

TEST_CASE("destabilizing gain perturbation trips the path guard") {
  const GameSpec spec = fixtures::with_zero_noise(fixtures::zero_cost());
  const RiccatiSolution full = solve_full(spec, 1.0);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  Matrix d(1, 2);
  d << 50.0, 0.0;  // u1 = 50 x1 makes the slow block explode
  const FeedbackLaw wild = perturb_feedback(law, 1, d);
  try {
    (void)simulate_game(spec, 1.0, wild, v1(1), v1(1), 0.1, 2, 0);
    FAIL("expected a path blow-up");
  } catch (const PathBlowUpError& e) {
    CHECK(e.path >= 0);
    CHECK(e.t > 0.0);
    CHECK(e.t <= spec.T);
  }
}

TEST_CASE("mean and standard error reduction") {
  CHECK(mean_stderr({2.5, 2.5, 2.5}) == std::pair<double, double>{2.5, 0.0});
  const auto [m, se] = mean_stderr({1.0, 3.0});
  CHECK(m == 2.0);
  CHECK(se == 1.0);  // sample std sqrt(2), / sqrt(2)
  const auto [m1, se1] = mean_stderr({7.0});
  CHECK(m1 == 7.0);
  CHECK(se1 == 0.0);
}

TEST_CASE("standard error shrinks like the square root of the batch") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.1;
  const RiccatiSolution full = solve_full(spec, eps);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  const SimBatch small =
      simulate_game(spec, eps, law, v1(1), v1(1), 0.01, 1000, 3);
  const SimBatch big =
      simulate_game(spec, eps, law, v1(1), v1(1), 0.01, 4000, 3);
  const double r = mc_objective(small).second / mc_objective(big).second;
  CHECK(r > 1.6);
  CHECK(r < 2.5);
}

TEST_CASE("value formulas: zero game and noise-term isolation") {
  const GameSpec zero = fixtures::zero_cost();
  const RiccatiSolution full = solve_full(zero, 0.5);
  const ReducedSolution red = solve_reduced(zero);
  CHECK(closed_form_value(full, zero, v1(1), v1(1)) == 0.0);
  CHECK(limiting_value(red, zero, v1(1), v1(1)) == 0.0);

  // The fast noise enters the limit value only through (T/2) tr(s2' P22bar s2).
  const GameSpec spec = fixtures::s1();
  const ReducedSolution rs = solve_reduced(spec);
  GameSpec quiet_fast = spec;
  quiet_fast.sigma2.setZero();
  const double diff = limiting_value(rs, spec, v1(1), v1(1)) -
                      limiting_value(rs, quiet_fast, v1(1), v1(1));
  CHECK(diff ==
        doctest::Approx(spec.T / 2.0 * (kSqrt2 - 1.0)).epsilon(1e-10));
}

TEST_CASE("saddle probe: no violations and a tight player-2 identity") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.1;
  const RiccatiSolution full = solve_full(spec, eps);
  const SaddleReport rep =
      saddle_check(spec, eps, full, v1(1), v1(1), 6, 400, 2024);
  REQUIRE(rep.records.size() == 12);
  CHECK(rep.n_violations == 0);
  const double cycle[3] = {0.1, 0.5, 1.0};
  for (int i = 0; i < 12; ++i) {
    const SaddleRecord& r = rep.records[static_cast<std::size_t>(i)];
    CHECK(r.player == (i < 6 ? 1 : 2));
    CHECK(r.rho == cycle[i % 3]);
    CHECK(r.cos_term >= 0.0);
    CHECK(r.gap_stderr > 0.0);
    if (r.player == 2)
      CHECK(std::abs(r.identity_residual) <=
            3.0 * r.identity_stderr + 0.02);
  }
}

TEST_CASE("exact-versus-approximate gap vanishes for the zero game") {
  const GameSpec spec = fixtures::zero_cost();
  const double eps = 0.1;
  const RiccatiSolution full = solve_full(spec, eps);
  const ReducedSolution red = solve_reduced(spec);
  CHECK(approx_gap(spec, eps, full, red, v1(1), v1(1), 50, 9) == 0.0);
}

TEST_CASE("fully matching auxiliary reference integrates to zero") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.1;
  const RiccatiSolution full = solve_full(spec, eps);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  SimOptions opt;
  opt.aux_reference = &law;
  opt.aux_player = 2;
  const SimBatch b = simulate_game(spec, eps, law, v1(1), v1(1), 1e-3, 4, 1, opt);
  REQUIRE(b.aux_costs.size() == 4);
  for (double a : b.aux_costs) CHECK(a == 0.0);
}

TEST_CASE("batch summary keys and per-path CSV header") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.1;
  const RiccatiSolution full = solve_full(spec, eps);
  const FeedbackLaw law = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  const SimBatch b = simulate_game(spec, eps, law, v1(1), v1(1), 0.01, 3, 17);
  const Json j = simbatch_summary_json(b);
  for (const char* key : {"mean", "stderr", "n_paths", "h", "seed"})
    CHECK(j.contains(key));
  CHECK(j["n_paths"].get<long>() == 3);
  CHECK(j["seed"].get<std::uint64_t>() == 17);

  std::ostringstream os;
  write_simbatch_csv(b, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "path,cost,terminal_0,terminal_1");
  int rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
}

}  // TEST_SUITE
