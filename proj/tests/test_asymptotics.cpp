#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "sfg/asymptotics.hpp"
#include "sfg/errors.hpp"
#include "support/fixtures.hpp"

using namespace sfg;

namespace {

struct Pieces {
  RiccatiSolution full;
  ReducedSolution red;
  BoundaryLayerSolution bl;
};

Pieces make_pieces(const GameSpec& spec, double eps) {
  Pieces p{solve_full(spec, eps), solve_reduced(spec), {}};
  const double delta = select_delta(spec, p.red.p22bar);
  const double tau_max = default_tau_max(eps, spec.T, p.red.gamma, delta);
  p.bl = solve_boundary_layer(spec, p.red, delta, tau_max);
  return p;
}

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("zero game has zero errors everywhere") {
  const GameSpec spec = fixtures::zero_cost();
  const Pieces p = make_pieces(spec, 0.1);
  const TikhonovReport r = tikhonov_errors(p.full, p.red, p.bl, spec);
  CHECK(r.err_P11 == 0.0);
  CHECK(r.err_P12 == 0.0);
  CHECK(r.err_P22 == 0.0);
  CHECK(r.err_assembled == 0.0);
  const auto gaps = l2_feedback_gap(p.full, p.red, spec);
  for (double g : gaps) CHECK(g == 0.0);
  const auto c1 = corollary44_integrals(p.full, p.red, spec, 1);
  CHECK(c1.first == 0.0);
  CHECK(c1.second == 0.0);
}

TEST_CASE("sup errors contract linearly in the time-scale ratio") {
  const GameSpec spec = fixtures::s1();
  const Pieces coarse = make_pieces(spec, 1e-2);
  const Pieces fine = make_pieces(spec, 1e-3);
  const TikhonovReport rc = tikhonov_errors(coarse.full, coarse.red,
                                            coarse.bl, spec);
  const TikhonovReport rf = tikhonov_errors(fine.full, fine.red, fine.bl, spec);
  for (auto pick : {&TikhonovReport::err_P11, &TikhonovReport::err_P12,
                    &TikhonovReport::err_P22, &TikhonovReport::err_assembled}) {
    const double ratio = rc.*pick / rf.*pick;
    CHECK(ratio > 5.0);   // a tenfold eps reduction should show up
    CHECK(ratio < 20.0);  // and not much more than first order
  }
}

TEST_CASE("assembled error is dominated by the scaled fast block") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.05;
  const Pieces p = make_pieces(spec, eps);
  const TikhonovReport r = tikhonov_errors(p.full, p.red, p.bl, spec);
  double sup22 = 0.0;
  for (double t : p.full.grid) sup22 = std::max(sup22, p.full.p22_at(t).norm());
  CHECK(r.err_assembled >= eps * sup22 * (1.0 - 1e-9));
}

TEST_CASE("sup sampling is stable under refinement") {
  const GameSpec spec = fixtures::s1();
  const Pieces p = make_pieces(spec, 0.03);
  const TikhonovReport a = tikhonov_errors(p.full, p.red, p.bl, spec, 200);
  const TikhonovReport b = tikhonov_errors(p.full, p.red, p.bl, spec, 399);
  CHECK(a.err_P11 == doctest::Approx(b.err_P11).epsilon(1e-3));
  CHECK(a.err_P12 == doctest::Approx(b.err_P12).epsilon(1e-3));
  CHECK(a.err_P22 == doctest::Approx(b.err_P22).epsilon(1e-3));
  CHECK(a.err_assembled == doctest::Approx(b.err_assembled).epsilon(1e-3));
}

TEST_CASE("a layer that stops short of the stretched horizon is rejected") {
  const GameSpec spec = fixtures::s1();
  const double eps = 0.01;
  const RiccatiSolution full = solve_full(spec, eps);
  const ReducedSolution red = solve_reduced(spec);
  const double delta = select_delta(spec, red.p22bar);
  // tau only reaches 50 < T/eps = 200.
  const BoundaryLayerSolution bl = solve_boundary_layer(spec, red, delta, 50.0);
  CHECK_THROWS_AS(tikhonov_errors(full, red, bl, spec), GridMismatchError);
}

TEST_CASE("all four gain gaps contract when the fast input is coupled") {
  const GameSpec spec = fixtures::layer_coupled();
  const Pieces coarse = make_pieces(spec, 1e-2);
  const Pieces fine = make_pieces(spec, 1e-3);
  const auto gc = l2_feedback_gap(coarse.full, coarse.red, spec);
  const auto gf = l2_feedback_gap(fine.full, fine.red, spec);
  for (int i = 0; i < 4; ++i) {
    const double ratio = gf[i] / gc[i];
    // The dominant terminal-layer terms are first order, so a tenfold eps
    // drop divides the squared integrals by ~10; the window up to 1/500
    // tolerates the second-order body remnant.
    CHECK(ratio > 0.0);
    CHECK(ratio < 0.2);
    CHECK(ratio > 0.002);
  }
}

TEST_CASE("uncoupled fast input turns one gap into a pure eps^2 term") {
  // With B21 = 0 the (1,2) gain gap is exactly eps^2 |B11' P12|^2 integrated.
  const GameSpec spec = fixtures::s1();
  const double eps = 0.05;
  const Pieces p = make_pieces(spec, eps);
  const auto gaps = l2_feedback_gap(p.full, p.red, spec);
  // Independent trapezoid of eps^2 (B11' P12)^2 on the merged grid.
  std::vector<double> ts = p.full.grid;
  for (double t : p.red.p11bar.grid) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const auto sq = [&](double t) {
      const double v = eps * p.full.p12_at(t)(0, 0);  // B11 = 1
      return v * v;
    };
    acc += 0.5 * (sq(ts[i]) + sq(ts[i + 1])) * (ts[i + 1] - ts[i]);
  }
  CHECK(gaps[1] == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("corollary integrals: zero case, contraction, and Holder ordering") {
  const GameSpec zero = fixtures::zero_cost();
  const Pieces pz = make_pieces(zero, 0.1);
  const auto z1 = corollary44_integrals(pz.full, pz.red, zero, 1);
  CHECK(z1.first == 0.0);
  CHECK(z1.second == 0.0);

  const GameSpec spec = fixtures::s1();
  const Pieces coarse = make_pieces(spec, 1e-1);
  const Pieces fine = make_pieces(spec, 1e-2);
  const auto c1 = corollary44_integrals(coarse.full, coarse.red, spec, 1);
  const auto f1 = corollary44_integrals(fine.full, fine.red, spec, 1);
  CHECK(f1.first / c1.first < 0.3);
  CHECK(f1.second / c1.second < 0.3);

  // integral |D|^2 <= sup|D| * integral |D| for either block.
  const auto c2 = corollary44_integrals(coarse.full, coarse.red, spec, 2);
  double sup12 = 0.0, sup22 = 0.0;
  for (double t : coarse.full.grid) {
    sup12 = std::max(
        sup12, (coarse.full.p12_at(t) - coarse.red.p12_at(t)).norm());
    sup22 = std::max(
        sup22, (coarse.full.p22_at(t) - coarse.red.p22bar).norm());
  }
  CHECK(c2.first <= sup12 * c1.first * (1.0 + 1e-6));
  CHECK(c2.second <= sup22 * c1.second * (1.0 + 1e-6));

  CHECK_THROWS_AS(corollary44_integrals(coarse.full, coarse.red, spec, 0),
                  SpecError);
}

TEST_CASE("rate fit recovers exact power laws") {
  std::vector<std::pair<double, double>> lin, quad;
  for (double e : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
    lin.push_back({e, 3.0 * e});
    quad.push_back({e, 5.0 * e * e});
  }
  const RateFit fl = fit_rate(lin);
  CHECK(fl.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fl.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(fl.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  const RateFit fq = fit_rate(quad);
  CHECK(fq.slope == doctest::Approx(2.0).epsilon(1e-12));

  // Scaling every error by a constant moves the intercept, not the slope.
  std::vector<std::pair<double, double>> scaled = lin;
  for (auto& p : scaled) p.second *= 7.0;
  CHECK(fit_rate(scaled).slope == doctest::Approx(fl.slope).epsilon(1e-12));
}

TEST_CASE("rate fit excludes dead points and needs three live ones") {
  std::vector<std::pair<double, double>> sweep = {
      {1e-1, 1e-2}, {3e-2, 3e-3}, {1e-2, 0.0}, {3e-3, 3e-4}};
  const RateFit f = fit_rate(sweep);
  REQUIRE(f.excluded_eps.size() == 1);
  CHECK(f.excluded_eps[0] == 1e-2);
  CHECK(f.eps_values.size() == 3);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(fit_rate({{1e-1, 1.0}, {1e-2, 0.1}}),
                  InsufficientPointsError);
  CHECK_THROWS_AS(fit_rate({{1e-1, 0.0}, {3e-2, 0.0}, {1e-2, 1.0}}),
                  InsufficientPointsError);
}

TEST_CASE("sweep runs the default ladder in decreasing order") {
  const GameSpec spec = fixtures::s1();
  SweepOptions opt;
  opt.eps_list = {1e-2, 1e-1, 3e-2};  // deliberately unsorted
  const SweepResult sw = run_sweep(spec, opt);
  REQUIRE(sw.points.size() == 3);
  CHECK(sw.points[0].report.eps == 1e-1);
  CHECK(sw.points[1].report.eps == 3e-2);
  CHECK(sw.points[2].report.eps == 1e-2);
  for (const SweepPoint& p : sw.points) {
    CHECK(p.report.err_P11 > 0.0);
    CHECK(p.value_gap > 0.0);
    CHECK(p.cor44_j1.first > 0.0);
    CHECK(p.cor44_j2.second > 0.0);
  }
  // Errors must shrink along the ladder.
  CHECK(sw.points[2].report.err_P22 < sw.points[0].report.err_P22);
}

TEST_CASE("sweep rejects out-of-range ratios") {
  SweepOptions opt;
  opt.eps_list = {1e-1, 3e-2, 2.0};
  CHECK_THROWS_AS(run_sweep(fixtures::s1(), opt), SpecError);
}

TEST_CASE("sweep CSV carries the pinned header") {
  const GameSpec spec = fixtures::s1();
  SweepOptions opt;
  opt.eps_list = {1e-1, 3e-2, 1e-2};
  const SweepResult sw = run_sweep(spec, opt);
  std::ostringstream os;
  write_sweep_csv(sw, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header ==
        "eps,err_P11,err_P12,err_P22,err_assembled,gap_11,gap_12,gap_21,"
        "gap_22");
  int rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("slope summary covers every error series") {
  const GameSpec spec = fixtures::s1();
  SweepOptions opt;
  opt.eps_list = {1e-1, 3e-2, 1e-2};
  const SweepResult sw = run_sweep(spec, opt);
  const Json j = sweep_slopes_json(sw);
  REQUIRE(j.contains("eps"));
  REQUIRE(j.contains("slopes"));
  for (const char* key :
       {"err_P11", "err_P12", "err_P22", "err_assembled", "gap_11", "gap_12",
        "gap_21", "gap_22", "cor44_P12_j1", "cor44_P22_j1", "cor44_P12_j2",
        "cor44_P22_j2", "value_gap"})
    CHECK(j["slopes"].contains(key));
  CHECK(j["slopes"]["err_P11"].contains("slope"));
  CHECK(j["eps"].size() == 3);
}

TEST_CASE("zero-error series report the exclusion instead of a slope") {
  const GameSpec spec = fixtures::zero_cost();
  SweepOptions opt;
  opt.eps_list = {1e-1, 3e-2, 1e-2};
  const SweepResult sw = run_sweep(spec, opt);
  const Json j = sweep_slopes_json(sw);
  CHECK(j["slopes"]["err_P11"].contains("error"));
}

}  // TEST_SUITE
