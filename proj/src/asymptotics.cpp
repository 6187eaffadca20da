#include "sfg/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sfg/errors.hpp"
#include "sfg/game.hpp"

namespace sfg {

const std::vector<double> kDefaultSweepEps = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

namespace {

void check_same_problem(const RiccatiSolution& full, const ReducedSolution& red,
                        const GameSpec& spec) {
  if (full.n1 != spec.n1 || full.n2 != spec.n2 || red.spec.n1 != spec.n1 ||
      red.spec.n2 != spec.n2)
    throw GridMismatchError("solutions disagree on state dimensions");
  const double slack = 1e-9 * std::max(1.0, std::abs(spec.T));
  if (std::abs(full.T - spec.T) > slack ||
      std::abs(red.p11bar.T - spec.T) > slack)
    throw GridMismatchError("solutions disagree on the horizon");
}

std::vector<double> merged_time_grid(const RiccatiSolution& full,
                                     const ReducedSolution& red) {
  std::vector<double> ts = full.grid;
  ts.insert(ts.end(), red.p11bar.grid.begin(), red.p11bar.grid.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

}  // namespace

TikhonovReport tikhonov_errors(const RiccatiSolution& full,
                               const ReducedSolution& red,
                               const BoundaryLayerSolution& bl,
                               const GameSpec& spec, int n_uniform) {
  check_same_problem(full, red, spec);
  if (bl.n1 != spec.n1 || bl.n2 != spec.n2)
    throw GridMismatchError("layer solution disagrees on state dimensions");
  if (n_uniform < 2) throw SpecError("tikhonov_errors: n_uniform must be >= 2");
  const double stretched_horizon = spec.T / full.eps;
  if (bl.tau_grid.back() <
      stretched_horizon * (1.0 - 1e-12) - 1e-12)
    throw GridMismatchError(
        "layer solution reaches tau = " + format_double(bl.tau_grid.back()) +
        " but the comparison needs tau = " + format_double(stretched_horizon));

  std::vector<double> ts = full.grid;
  ts.reserve(ts.size() + static_cast<std::size_t>(n_uniform));
  for (int i = 0; i < n_uniform; ++i)
    ts.push_back(spec.T * (static_cast<double>(i) /
                           static_cast<double>(n_uniform - 1)));

  TikhonovReport report;
  report.eps = full.eps;
  const double tau_top = bl.tau_grid.back();
  for (double t : ts) {
    const auto b = full.at(t);
    const Matrix p11bar = red.p11_at(t);
    const Matrix p12bar = red.p12_at(t);
    const double tau = std::min((spec.T - t) / full.eps, tau_top);
    const Matrix layer12 = bl.p12hat_at(tau);
    const Matrix layer22 = bl.p22hat_at(tau);

    report.err_P11 = std::max(report.err_P11, frobenius(b.P11 - p11bar));
    report.err_P12 =
        std::max(report.err_P12, frobenius(b.P12 - p12bar - layer12));
    report.err_P22 =
        std::max(report.err_P22, frobenius(b.P22 - red.p22bar - layer22));

    Matrix limit = Matrix::Zero(spec.n1 + spec.n2, spec.n1 + spec.n2);
    limit.topLeftCorner(spec.n1, spec.n1) = p11bar;
    report.err_assembled =
        std::max(report.err_assembled, frobenius(assemble_P(full, t) - limit));
  }
  report.l2_gaps = l2_feedback_gap(full, red, spec);
  return report;
}

std::array<double, 4> l2_feedback_gap(const RiccatiSolution& full,
                                      const ReducedSolution& red,
                                      const GameSpec& spec) {
  check_same_problem(full, red, spec);
  const FeedbackLaw exact = make_feedback(FeedbackLaw::Kind::exact, full, spec);
  const FeedbackLaw approx =
      make_feedback(FeedbackLaw::Kind::approximate, red, spec);

  const std::vector<double> ts = merged_time_grid(full, red);
  std::array<double, 4> gaps{};
  std::array<double, 4> prev{};
  auto integrand = [&](double t, std::array<double, 4>& out) {
    const GainSet ge = exact.at(t);
    const GainSet ga = approx.at(t);
    const double d11 = frobenius(ge.F11 - ga.F11);
    const double d12 = frobenius(ge.F12 - ga.F12);
    const double d21 = frobenius(ge.F21 - ga.F21);
    const double d22 = frobenius(ge.F22 - ga.F22);
    out = {d11 * d11, d12 * d12, d21 * d21, d22 * d22};
  };
  integrand(ts.front(), prev);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    std::array<double, 4> next{};
    integrand(ts[i + 1], next);
    const double w = 0.5 * (ts[i + 1] - ts[i]);
    for (int c = 0; c < 4; ++c) gaps[c] += w * (prev[c] + next[c]);
    prev = next;
  }
  return gaps;
}

std::pair<double, double> corollary44_integrals(const RiccatiSolution& full,
                                                const ReducedSolution& red,
                                                const GameSpec& spec, int j) {
  if (j < 1) throw SpecError("corollary44_integrals: j must be >= 1");
  check_same_problem(full, red, spec);
  const std::vector<double> ts = merged_time_grid(full, red);
  const double p = static_cast<double>(j);
  auto f12 = [&](double t) {
    return std::pow(frobenius(full.p12_at(t) - red.p12_at(t)), p);
  };
  auto f22 = [&](double t) {
    return std::pow(frobenius(full.p22_at(t) - red.p22bar), p);
  };
  double i12 = 0.0, i22 = 0.0;
  double prev12 = f12(ts.front()), prev22 = f22(ts.front());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double next12 = f12(ts[i + 1]), next22 = f22(ts[i + 1]);
    const double w = 0.5 * (ts[i + 1] - ts[i]);
    i12 += w * (prev12 + next12);
    i22 += w * (prev22 + next22);
    prev12 = next12;
    prev22 = next22;
  }
  return {i12, i22};
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& sweep) {
  RateFit fit;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [eps, err] : sweep) {
    if (!(eps > 0.0))
      throw SpecError("fit_rate: eps values must be positive");
    if (err > 0.0 && std::isfinite(err))
      pts.emplace_back(eps, err);
    else
      fit.excluded_eps.push_back(eps);
  }
  if (pts.size() < 3)
    throw InsufficientPointsError(
        "fit_rate needs at least 3 strictly positive error points, got " +
        std::to_string(pts.size()));
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double n = static_cast<double>(pts.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [eps, err] : pts) {
    const double x = std::log(eps), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    fit.eps_values.push_back(eps);
    fit.errors.push_back(err);
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300)
    throw InsufficientPointsError("fit_rate: eps values are all identical");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;

  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double x = std::log(pts[i].first), y = std::log(pts[i].second);
    const double r = y - (fit.slope * x + fit.intercept);
    ss_res += r * r;
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

SweepResult run_sweep(const GameSpec& spec, const SweepOptions& options) {
  std::vector<double> eps_list =
      options.eps_list.empty() ? kDefaultSweepEps : options.eps_list;
  for (double e : eps_list)
    if (!(e > 0.0 && e <= 1.0))
      throw SpecError("run_sweep: eps values must lie in (0, 1]");
  std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
  eps_list.erase(std::unique(eps_list.begin(), eps_list.end()),
                 eps_list.end());

  const ReducedSolution red = solve_reduced(spec, options.tol);
  const double delta = select_delta(spec, red.p22bar, options.delta);
  const double eps_min = eps_list.back();
  const double tau_max =
      default_tau_max(eps_min, spec.T, red.gamma, delta);
  const BoundaryLayerSolution bl =
      solve_boundary_layer(spec, red, delta, tau_max, options.tol);

  const Vector x01 = options.x01.size() > 0
                         ? options.x01
                         : Vector::Ones(spec.n1).eval();
  const Vector x02 = options.x02.size() > 0
                         ? options.x02
                         : Vector::Ones(spec.n2).eval();
  const double vbar = limiting_value(red, spec, x01, x02);

  SweepResult result;
  for (double eps : eps_list) {
    const RiccatiSolution full = solve_full(spec, eps, options.tol);
    SweepPoint pt;
    pt.report = tikhonov_errors(full, red, bl, spec);
    pt.cor44_j1 = corollary44_integrals(full, red, spec, 1);
    pt.cor44_j2 = corollary44_integrals(full, red, spec, 2);
    pt.value_gap = std::abs(closed_form_value(full, spec, x01, x02) - vbar);
    result.points.push_back(std::move(pt));
  }
  return result;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& os) {
  write_csv_header(os, {"eps", "err_P11", "err_P12", "err_P22",
                        "err_assembled", "gap_11", "gap_12", "gap_21",
                        "gap_22"});
  for (const auto& pt : sweep.points) {
    const auto& r = pt.report;
    write_csv_row(os, {r.eps, r.err_P11, r.err_P12, r.err_P22,
                       r.err_assembled, r.l2_gaps[0], r.l2_gaps[1],
                       r.l2_gaps[2], r.l2_gaps[3]});
  }
}

namespace {

Json fit_json(const std::vector<std::pair<double, double>>& series) {
  Json j;
  try {
    const RateFit fit = fit_rate(series);
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r_squared"] = fit.r_squared;
    j["n_points"] = fit.eps_values.size();
    if (!fit.excluded_eps.empty()) j["excluded_eps"] = fit.excluded_eps;
  } catch (const InsufficientPointsError& e) {
    j["error"] = e.what();
  }
  return j;
}

}  // namespace

Json sweep_slopes_json(const SweepResult& sweep) {
  using Series = std::vector<std::pair<double, double>>;
  auto collect = [&](auto&& pick) {
    Series s;
    for (const auto& pt : sweep.points)
      s.emplace_back(pt.report.eps, pick(pt));
    return s;
  };

  Json j;
  Json eps = Json::array();
  for (const auto& pt : sweep.points) eps.push_back(pt.report.eps);
  j["eps"] = eps;

  Json slopes;
  slopes["err_P11"] =
      fit_json(collect([](const SweepPoint& p) { return p.report.err_P11; }));
  slopes["err_P12"] =
      fit_json(collect([](const SweepPoint& p) { return p.report.err_P12; }));
  slopes["err_P22"] =
      fit_json(collect([](const SweepPoint& p) { return p.report.err_P22; }));
  slopes["err_assembled"] = fit_json(
      collect([](const SweepPoint& p) { return p.report.err_assembled; }));
  const char* gap_names[4] = {"gap_11", "gap_12", "gap_21", "gap_22"};
  for (int c = 0; c < 4; ++c)
    slopes[gap_names[c]] = fit_json(
        collect([c](const SweepPoint& p) { return p.report.l2_gaps[c]; }));
  slopes["cor44_P12_j1"] =
      fit_json(collect([](const SweepPoint& p) { return p.cor44_j1.first; }));
  slopes["cor44_P22_j1"] =
      fit_json(collect([](const SweepPoint& p) { return p.cor44_j1.second; }));
  slopes["cor44_P12_j2"] =
      fit_json(collect([](const SweepPoint& p) { return p.cor44_j2.first; }));
  slopes["cor44_P22_j2"] =
      fit_json(collect([](const SweepPoint& p) { return p.cor44_j2.second; }));
  slopes["value_gap"] =
      fit_json(collect([](const SweepPoint& p) { return p.value_gap; }));
  j["slopes"] = slopes;
  return j;
}

}  // namespace sfg
