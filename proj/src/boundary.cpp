#include "sfg/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "sfg/errors.hpp"
#include "sfg/io.hpp"

namespace sfg {

Matrix h_map(const Matrix& p11, const Matrix& p22bar, const GameSpec& spec) {
  return p12_bar(p11, p22bar, spec);
}

Matrix phi_map(const Matrix& p11, const GameSpec& spec, const Matrix& p22bar) {
  const DeltaBlocks d = delta_blocks(spec);
  return spec.A21.transpose() + p11 * d.delta +
         h_map(p11, p22bar, spec) * d.delta2;
}

double gamma_margin(const GameSpec& spec, const Matrix& p22bar) {
  const DeltaBlocks d = delta_blocks(spec);
  const Matrix s = spec.A22 + d.delta2 * p22bar;
  const double gamma = -sym_eig_max(s);
  if (!(gamma > 1e-12))
    throw AssumptionError(
        "4.1", "symmetric part of the closed-loop fast matrix is not "
               "negative definite (margin " +
                   format_double(gamma) + ")");
  return gamma;
}

AttractionCheck attraction_check(const GameSpec& spec, const Matrix& p22bar,
                                 double delta) {
  const double gamma = gamma_margin(spec, p22bar);
  if (!(delta > 0.0 && delta < gamma))
    throw SpecError("attraction_check: delta = " + format_double(delta) +
                    " outside (0, gamma) with gamma = " + format_double(gamma));
  const DeltaBlocks d = delta_blocks(spec);
  AttractionCheck out;
  out.q2 = (gamma + delta) / spectral_norm(d.delta2);
  out.ok = frobenius(p22bar) < out.q2;
  return out;
}

double select_delta(const GameSpec& spec, const Matrix& p22bar,
                    std::optional<double> requested) {
  const double gamma = gamma_margin(spec, p22bar);
  if (requested) {
    const AttractionCheck c = attraction_check(spec, p22bar, *requested);
    if (!c.ok)
      throw AssumptionError(
          "4.2", "layer initial data lies outside the certified ball at the "
                 "requested delta = " +
                     format_double(*requested) +
                     " (|P22bar| = " + format_double(frobenius(p22bar)) +
                     " >= q2 = " + format_double(c.q2) + ")");
    return *requested;
  }

  double lo = 0.5 * gamma;
  if (attraction_check(spec, p22bar, lo).ok) return lo;
  double hi = 0.99 * gamma;
  if (!attraction_check(spec, p22bar, hi).ok)
    throw AssumptionError(
        "4.2", "layer initial data lies outside the certified ball even at "
               "delta = 0.99*gamma (|P22bar| = " +
                   format_double(frobenius(p22bar)) + ")");
  // The certificate is monotone in delta: bisect to the flip point, then
  // step a little inside the certified side.
  for (int i = 0; i < 50; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (attraction_check(spec, p22bar, mid).ok)
      hi = mid;
    else
      lo = mid;
  }
  return std::min(0.99 * gamma, hi + 0.01 * gamma);
}

namespace {

struct LayerLayout {
  int n1, n2;
  int size() const { return n1 * n2 + n2 * n2; }
  Eigen::Map<const Matrix> p12(const Vector& y) const {
    return {y.data(), n1, n2};
  }
  Eigen::Map<const Matrix> p22(const Vector& y) const {
    return {y.data() + n1 * n2, n2, n2};
  }
  Eigen::Map<Matrix> p12(Vector& y) const { return {y.data(), n1, n2}; }
  Eigen::Map<Matrix> p22(Vector& y) const {
    return {y.data() + n1 * n2, n2, n2};
  }
};

}  // namespace

Matrix BoundaryLayerSolution::p12hat_at(double tau) const {
  const LayerLayout lay{n1, n2};
  const Vector y = traj_tau.value_at(tau);
  return Matrix(lay.p12(y));
}

Matrix BoundaryLayerSolution::p22hat_at(double tau) const {
  const LayerLayout lay{n1, n2};
  const Vector y = traj_tau.value_at(tau);
  return Matrix(lay.p22(y));
}

double BoundaryLayerSolution::envelope12(double tau) const {
  return k1 * std::exp(-gamma * tau) * p12hat0_norm +
         k2 * std::exp(-(gamma - delta) * tau);
}

double BoundaryLayerSolution::envelope22(double tau) const {
  return std::exp(-(gamma - delta) * tau) * p22hat0_norm;
}

BoundaryLayerSolution solve_boundary_layer(const GameSpec& spec,
                                           const ReducedSolution& rs,
                                           double delta, double tau_max,
                                           const OdeTolerance& tol) {
  const double gamma = gamma_margin(spec, rs.p22bar);
  const AttractionCheck cert = attraction_check(spec, rs.p22bar, delta);
  if (!cert.ok)
    throw AssumptionError(
        "4.2", "layer initial data lies outside the certified ball "
               "(|P22bar| = " +
                   format_double(frobenius(rs.p22bar)) +
                   " >= q2 = " + format_double(cert.q2) + ")");
  if (!(tau_max > 0.0))
    throw SpecError("solve_boundary_layer: tau_max must be positive");

  const DeltaBlocks d = delta_blocks(spec);
  const Matrix& s = rs.s;
  const int n1 = spec.n1, n2 = spec.n2;
  const LayerLayout lay{n1, n2};

  const Matrix h0 = h_map(Matrix::Zero(n1, n1), rs.p22bar, spec);
  const Matrix phi0 = phi_map(Matrix::Zero(n1, n1), spec, rs.p22bar);

  const OdeRhs rhs = [&](double, const Vector& y, Vector& dydtau) {
    const auto p12 = lay.p12(y);
    const auto p22 = lay.p22(y);
    dydtau.resize(lay.size());
    lay.p12(dydtau) = p12 * s + phi0 * Matrix(p22) + p12 * d.delta2 * p22;
    lay.p22(dydtau) =
        sym(s.transpose() * p22 + p22 * s + p22 * d.delta2 * p22);
  };

  Vector y0(lay.size());
  lay.p12(y0) = -h0;
  lay.p22(y0) = -rs.p22bar;

  OdeOptions options;
  options.tol = tol;
  // The layer contracts through dozens of orders of magnitude; a generic
  // absolute tolerance would let the controller coast once the state drops
  // below it, leaving a noise floor that ruins the decay certificates.  Keep
  // the absolute target far below any scale the envelopes distinguish.
  options.tol.abs = std::min(tol.abs, 1e-18);
  options.post_step = [&lay](double, Vector& y) {
    auto p22 = lay.p22(y);
    const Matrix s22 = sym(p22);
    if ((Matrix(p22) - s22).norm() > 1e-3 * (1.0 + s22.norm())) return false;
    p22 = s22;
    return true;
  };

  OdeResult result = integrate(rhs, 0.0, tau_max, y0, options);

  // Once the state has contracted below roundoff relative to its initial
  // size, the certified flow can never climb back; store the tail as exact
  // zeros so node norms keep decreasing instead of wandering on the
  // integrator's noise floor.
  {
    OdeTrajectory& traj = result.trajectory;
    const double cutoff = 1e-16 * (1.0 + y0.norm());
    std::size_t k = 0;
    while (k < traj.y.size() && traj.y[k].norm() > cutoff) ++k;
    for (; k < traj.y.size(); ++k) {
      traj.y[k].setZero();
      traj.dy[k].setZero();
    }
  }

  BoundaryLayerSolution bl;
  bl.n1 = n1;
  bl.n2 = n2;
  bl.gamma = gamma;
  bl.delta = delta;
  bl.q2 = cert.q2;
  bl.p12hat0_norm = frobenius(h0);
  bl.p22hat0_norm = frobenius(rs.p22bar);
  const double gronwall = spectral_norm(d.delta2) * cert.q2 / (gamma - delta);
  bl.k1 = std::exp(gronwall);
  bl.k2 = spectral_norm(phi0) * cert.q2 / delta * bl.k1;
  bl.traj_tau = std::move(result.trajectory);

  const std::size_t n_nodes = bl.traj_tau.t.size();
  bl.tau_grid = bl.traj_tau.t;
  bl.P12hat.reserve(n_nodes);
  bl.P22hat.reserve(n_nodes);
  const double slack_rel = 10.0 * tol.rel;
  const double slack_abs = 10.0 * tol.abs;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const Vector& y = bl.traj_tau.y[i];
    bl.P12hat.emplace_back(lay.p12(y));
    bl.P22hat.emplace_back(lay.p22(y));
    const double tau = bl.tau_grid[i];
    const double v12 = bl.P12hat.back().norm();
    const double v22 = bl.P22hat.back().norm();
    const double b12 = bl.envelope12(tau);
    const double b22 = bl.envelope22(tau);
    if (v12 > b12 + slack_rel * b12 + slack_abs)
      throw EnvelopeViolatedError(
          tau, "mixed layer block escapes its decay envelope at tau = " +
                   format_double(tau) + " (" + format_double(v12) + " > " +
                   format_double(b12) + ")");
    if (v22 > b22 + slack_rel * b22 + slack_abs)
      throw EnvelopeViolatedError(
          tau, "fast layer block escapes its decay envelope at tau = " +
                   format_double(tau) + " (" + format_double(v22) + " > " +
                   format_double(b22) + ")");
  }
  return bl;
}

double default_tau_max(double eps, double T, double gamma, double delta) {
  if (!(eps > 0.0) || !(T > 0.0) || !(gamma > 0.0) || !(delta > 0.0) ||
      !(delta < gamma))
    throw SpecError("default_tau_max: need eps, T > 0 and 0 < delta < gamma");
  return std::max(T / eps, 60.0 / (gamma - delta));
}

void write_boundary_csv(const BoundaryLayerSolution& bl, std::ostream& os) {
  std::vector<std::string> names{"tau"};
  for (const auto& n : block_column_names("P12hat", bl.n1, bl.n2))
    names.push_back(n);
  for (const auto& n : block_column_names("P22hat", bl.n2, bl.n2))
    names.push_back(n);
  names.push_back("env12");
  names.push_back("env22");
  write_csv_header(os, names);
  std::vector<double> row;
  for (std::size_t i = 0; i < bl.tau_grid.size(); ++i) {
    row.clear();
    row.push_back(bl.tau_grid[i]);
    append_row_major(row, bl.P12hat[i]);
    append_row_major(row, bl.P22hat[i]);
    row.push_back(bl.envelope12(bl.tau_grid[i]));
    row.push_back(bl.envelope22(bl.tau_grid[i]));
    write_csv_row(os, row);
  }
}

}  // namespace sfg
