#include "sfg/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sfg/errors.hpp"
#include "sfg/io.hpp"

namespace sfg {

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

struct Layout {
  int n1, n2;
  int size() const { return n1 * n1 + n1 * n2 + n2 * n2; }
  ConstMap p11(const Vector& y) const { return {y.data(), n1, n1}; }
  ConstMap p12(const Vector& y) const { return {y.data() + n1 * n1, n1, n2}; }
  ConstMap p22(const Vector& y) const {
    return {y.data() + n1 * n1 + n1 * n2, n2, n2};
  }
  MutMap p11(Vector& y) const { return {y.data(), n1, n1}; }
  MutMap p12(Vector& y) const { return {y.data() + n1 * n1, n1, n2}; }
  MutMap p22(Vector& y) const {
    return {y.data() + n1 * n1 + n1 * n2, n2, n2};
  }
};

}  // namespace

FullRhs full_rhs(const GameSpec& spec, const DeltaBlocks& d, const Matrix& p11,
                 const Matrix& p12, const Matrix& p22, double eps) {
  const Matrix& A11 = spec.A11;
  const Matrix& A12 = spec.A12;
  const Matrix& A21 = spec.A21;
  const Matrix& A22 = spec.A22;

  FullRhs r;
  // Slow block: independent of eps and of the fast-fast block.
  r.slow = sym(A11.transpose() * p11 + A21.transpose() * p12.transpose() +
               p11 * A11 + p12 * A21 + p11 * d.delta1 * p11 +
               p12 * d.delta.transpose() * p11 + p11 * d.delta * p12.transpose() +
               p12 * d.delta2 * p12.transpose() + spec.Q1);
  // Mixed block; the eps-weighted terms vanish in the reduced/layer systems.
  r.fast12 = eps * (A11.transpose() * p12 + p11 * d.delta1 * p12 +
                    p12 * d.delta.transpose() * p12) +
             A21.transpose() * p22 + p11 * A12 + p12 * A22 +
             p11 * d.delta * p22 + p12 * d.delta2 * p22;
  // Fast block.
  r.fast22 =
      sym(eps * (A12.transpose() * p12 + p12.transpose() * A12 +
                 p12.transpose() * d.delta * p22 + p22 * d.delta.transpose() * p12) +
          eps * eps * p12.transpose() * d.delta1 * p12 + A22.transpose() * p22 +
          p22 * A22 + p22 * d.delta2 * p22 + spec.Q2);
  return r;
}

RiccatiSolution::Blocks RiccatiSolution::unpack(const Vector& y) const {
  const Layout lay{n1, n2};
  return {Matrix(lay.p11(y)), Matrix(lay.p12(y)), Matrix(lay.p22(y))};
}

RiccatiSolution::Blocks RiccatiSolution::at(double t) const {
  double s = T - t;
  return unpack(traj_s.value_at(s));
}

RiccatiSolution::Blocks RiccatiSolution::derivative_at(double t) const {
  double s = T - t;
  Blocks b = unpack(traj_s.derivative_at(s));
  b.P11 = -b.P11;
  b.P12 = -b.P12;
  b.P22 = -b.P22;
  return b;
}

RiccatiSolution solve_full(
    const GameSpec& raw, double eps, const OdeTolerance& tol,
    const std::optional<std::vector<double>>& output_grid) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw SpecError("solve_full: eps must lie in (0, 1]");
  const GameSpec spec = checked(raw);
  const DeltaBlocks d = delta_blocks(spec);
  const double T = spec.T;
  const Layout lay{spec.n1, spec.n2};

  const OdeRhs rhs = [&](double, const Vector& y, Vector& dyds) {
    const FullRhs f =
        full_rhs(spec, d, lay.p11(y), lay.p12(y), lay.p22(y), eps);
    dyds.resize(lay.size());
    lay.p11(dyds) = f.slow;
    lay.p12(dyds) = f.fast12 / eps;
    lay.p22(dyds) = f.fast22 / eps;
  };

  OdeOptions options;
  options.tol = tol;
  if (eps < 1e-2) {
    // Resolve the terminal layer (an O(eps ln(1/tol)) window in reversed
    // time) with steps no longer than a twentieth of the fast time scale.
    options.cap_until = std::min(T, 50.0 * eps * std::log(10.0));
    options.cap_step = eps / 20.0;
  }
  options.post_step = [&lay](double, Vector& y) {
    auto p11 = lay.p11(y);
    auto p22 = lay.p22(y);
    const Matrix s11 = sym(p11);
    const Matrix s22 = sym(p22);
    const double drift11 = (Matrix(p11) - s11).norm();
    const double drift22 = (Matrix(p22) - s22).norm();
    // Gross asymmetry signals a corrupted step rather than rounding drift.
    if (drift11 > 1e-3 * (1.0 + s11.norm()) ||
        drift22 > 1e-3 * (1.0 + s22.norm()))
      return false;
    p11 = s11;
    p22 = s22;
    return true;
  };

  OdeResult result;
  try {
    result = integrate(rhs, 0.0, T, Vector::Zero(lay.size()), options);
  } catch (const BlowUpError& e) {
    const double t_escape = T - e.t_escape;
    throw BlowUpError(t_escape,
                      "full Riccati flow leaves the admissible region near t = " +
                          format_double(t_escape) +
                          " (finite escape before the initial time)");
  }

  RiccatiSolution sol;
  sol.eps = eps;
  sol.T = T;
  sol.n1 = spec.n1;
  sol.n2 = spec.n2;
  sol.traj_s = std::move(result.trajectory);

  const std::size_t n_nodes = sol.traj_s.t.size();
  sol.internal_grid_.reserve(n_nodes);
  for (std::size_t j = 0; j < n_nodes; ++j)
    sol.internal_grid_.push_back(T - sol.traj_s.t[n_nodes - 1 - j]);

  if (output_grid) {
    std::vector<double> pts = *output_grid;
    for (double& t : pts) {
      if (!std::isfinite(t) || t < -1e-9 * std::max(1.0, T) ||
          t > T * (1.0 + 1e-9) + 1e-12)
        throw SpecError("solve_full: output grid point " + format_double(t) +
                        " outside [0, T]");
      t = std::clamp(t, 0.0, T);
    }
    pts.push_back(0.0);
    pts.push_back(T);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    sol.grid = std::move(pts);
    for (double t : sol.grid) {
      auto b = sol.at(t);
      sol.P11.push_back(std::move(b.P11));
      sol.P12.push_back(std::move(b.P12));
      sol.P22.push_back(std::move(b.P22));
    }
  } else {
    sol.grid = sol.internal_grid_;
    for (std::size_t j = 0; j < n_nodes; ++j) {
      const Vector& y = sol.traj_s.y[n_nodes - 1 - j];
      sol.P11.push_back(Matrix(lay.p11(y)));
      sol.P12.push_back(Matrix(lay.p12(y)));
      sol.P22.push_back(Matrix(lay.p22(y)));
    }
  }
  return sol;
}

Matrix assemble_P(const RiccatiSolution& sol, double t) {
  const auto b = sol.at(t);
  const int n1 = sol.n1, n2 = sol.n2;
  Matrix P(n1 + n2, n1 + n2);
  P.topLeftCorner(n1, n1) = b.P11;
  P.topRightCorner(n1, n2) = sol.eps * b.P12;
  P.bottomLeftCorner(n2, n1) = sol.eps * b.P12.transpose();
  P.bottomRightCorner(n2, n2) = sol.eps * b.P22;
  return P;
}

double riccati_residual(const RiccatiSolution& sol, const GameSpec& spec) {
  const CompactSystem cs = assemble_compact(spec, sol.eps);
  // R is a signature matrix, so R^{-1} = R.
  const Matrix brb = cs.B * cs.R * cs.B.transpose();
  const int n1 = sol.n1, n2 = sol.n2;

  double worst = 0.0;
  const auto eval = [&](double t) {
    const auto b = sol.at(t);
    const auto db = sol.derivative_at(t);
    Matrix P(n1 + n2, n1 + n2), Pdot(n1 + n2, n1 + n2);
    P.topLeftCorner(n1, n1) = b.P11;
    P.topRightCorner(n1, n2) = sol.eps * b.P12;
    P.bottomLeftCorner(n2, n1) = sol.eps * b.P12.transpose();
    P.bottomRightCorner(n2, n2) = sol.eps * b.P22;
    Pdot.topLeftCorner(n1, n1) = db.P11;
    Pdot.topRightCorner(n1, n2) = sol.eps * db.P12;
    Pdot.bottomLeftCorner(n2, n1) = sol.eps * db.P12.transpose();
    Pdot.bottomRightCorner(n2, n2) = sol.eps * db.P22;
    const Matrix res =
        Pdot + cs.A.transpose() * P + P * cs.A - P * brb * P + cs.Q;
    worst = std::max(worst, frobenius(res));
  };

  const auto& g = sol.internal_grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    eval(g[i]);
    if (i + 1 < g.size()) eval(0.5 * (g[i] + g[i + 1]));
  }
  return worst;
}

void write_trajectory_csv(const RiccatiSolution& sol, std::ostream& os) {
  std::vector<std::string> names{"t"};
  for (const auto& n : block_column_names("P11", sol.n1, sol.n1))
    names.push_back(n);
  for (const auto& n : block_column_names("P12", sol.n1, sol.n2))
    names.push_back(n);
  for (const auto& n : block_column_names("P22", sol.n2, sol.n2))
    names.push_back(n);
  write_csv_header(os, names);

  std::vector<double> row;
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    row.clear();
    row.push_back(sol.grid[i]);
    append_row_major(row, sol.P11[i]);
    append_row_major(row, sol.P12[i]);
    append_row_major(row, sol.P22[i]);
    write_csv_row(os, row);
  }
}

}  // namespace sfg
