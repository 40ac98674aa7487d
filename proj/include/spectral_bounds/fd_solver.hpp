#pragma once

// Cell-centred finite-volume discretisation of the weighted form
//   ∫ (|∇φ|² + V φ²) w e^{−2ρ}  /  ∫ φ² e^{−2ρ}
// with natural (Neumann) boundary conditions, and the generalized eigensolver
// for K x = μ M x.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "spectral_bounds/domain.hpp"
#include "spectral_bounds/error.hpp"
#include "spectral_bounds/problem.hpp"
#include "spectral_bounds/spectrum.hpp"

namespace spectral_bounds {

struct DiscreteForm {
  Eigen::SparseMatrix<double> K;  // stiffness + potential
  Eigen::VectorXd M;              // diagonal mass
  std::vector<std::size_t> node_of_dof;
  std::vector<double> h;          // spacing per axis
  double min_potential = 0.0;     // min over nodes of V·w (lower bound for μ_0)
  bool potential_free = false;    // V ≡ 0: constants are in the kernel
  std::size_t dof_count() const { return static_cast<std::size_t>(M.size()); }
};

namespace detail {

// Evaluates f at fractional grid position s; periodic grids wrap s into the
// fundamental cell first so every evaluation sees the same representative.
inline double eval_at(const Expr& f, const QuadratureGrid& g, std::vector<double> s,
                      std::vector<double>& x) {
  if (g.periodic()) {
    for (int a = 0; a < g.dimension(); ++a) {
      const double n = g.counts()[a];
      s[a] = std::fmod(s[a], n);
      if (s[a] < 0.0) s[a] += n;
    }
  }
  g.point_at(s, x);
  return f(x);
}

}  // namespace detail

/// Assembles K and M. Edge coefficients are midpoint values of w e^{−2ρ};
/// edges that leave the domain are simply absent.
inline DiscreteForm assemble(const ProblemSpec& p, const QuadratureGrid& grid) {
  const int nu = p.nu;
  if (grid.dimension() != nu) throw InvalidInput("assemble: grid dimension does not match problem");
  for (int c : grid.counts())
    if (c < 8) throw InvalidInput("assemble: grid needs at least 8 nodes per axis");
  if (grid.periodic() && !p.domain.frame_is_axis_aligned())
    throw InvalidInput("assemble: periodic assembly needs an orthogonal, axis-aligned lattice basis");

  DiscreteForm f;
  f.potential_free = p.V.is_zero();
  std::vector<std::int64_t> dof_of_node(grid.size(), -1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.inside(i)) {
      dof_of_node[i] = static_cast<std::int64_t>(f.node_of_dof.size());
      f.node_of_dof.push_back(i);
    }
  }
  const std::size_t n = f.node_of_dof.size();
  const double vol = grid.cell_volume();
  f.h.resize(nu);
  for (int a = 0; a < nu; ++a) f.h[a] = grid.spacing(a);

  f.M.resize(static_cast<Eigen::Index>(n));
  std::vector<double> diag(n, 0.0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n * (2 * nu + 1));
  std::vector<double> x(nu), s(nu);
  std::vector<int> idx(nu), jdx(nu);
  f.min_potential = std::numeric_limits<double>::infinity();

  for (std::size_t d = 0; d < n; ++d) {
    const std::size_t node = f.node_of_dof[d];
    grid.index(node, idx);
    for (int a = 0; a < nu; ++a) s[a] = idx[a] + 0.5;
    const double w = detail::eval_at(p.w, grid, s, x);
    if (!(w > 0.0)) throw InvalidInput("assemble: weight w is not positive at a grid node");
    const double dens = std::exp(-2.0 * detail::eval_at(p.rho, grid, s, x));
    const double V = f.potential_free ? 0.0 : detail::eval_at(p.V, grid, s, x);
    f.M[static_cast<Eigen::Index>(d)] = dens * vol;
    diag[d] += V * w * dens * vol;
    f.min_potential = std::min(f.min_potential, V * w);

    // Edges to the +1 neighbour along each axis.
    for (int a = 0; a < nu; ++a) {
      jdx.assign(idx.begin(), idx.end());
      jdx[a] += 1;
      if (jdx[a] >= grid.counts()[a]) {
        if (!grid.periodic()) continue;
        jdx[a] = 0;
        if (grid.counts()[a] < 2) continue;
      }
      const std::size_t nb = grid.flat(jdx);
      const std::int64_t e = dof_of_node[nb];
      if (e < 0) continue;
      std::vector<double> mid(s);
      mid[a] += 0.5;
      const double wm = detail::eval_at(p.w, grid, mid, x);
      const double rm = detail::eval_at(p.rho, grid, mid, x);
      if (!(wm > 0.0)) throw InvalidInput("assemble: weight w is not positive at an edge midpoint");
      const double c = wm * std::exp(-2.0 * rm) * vol / (f.h[a] * f.h[a]);
      diag[d] += c;
      diag[static_cast<std::size_t>(e)] += c;
      trip.emplace_back(static_cast<int>(d), static_cast<int>(e), -c);
      trip.emplace_back(static_cast<int>(e), static_cast<int>(d), -c);
    }
  }
  for (std::size_t d = 0; d < n; ++d) trip.emplace_back(static_cast<int>(d), static_cast<int>(d), diag[d]);
  f.K.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  f.K.setFromTriplets(trip.begin(), trip.end());
  f.K.makeCompressed();
  return f;
}

enum class SolverMethod { automatic, dense, iterative };

struct SolverOptions {
  std::size_t k = 6;
  SolverMethod method = SolverMethod::automatic;
  double tolerance = 1e-8;
  std::size_t max_dense_dof = 6400;   // hard limit for an explicit dense request
  std::size_t auto_dense_dof = 1600;  // automatic selection prefers dense up to here
  std::size_t max_iterations = 500;
  std::uint32_t seed = 20240611u;
};

namespace detail {

// Number of leading values to report: k, extended through any cluster that
// straddles index k−1 so that the list is complete up to its last value.
inline std::size_t cluster_end(const std::vector<double>& v, std::size_t k) {
  std::size_t end = k;
  const double c = v[k - 1];
  while (end < v.size() && std::fabs(v[end] - c) <= 1e-8 * (1.0 + std::fabs(c))) ++end;
  return end;
}

inline Spectrum finish(std::vector<double> vals, std::vector<double> res, std::size_t k,
                       bool snap_zero, const std::string& source) {
  const std::size_t end = cluster_end(vals, k);
  vals.resize(end);
  res.resize(end);
  if (snap_zero) {
    const double ref = 1e-8 * (1.0 + std::fabs(vals[k - 1]));
    for (double& v : vals)
      if (std::fabs(v) < ref) v = 0.0;
  }
  std::sort(vals.begin(), vals.end());
  Spectrum s;
  s.values = std::move(vals);
  s.residuals = std::move(res);
  s.cutoff = s.values.back();
  s.source = source;
  return s;
}

inline Spectrum solve_dense(const DiscreteForm& f, std::size_t k, bool snap_zero) {
  const Eigen::VectorXd dinv = f.M.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd S = Eigen::MatrixXd(f.K);
  S = dinv.asDiagonal() * S * dinv.asDiagonal();
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
  const std::size_t n = f.dof_count();
  std::vector<double> vals(n), res(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = es.eigenvalues()[static_cast<Eigen::Index>(i)];
  const std::size_t want = std::min(n, cluster_end(vals, k) + 1);
  for (std::size_t i = 0; i < want; ++i) {
    const auto y = es.eigenvectors().col(static_cast<Eigen::Index>(i));
    res[i] = (S * y - vals[i] * y).norm() / y.norm();
  }
  return finish(std::move(vals), std::move(res), k, snap_zero, "fd-dense");
}

// Gram–Schmidt (twice) of the columns of W against the columns already in Q,
// appending the survivors. Returns the number of columns appended.
inline Eigen::Index orthonormal_append(Eigen::MatrixXd& Q, Eigen::Index used, const Eigen::MatrixXd& W) {
  Eigen::Index added = 0;
  for (Eigen::Index c = 0; c < W.cols(); ++c) {
    Eigen::VectorXd v = W.col(c);
    const double n0 = v.norm();
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (used + added > 0) {
        const auto B = Q.leftCols(used + added);
        v -= B * (B.transpose() * v);
      }
    }
    const double n1 = v.norm();
    if (n1 <= 1e-10 * n0) continue;
    Q.col(used + added) = v / n1;
    ++added;
  }
  return added;
}

// Shift-invert block Krylov iteration on S = M^{-1/2} K M^{-1/2}.
// Each sweep builds span{X, TX, T²X} with T = (S − σ)^{-1}, then performs
// Rayleigh–Ritz with S and keeps the lowest `block` Ritz vectors.
inline Spectrum solve_iterative(const DiscreteForm& f, const SolverOptions& opts, bool snap_zero) {
  const Eigen::Index n = static_cast<Eigen::Index>(f.dof_count());
  const Eigen::VectorXd msqrt = f.M.cwiseSqrt();
  const Eigen::VectorXd dinv = msqrt.cwiseInverse();
  const double sigma = f.min_potential - 1.0;
  Eigen::SparseMatrix<double> A = f.K;
  for (Eigen::Index i = 0; i < n; ++i) A.coeffRef(i, i) -= sigma * f.M[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("factorisation of the shifted operator failed");

  auto applyS = [&](const Eigen::MatrixXd& Y) -> Eigen::MatrixXd {
    return dinv.asDiagonal() * (f.K * (dinv.asDiagonal() * Y));
  };
  auto applyT = [&](const Eigen::MatrixXd& Y) -> Eigen::MatrixXd {
    Eigen::MatrixXd R = ldlt.solve(msqrt.asDiagonal() * Y);
    return msqrt.asDiagonal() * R;
  };

  std::size_t nev = opts.k + std::max<std::size_t>(4, opts.k / 2);
  for (int attempt = 0; attempt < 6; ++attempt) {
    nev = std::min<std::size_t>(nev, static_cast<std::size_t>(n));
    const Eigen::Index block =
        std::min<Eigen::Index>(n, static_cast<Eigen::Index>(nev + std::max<std::size_t>(4, nev / 2)));
    // Deterministic pseudo-random start block.
    std::mt19937 gen(opts.seed);
    Eigen::MatrixXd X(n, block);
    for (Eigen::Index c = 0; c < block; ++c)
      for (Eigen::Index r = 0; r < n; ++r) X(r, c) = static_cast<double>(gen()) / 4294967296.0 - 0.5;
    Eigen::MatrixXd Q(n, std::min<Eigen::Index>(n, 3 * block));
    Eigen::Index used = orthonormal_append(Q, 0, X);
    X = Q.leftCols(used);

    std::vector<double> vals, res;
    bool converged = false;
    for (std::size_t it = 0; it < opts.max_iterations && !converged; ++it) {
      const Eigen::MatrixXd W1 = applyT(X);
      const Eigen::MatrixXd W2 = applyT(W1);
      Q.setZero();
      used = orthonormal_append(Q, 0, X);
      used += orthonormal_append(Q, used, W1);
      if (used < Q.cols()) used += orthonormal_append(Q, used, W2.leftCols(std::min<Eigen::Index>(W2.cols(), Q.cols() - used)));
      const Eigen::MatrixXd B = Q.leftCols(used);
      const Eigen::MatrixXd SB = applyS(B);
      Eigen::MatrixXd H = B.transpose() * SB;
      H = 0.5 * (H + H.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
      if (es.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz step failed");
      const Eigen::Index keep = std::min<Eigen::Index>(block, used);
      const Eigen::MatrixXd U = es.eigenvectors().leftCols(keep);
      X = B * U;
      const Eigen::MatrixXd SX = SB * U;
      vals.assign(static_cast<std::size_t>(keep), 0.0);
      res.assign(static_cast<std::size_t>(keep), 0.0);
      converged = static_cast<std::size_t>(keep) >= nev;
      for (Eigen::Index i = 0; i < keep; ++i) {
        const double th = es.eigenvalues()[i];
        vals[static_cast<std::size_t>(i)] = th;
        res[static_cast<std::size_t>(i)] = (SX.col(i) - th * X.col(i)).norm() / X.col(i).norm();
        if (static_cast<std::size_t>(i) < nev &&
            res[static_cast<std::size_t>(i)] > opts.tolerance * std::max(1.0, std::fabs(th)))
          converged = false;
      }
    }
    if (!converged) throw SolverError("iterative eigensolver did not converge");
    vals.resize(nev);
    res.resize(nev);
    // Need at least one converged value beyond the cluster at index k−1.
    if (cluster_end(vals, opts.k) < nev || nev == static_cast<std::size_t>(n))
      return finish(std::move(vals), std::move(res), opts.k, snap_zero, "fd-iterative");
    nev *= 2;
  }
  throw SolverError("iterative eigensolver could not resolve the eigenvalue cluster at index k");
}

}  // namespace detail

/// Lowest eigenvalues of K x = μ M x. Returns at least opts.k values; if index
/// k−1 sits in a degenerate cluster the whole cluster is returned, and the
/// cutoff is the last value.
inline Spectrum solve_lowest(const DiscreteForm& f, const SolverOptions& opts) {
  if (opts.k < 1) throw InvalidInput("solve_lowest: k must be >= 1");
  if (!(opts.tolerance > 0.0)) throw InvalidInput("solve_lowest: tolerance must be positive");
  if (opts.k > f.dof_count()) throw InvalidInput("solve_lowest: k exceeds the number of unknowns");
  SolverMethod m = opts.method;
  if (m == SolverMethod::automatic)
    m = f.dof_count() <= std::min(opts.auto_dense_dof, opts.max_dense_dof) ? SolverMethod::dense
                                                                           : SolverMethod::iterative;
  if (m == SolverMethod::dense && f.dof_count() > opts.max_dense_dof)
    throw SolverError("dense solve requested for " + std::to_string(f.dof_count()) +
                      " unknowns (limit " + std::to_string(opts.max_dense_dof) + ")");
  Spectrum s = m == SolverMethod::dense ? detail::solve_dense(f, opts.k, f.potential_free)
                                        : detail::solve_iterative(f, opts, f.potential_free);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.residuals[i] > opts.tolerance * std::max(1.0, std::fabs(s.values[i])) * 10.0 &&
        m == SolverMethod::dense)
      throw SolverError("dense eigenpair residual above tolerance");
  return s;
}

inline Spectrum solve_problem(const ProblemSpec& p, const QuadratureGrid& grid, const SolverOptions& opts) {
  return solve_lowest(assemble(p, grid), opts);
}

struct ConvergenceRow {
  std::vector<int> counts;
  std::vector<double> values;   // first k eigenvalues
  std::vector<double> errors;   // vs oracle or extrapolated reference
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<double> reference;
  std::vector<double> observed_order;  // per eigenvalue, from the last two errors
  bool reference_is_oracle = false;
};

/// Solves on successively doubled grids. Errors are measured against `oracle`
/// when given; otherwise against a Richardson reference from the two finest
/// grids (with the order estimated from three grids when available).
inline ConvergenceTable convergence_study(const ProblemSpec& p, const std::vector<std::vector<int>>& grids,
                                          std::size_t k, const std::optional<std::vector<double>>& oracle = {},
                                          SolverOptions opts = {}) {
  if (grids.size() < 2) throw InvalidInput("convergence_study: need at least two grids");
  for (std::size_t g = 1; g < grids.size(); ++g)
    for (std::size_t a = 0; a < grids[g].size(); ++a)
      if (grids[g][a] != 2 * grids[g - 1][a])
        throw InvalidInput("convergence_study: each grid must double the previous one");
  if (oracle && oracle->size() < k) throw InvalidInput("convergence_study: oracle shorter than k");
  opts.k = k;
  ConvergenceTable t;
  for (const auto& c : grids) {
    const Spectrum s = solve_lowest(assemble(p, QuadratureGrid(p.domain, c)), opts);
    t.rows.push_back({c, std::vector<double>(s.values.begin(), s.values.begin() + static_cast<long>(k)), {}});
  }
  const std::size_t G = t.rows.size();
  t.reference.assign(k, 0.0);
  t.observed_order.assign(k, 0.0);
  if (oracle) {
    t.reference_is_oracle = true;
    t.reference.assign(oracle->begin(), oracle->begin() + static_cast<long>(k));
  } else {
    for (std::size_t j = 0; j < k; ++j) {
      const double f1 = t.rows[G - 2].values[j], f2 = t.rows[G - 1].values[j];
      double order = 2.0;
      if (G >= 3) {
        const double f0 = t.rows[G - 3].values[j];
        const double r = (f1 - f0) / (f2 - f1);
        if (std::isfinite(r) && r > 1.0) order = std::log2(r);
      }
      t.reference[j] = f2 + (f2 - f1) / (std::pow(2.0, order) - 1.0);
    }
  }
  for (auto& row : t.rows) {
    row.errors.resize(k);
    for (std::size_t j = 0; j < k; ++j) row.errors[j] = std::fabs(row.values[j] - t.reference[j]);
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double e1 = t.rows[G - 2].errors[j], e2 = t.rows[G - 1].errors[j];
    t.observed_order[j] = (e1 > 0.0 && e2 > 0.0) ? std::log2(e1 / e2) : 0.0;
  }
  return t;
}

}  // namespace spectral_bounds
