#pragma once

// Finite-dimensional averaged variational principle: for a symmetric H with
// eigenpairs (μ_j, ψ_j), a weighted family f_ζ and a subfamily M_0,
//   Σ_j (z − μ_j)_+ Σ_ζ w_ζ |⟨ψ_j, f_ζ⟩|² >= Σ_{ζ∈M_0} w_ζ (z‖f_ζ‖² − ⟨f_ζ, H f_ζ⟩),
// and its tight-frame consequences for eigenvalue means and Riesz means.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectral_bounds/error.hpp"
#include "spectral_bounds/report.hpp"

namespace spectral_bounds {

struct AvpMember {
  Eigen::VectorXd f;
  double weight = 1.0;
};

using AvpFamily = std::vector<AvpMember>;

namespace detail {

inline void check_avp_inputs(const Eigen::MatrixXd& H, const AvpFamily& family, const char* who) {
  if (H.rows() == 0 || H.rows() != H.cols()) throw InvalidInput(std::string(who) + ": matrix must be square");
  const double scale = 1.0 + H.cwiseAbs().maxCoeff();
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidInput(std::string(who) + ": matrix must be symmetric");
  for (const AvpMember& m : family) {
    if (m.f.size() != H.rows()) throw InvalidInput(std::string(who) + ": family vector dimension mismatch");
    if (!(m.weight > 0.0)) throw InvalidInput(std::string(who) + ": weights must be positive");
  }
}

inline void check_subset(const std::vector<std::size_t>& subset, std::size_t n, const char* who) {
  for (std::size_t i : subset)
    if (i >= n) throw InvalidInput(std::string(who) + ": subset index out of range");
}

inline double rayleigh(const Eigen::MatrixXd& H, const Eigen::VectorXd& f) {
  return f.dot(H * f) / f.squaredNorm();
}

}  // namespace detail

/// Both sides of the averaged inequality with sums over the family in place of
/// integrals; the left side uses the full eigendecomposition of H.
inline BoundReport avp_check(const Eigen::MatrixXd& H, const AvpFamily& family,
                             const std::vector<std::size_t>& subset, double z) {
  detail::check_avp_inputs(H, family, "avp_check");
  detail::check_subset(subset, family.size(), "avp_check");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw SolverError("avp_check: eigendecomposition failed");
  const Eigen::VectorXd& mu = es.eigenvalues();
  const Eigen::MatrixXd& psi = es.eigenvectors();

  double lhs = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    if (!(mu(j) < z)) continue;
    double proj = 0.0;
    for (const AvpMember& m : family) {
      const double c = psi.col(j).dot(m.f);
      proj += m.weight * c * c;
    }
    lhs += (z - mu(j)) * proj;
  }
  double rhs = 0.0;
  for (std::size_t i : subset) {
    const AvpMember& m = family[i];
    rhs += m.weight * (z * m.f.squaredNorm() - m.f.dot(H * m.f));
  }
  return make_report("avp_riesz", z, rhs, lhs, Direction::lower,
                     "family=" + std::to_string(family.size()) + "; subset=" + std::to_string(subset.size()));
}

/// The constant A with Σ_ζ w_ζ |⟨φ, f_ζ⟩|²/‖f_ζ‖² = A‖φ‖² for all φ; throws if
/// the family is not a tight frame to within `tol`.
inline double tight_frame_constant(const AvpFamily& family, Eigen::Index n, double tol = 1e-10) {
  if (family.empty()) throw InvalidInput("tight_frame_constant: empty family");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (const AvpMember& m : family) {
    if (m.f.size() != n) throw InvalidInput("tight_frame_constant: family vector dimension mismatch");
    const double nrm2 = m.f.squaredNorm();
    if (!(nrm2 > 0.0)) throw InvalidInput("tight_frame_constant: family vectors must be nonzero");
    S += m.weight / nrm2 * m.f * m.f.transpose();
  }
  const double A = S.trace() / static_cast<double>(n);
  if ((S - A * Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > tol * (1.0 + A))
    throw InvalidInput("tight_frame_constant: family is not a tight frame");
  return A;
}

/// For a tight frame with constant A, every subfamily M_0 of measure
/// |M_0| >= A k satisfies (1/k)Σ_{j<k} μ_j <= (1/|M_0|) Σ_{M_0} w_ζ R(f_ζ),
/// R the Rayleigh quotient. All subfamilies are enumerated; the bound is the
/// smallest admissible average.
inline BoundReport tight_frame_mean_check(const Eigen::MatrixXd& H, const AvpFamily& family, std::size_t k) {
  detail::check_avp_inputs(H, family, "tight_frame_mean_check");
  if (family.size() > 24) throw InvalidInput("tight_frame_mean_check: family too large for enumeration");
  const auto n = H.rows();
  if (k < 1 || static_cast<Eigen::Index>(k) > n) throw InvalidInput("tight_frame_mean_check: k must lie in [1, n]");
  const double A = tight_frame_constant(family, n);
  const Eigen::VectorXd mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues();
  const double mean = mu.head(static_cast<Eigen::Index>(k)).mean();

  std::vector<double> R(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) R[i] = detail::rayleigh(H, family[i].f);
  const double need = A * static_cast<double>(k) * (1.0 - 1e-12);
  double best = INFINITY;
  std::uint64_t admissible = 0;
  const std::uint64_t count = std::uint64_t{1} << family.size();
  for (std::uint64_t mask = 1; mask < count; ++mask) {
    double measure = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i)
      if (mask >> i & 1u) {
        measure += family[i].weight;
        sum += family[i].weight * R[i];
      }
    if (measure < need) continue;
    ++admissible;
    best = std::min(best, sum / measure);
  }
  if (admissible == 0) throw InvalidInput("tight_frame_mean_check: no subfamily has measure >= A k");
  return make_report("avp_frame_mean", static_cast<double>(k), best, mean, Direction::upper,
                     "A=" + format_g17(A) + "; admissible_subsets=" + std::to_string(admissible));
}

/// Tight-frame Riesz form: Σ(z − μ_j)_+ >= (1/A) Σ_{M_0} w_ζ (z − R(f_ζ)).
inline BoundReport tight_frame_riesz_check(const Eigen::MatrixXd& H, const AvpFamily& family,
                                           const std::vector<std::size_t>& subset, double z) {
  detail::check_avp_inputs(H, family, "tight_frame_riesz_check");
  detail::check_subset(subset, family.size(), "tight_frame_riesz_check");
  const double A = tight_frame_constant(family, H.rows());
  const Eigen::VectorXd mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues();
  double lhs = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) lhs += std::max(z - mu(j), 0.0);
  double rhs = 0.0;
  for (std::size_t i : subset) rhs += family[i].weight * (z - detail::rayleigh(H, family[i].f));
  return make_report("avp_frame_riesz", z, rhs / A, lhs, Direction::lower, "A=" + format_g17(A));
}

/// Random symmetric matrix with N(0,1) entries.
inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) M(i, j) = M(j, i) = g(rng);
  return M;
}

/// `count` random instances: symmetric n×n H, a family of 1..2n Gaussian
/// vectors with weights in [0.1, 2], a random subfamily and z spread over
/// and beyond the spectrum. Deterministic for a given seed.
inline std::vector<BoundReport> avp_random_instances(std::uint64_t seed, int count, Eigen::Index n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<BoundReport> out;
  for (int c = 0; c < count; ++c) {
    const Eigen::MatrixXd H = random_symmetric(rng, n);
    const int m = 1 + static_cast<int>(u(rng) * 2 * static_cast<double>(n));
    AvpFamily fam(static_cast<std::size_t>(m));
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < fam.size(); ++i) {
      fam[i].f = Eigen::VectorXd(n);
      for (Eigen::Index d = 0; d < n; ++d) fam[i].f(d) = g(rng);
      fam[i].weight = 0.1 + 1.9 * u(rng);
      if (u(rng) < 0.5) subset.push_back(i);
    }
    const double r = H.cwiseAbs().rowwise().sum().maxCoeff();  // ≥ spectral radius
    const double z = -1.2 * r + 2.4 * r * u(rng);
    out.push_back(avp_check(H, fam, subset, z));
  }
  return out;
}

/// The scaled standard basis c_i e_i repeated twice: a tight frame with A = 2.
inline AvpFamily doubled_basis_frame(Eigen::Index n, double scale = 1.0) {
  AvpFamily fam;
  for (int rep = 0; rep < 2; ++rep)
    for (Eigen::Index i = 0; i < n; ++i) {
      AvpMember m;
      m.f = Eigen::VectorXd::Zero(n);
      m.f(i) = scale * (1.0 + 0.5 * static_cast<double>(i));
      fam.push_back(std::move(m));
    }
  return fam;
}

}  // namespace spectral_bounds
