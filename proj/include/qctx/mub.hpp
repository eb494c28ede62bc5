#pragma once

// Unbiased vectors and operators, mutually unbiased contexts, the
// transition-probability commutation criterion for context maps, and
// strong unbiasedness.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qctx/channel.hpp"
#include "qctx/errors.hpp"
#include "qctx/opcore.hpp"
#include "qctx/sharp_order.hpp"

namespace qctx {

/// A unit vector is unbiased in a basis when all transition probabilities
/// |<psi, phi_i>|^2 equal 1/n.
inline bool is_unbiased_vector(const ComplexVector& psi, const Context& ctx,
                               Tolerance tol = {}) {
  if (psi.size() != ctx.dim())
    throw ShapeMismatch("is_unbiased_vector: vector dimension differs");
  const double nrm = psi.norm();
  if (std::abs(nrm - 1.0) > tol.eps)
    throw NotUnitVector("is_unbiased_vector: ||psi|| = " + std::to_string(nrm));
  const int n = ctx.dim();
  const double target = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const Complex overlap = (ctx.basis_vector(i).adjoint() * psi)(0);
    if (std::abs(std::norm(overlap) - target) > tol.eps) return false;
  }
  return true;
}

struct MubVerdict {
  bool mutually_unbiased;
  /// transition_matrix(i, j) = |<phi_i, psi_j>|^2; doubly stochastic.
  RealMatrix transition_matrix;
};

inline MubVerdict mutually_unbiased(const Context& actx, const Context& bctx,
                                    Tolerance tol = {}) {
  if (actx.dim() != bctx.dim())
    throw ShapeMismatch("mutually_unbiased: context dimensions differ");
  const int n = actx.dim();
  MubVerdict verdict{true, RealMatrix(n, n)};
  const double target = 1.0 / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Complex overlap = (actx.basis_vector(i).adjoint() * bctx.basis_vector(j))(0);
      verdict.transition_matrix(i, j) = std::norm(overlap);
      if (std::abs(verdict.transition_matrix(i, j) - target) > tol.eps)
        verdict.mutually_unbiased = false;
    }
  return verdict;
}

/// Off-diagonal commutation sum
///   sum_j |<phi_i, psi_j>|^2 <psi_j, phi_r> <phi_s, psi_j>
/// which must vanish for r != s when the context maps commute.
inline Complex eq31_off_diagonal_sum(const Context& actx, const Context& bctx,
                                     int i, int r, int s) {
  const int n = actx.dim();
  Complex sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const ComplexVector psi = bctx.basis_vector(j);
    const Complex g_ij = (actx.basis_vector(i).adjoint() * psi)(0);
    const Complex psi_phir = (psi.adjoint() * actx.basis_vector(r))(0);
    const Complex phis_psi = (actx.basis_vector(s).adjoint() * psi)(0);
    sum += std::norm(g_ij) * psi_phir * phis_psi;
  }
  return sum;
}

/// Diagonal commutation sum sum_j |<phi_i, psi_j>|^2 |<psi_j, phi_r>|^2,
/// which must equal |<psi_k, phi_r>|^2 for every k with <phi_i, psi_k> != 0.
inline double eq31_diagonal_sum(const Context& actx, const Context& bctx, int i,
                                int r) {
  const int n = actx.dim();
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const ComplexVector psi = bctx.basis_vector(j);
    const Complex g_ij = (actx.basis_vector(i).adjoint() * psi)(0);
    const Complex g_rj = (actx.basis_vector(r).adjoint() * psi)(0);
    sum += std::norm(g_ij) * std::norm(g_rj);
  }
  return sum;
}

struct Eq31Report {
  bool holds;
  double off_diagonal_residual;
  double diagonal_residual;
};

/// Transition-probability criterion for commuting context maps: the two
/// residuals vanish iff L_A L_B = L_B L_A. The verdict is cross-validated
/// against direct comparison of the composed channel maps.
inline Eq31Report eq31_check(const Context& actx, const Context& bctx,
                             Tolerance tol = {}) {
  if (actx.dim() != bctx.dim())
    throw ShapeMismatch("eq31_check: context dimensions differ");
  const int n = actx.dim();
  Eq31Report rep{false, 0.0, 0.0};

  // The conditions below apply only to rows i that overlap some psi_k; an
  // orthonormal row always does, but the gate mirrors the criterion's
  // quantifier faithfully.
  for (int i = 0; i < n; ++i) {
    bool applicable = false;
    for (int k = 0; k < n; ++k)
      if (std::abs((actx.basis_vector(i).adjoint() * bctx.basis_vector(k))(0)) >
          tol.eps)
        applicable = true;
    if (!applicable) continue;
    for (int r = 0; r < n; ++r) {
      for (int s = 0; s < n; ++s) {
        if (r == s) continue;
        rep.off_diagonal_residual =
            std::max(rep.off_diagonal_residual,
                     std::abs(eq31_off_diagonal_sum(actx, bctx, i, r, s)));
      }
      const double diag = eq31_diagonal_sum(actx, bctx, i, r);
      for (int k = 0; k < n; ++k) {
        if (std::abs((actx.basis_vector(i).adjoint() * bctx.basis_vector(k))(0)) <=
            tol.eps)
          continue;
        const Complex g_rk = (actx.basis_vector(r).adjoint() * bctx.basis_vector(k))(0);
        rep.diagonal_residual =
            std::max(rep.diagonal_residual, std::abs(diag - std::norm(g_rk)));
      }
    }
  }
  rep.holds = rep.off_diagonal_residual <= tol.eps && rep.diagonal_residual <= tol.eps;

  const Channel a = actx.to_channel(tol);
  const Channel b = bctx.to_channel(tol);
  const bool maps_commute = maps_equal(compose(a, b, tol), compose(b, a, tol), tol);
  if (rep.holds != maps_commute)
    throw VerdictMismatch("eq31_check: criterion verdict disagrees with direct "
                          "map commutation");
  return rep;
}

struct Cor33Report {
  bool mub;
  bool map_is_r;
  bool sum_condition;
  bool block_condition;
};

/// Four equivalent characterizations of a mutually unbiased context pair:
/// the transition matrix is flat; L_A L_B is the completely random map;
/// sum_i P_i Q_k P_i = I/n; and P_j Q_k P_j = P_j / n. All are computed
/// independently and must agree.
inline Cor33Report cor33_equivalences(const Context& actx, const Context& bctx,
                                      Tolerance tol = {}) {
  if (actx.dim() != bctx.dim())
    throw ShapeMismatch("cor33_equivalences: context dimensions differ");
  const int n = actx.dim();
  Cor33Report rep{};

  rep.mub = mutually_unbiased(actx, bctx, tol).mutually_unbiased;

  const Channel a = actx.to_channel(tol);
  const Channel b = bctx.to_channel(tol);
  rep.map_is_r = true;
  for (int r = 0; r < n && rep.map_is_r; ++r)
    for (int s = 0; s < n && rep.map_is_r; ++s) {
      const ComplexMatrix e = matrix_unit(n, r, s);
      if ((apply_map(a, apply_map(b, e)) - random_map_apply(e)).norm() > tol.eps)
        rep.map_is_r = false;
    }

  rep.sum_condition = true;
  for (int k = 0; k < n && rep.sum_condition; ++k) {
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      sum += actx.projection(i) * bctx.projection(k) * actx.projection(i);
    if ((sum - identity(n) / static_cast<double>(n)).norm() > tol.eps)
      rep.sum_condition = false;
  }

  rep.block_condition = true;
  for (int j = 0; j < n && rep.block_condition; ++j)
    for (int k = 0; k < n && rep.block_condition; ++k) {
      const ComplexMatrix lhs =
          actx.projection(j) * bctx.projection(k) * actx.projection(j);
      if ((lhs - actx.projection(j) / static_cast<double>(n)).norm() > tol.eps)
        rep.block_condition = false;
    }

  if (rep.mub != rep.map_is_r || rep.mub != rep.sum_condition ||
      rep.mub != rep.block_condition)
    throw VerdictMismatch("cor33_equivalences: the four equivalent conditions disagree");
  return rep;
}

/// An operator is unbiased in a channel when the channel map sends it to
/// tr(A) I / n.
inline bool is_unbiased_operator(const ComplexMatrix& a, const Channel& ch,
                                 Tolerance tol = {}) {
  require_square(a, "is_unbiased_operator");
  if (a.rows() != ch.dim())
    throw ShapeMismatch("is_unbiased_operator: operator dimension differs");
  return (apply_map(ch, a) - random_map_apply(a)).norm() <= tol.eps;
}

inline bool is_unbiased_operator(const ComplexMatrix& a, const SharpChannel& s,
                                 Tolerance tol = {}) {
  return is_unbiased_operator(a, s.to_channel(tol), tol);
}

/// Context form: additionally cross-checks the map criterion against equal
/// diagonal expectations <phi_i, A phi_i> = tr(A)/n.
inline bool is_unbiased_operator(const ComplexMatrix& a, const Context& ctx,
                                 Tolerance tol = {}) {
  const bool via_map = is_unbiased_operator(a, ctx.to_channel(tol), tol);
  const int n = ctx.dim();
  const Complex mean = a.trace() / static_cast<double>(n);
  bool via_diagonal = true;
  for (int i = 0; i < n; ++i) {
    const ComplexVector phi = ctx.basis_vector(i);
    if (std::abs((phi.adjoint() * a * phi)(0) - mean) > tol.eps) via_diagonal = false;
  }
  if (via_map != via_diagonal)
    throw VerdictMismatch("is_unbiased_operator: map and diagonal forms disagree");
  return via_map;
}

/// Orthonormal bases for the ranges of a sharp channel's projections,
/// extracted from the eigenvectors with eigenvalue 1.
inline std::vector<ComplexMatrix> block_bases_of(const SharpChannel& s,
                                                 Tolerance tol = {}) {
  std::vector<ComplexMatrix> bases;
  bases.reserve(s.size());
  for (int i = 0; i < s.size(); ++i) {
    const int rank =
        static_cast<int>(std::lround(s.projection(i).trace().real()));
    Eigensystem es = hermitian_eigensystem(s.projection(i), tol);
    bases.push_back(es.vectors.rightCols(rank));
  }
  return bases;
}

struct BlockUnbiasedReport {
  bool unbiased;
  std::vector<int> violating_blocks;
};

/// Block criterion for unbiasedness in a sharp channel: within each
/// projection's range basis, <phi_ij, A phi_ik> = tr(A)/n * delta_jk.
/// Must agree with the channel-map criterion.
inline BlockUnbiasedReport thm35_block_check(const ComplexMatrix& a,
                                             const SharpChannel& s,
                                             const std::vector<ComplexMatrix>& block_bases,
                                             Tolerance tol = {}) {
  require_square(a, "thm35_block_check");
  if (a.rows() != s.dim())
    throw ShapeMismatch("thm35_block_check: operator dimension differs");
  if (static_cast<int>(block_bases.size()) != s.size())
    throw InvalidBlockBasis("thm35_block_check: need one basis per projection");
  for (int i = 0; i < s.size(); ++i) {
    const ComplexMatrix& v = block_bases[i];
    if (v.rows() != s.dim())
      throw InvalidBlockBasis("thm35_block_check: block basis " + std::to_string(i) +
                              " has wrong row count");
    const double dev = (v * v.adjoint() - s.projection(i)).norm();
    if (dev > tol.eps)
      throw InvalidBlockBasis("thm35_block_check: block basis " + std::to_string(i) +
                              " does not span its projection (residual " +
                              std::to_string(dev) + ")");
  }

  BlockUnbiasedReport rep{true, {}};
  const Complex mean = a.trace() / static_cast<double>(s.dim());
  for (int i = 0; i < s.size(); ++i) {
    const ComplexMatrix& v = block_bases[i];
    const ComplexMatrix block = v.adjoint() * a * v;
    const ComplexMatrix want =
        mean * ComplexMatrix::Identity(block.rows(), block.cols());
    if ((block - want).cwiseAbs().maxCoeff() > tol.eps) {
      rep.unbiased = false;
      rep.violating_blocks.push_back(i);
    }
  }
  if (rep.unbiased != is_unbiased_operator(a, s, tol))
    throw VerdictMismatch("thm35_block_check: block criterion disagrees with "
                          "channel-map criterion");
  return rep;
}

struct StrongUnbiasedReport {
  bool strongly_unbiased;
  std::optional<int> first_failing_power;
};

/// A is strongly unbiased when every power A^m is unbiased. Checking powers
/// 1..n-1 decides all m: unbiasedness is linear in the operator, I is always
/// unbiased, and by Cayley-Hamilton every higher power is a combination of
/// I, A, ..., A^{n-1}.
inline StrongUnbiasedReport is_strongly_unbiased(const ComplexMatrix& a,
                                                 const Channel& ch,
                                                 Tolerance tol = {}) {
  require_square(a, "is_strongly_unbiased");
  if (a.rows() != ch.dim())
    throw ShapeMismatch("is_strongly_unbiased: operator dimension differs");
  const int n = ch.dim();
  ComplexMatrix power = identity(n);
  for (int m = 1; m <= n - 1; ++m) {
    power = power * a;
    if (!is_unbiased_operator(power, ch, tol)) return {false, m};
  }
  return {true, std::nullopt};
}

inline StrongUnbiasedReport is_strongly_unbiased(const ComplexMatrix& a,
                                                 const SharpChannel& s,
                                                 Tolerance tol = {}) {
  return is_strongly_unbiased(a, s.to_channel(tol), tol);
}

inline StrongUnbiasedReport is_strongly_unbiased(const ComplexMatrix& a,
                                                 const Context& ctx,
                                                 Tolerance tol = {}) {
  return is_strongly_unbiased(a, ctx.to_channel(tol), tol);
}

/// Fourier basis psi_k(j) = exp(2 pi i j k / n) / sqrt(n); mutually unbiased
/// with the standard basis in every dimension.
inline Context fourier_context(int n) {
  require_dim(n, "fourier_context");
  ComplexMatrix basis(n, n);
  for (int k = 0; k < n; ++k) basis.col(k) = detail::fourier_vector(n, k);
  return make_context(basis);
}

/// The maximal mutually unbiased triple on C^2: standard, Hadamard-type and
/// circular bases. Pairwise unbiasedness is asserted.
inline std::array<Context, 3> qubit_mub_triple() {
  ComplexMatrix b2(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  b2 << Complex(s, 0), Complex(-s, 0),
        Complex(s, 0), Complex(s, 0);
  ComplexMatrix b3(2, 2);
  b3 << Complex(s, 0), Complex(s, 0),
        Complex(0, s), Complex(0, -s);
  std::array<Context, 3> triple{standard_context(2), make_context(b2),
                                make_context(b3)};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (!mutually_unbiased(triple[i], triple[j]).mutually_unbiased)
        throw VerdictMismatch("qubit_mub_triple: pair " + std::to_string(i) + "," +
                              std::to_string(j) + " not mutually unbiased");
  return triple;
}

}  // namespace qctx
