#pragma once

// Unital channels {M_i} with sum M_i* M_i = sum M_i M_i* = I, their channel
// maps L(A) = sum M_i* A M_i, products, and the completely random channel.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qctx/errors.hpp"
#include "qctx/opcore.hpp"

namespace qctx {

class Channel {
 public:
  int dim() const { return dim_; }
  const std::vector<ComplexMatrix>& branches() const { return branches_; }
  const ComplexMatrix& branch(int i) const { return branches_.at(i); }
  int branch_count() const { return static_cast<int>(branches_.size()); }

  friend Channel make_channel(std::vector<ComplexMatrix> branches, Tolerance tol);

 private:
  Channel(int dim, std::vector<ComplexMatrix> branches)
      : dim_(dim), branches_(std::move(branches)) {}

  int dim_;
  std::vector<ComplexMatrix> branches_;
};

/// Validates and builds a unital channel. Rejects zero branches and branch
/// sums deviating from the identity on either side.
inline Channel make_channel(std::vector<ComplexMatrix> branches, Tolerance tol = {}) {
  if (branches.empty()) throw ZeroBranch("make_channel: no branches");
  const int n = static_cast<int>(branches.front().rows());
  require_dim(n, "make_channel");
  for (const auto& m : branches) {
    require_square(m, "make_channel");
    if (m.rows() != n) throw ShapeMismatch("make_channel: branch dimensions differ");
  }
  for (std::size_t i = 0; i < branches.size(); ++i)
    if (branches[i].norm() <= tol.eps)
      throw ZeroBranch("make_channel: branch " + std::to_string(i) + " is zero");
  ComplexMatrix left = ComplexMatrix::Zero(n, n);
  ComplexMatrix right = ComplexMatrix::Zero(n, n);
  for (const auto& m : branches) {
    left += m.adjoint() * m;
    right += m * m.adjoint();
  }
  const ComplexMatrix eye = identity(n);
  const double left_dev = (left - eye).norm();
  const double right_dev = (right - eye).norm();
  if (left_dev > tol.eps || right_dev > tol.eps)
    throw UnitalityViolation("make_channel: ||sum M*M - I||_F = " +
                             std::to_string(left_dev) + ", ||sum MM* - I||_F = " +
                             std::to_string(right_dev));
  return Channel(n, std::move(branches));
}

inline Channel identity_channel(int n) {
  return make_channel({identity(n)});
}

/// The channel map L(A) = sum_i M_i* A M_i.
inline ComplexMatrix apply_map(const Channel& ch, const ComplexMatrix& a) {
  require_square(a, "apply_map");
  if (a.rows() != ch.dim()) throw ShapeMismatch("apply_map: operator dimension differs");
  ComplexMatrix out = ComplexMatrix::Zero(ch.dim(), ch.dim());
  for (const auto& m : ch.branches()) out += m.adjoint() * a * m;
  return out;
}

struct ChannelMapReport {
  ComplexMatrix input;
  ComplexMatrix output;
  Complex trace_in;
  Complex trace_out;
};

/// apply_map plus the trace bookkeeping; checks trace preservation.
inline ChannelMapReport apply_map_report(const Channel& ch, const ComplexMatrix& a,
                                         Tolerance tol = {}) {
  ChannelMapReport rep{a, apply_map(ch, a), a.trace(), {}};
  rep.trace_out = rep.output.trace();
  const double dev = std::abs(rep.trace_in - rep.trace_out);
  if (dev > tol.eps * (1.0 + std::abs(rep.trace_in)))
    throw VerdictMismatch("apply_map_report: trace not preserved, |dtr| = " +
                          std::to_string(dev));
  return rep;
}

/// Product channel "a then b" with branches {M_i N_j}, zero products dropped.
/// The induced map composes as L_{ab}(X) = L_b(L_a(X)).
inline Channel compose(const Channel& a, const Channel& b, Tolerance tol = {}) {
  if (a.dim() != b.dim()) throw ShapeMismatch("compose: channel dimensions differ");
  std::vector<ComplexMatrix> products;
  products.reserve(a.branches().size() * b.branches().size());
  for (const auto& m : a.branches())
    for (const auto& n : b.branches()) {
      ComplexMatrix p = m * n;
      if (p.norm() > tol.eps) products.push_back(std::move(p));
    }
  return make_channel(std::move(products), tol);
}

/// Channel maps are equal iff they agree on all n^2 matrix units.
inline bool maps_equal(const Channel& a, const Channel& b, Tolerance tol = {}) {
  if (a.dim() != b.dim()) throw ShapeMismatch("maps_equal: channel dimensions differ");
  const int n = a.dim();
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s) {
      const ComplexMatrix e = matrix_unit(n, r, s);
      if ((apply_map(a, e) - apply_map(b, e)).norm() > tol.eps) return false;
    }
  return true;
}

/// A is measurable with respect to the channel iff it commutes with every branch.
inline bool is_measurable(const ComplexMatrix& a, const Channel& ch, Tolerance tol = {}) {
  require_square(a, "is_measurable");
  if (a.rows() != ch.dim()) throw ShapeMismatch("is_measurable: operator dimension differs");
  for (const auto& m : ch.branches())
    if ((a * m - m * a).norm() > tol.eps) return false;
  return true;
}

/// True iff every branch is a projection, i.e. the channel is sharp.
inline bool channel_is_sharp(const Channel& ch, Tolerance tol = {}) {
  for (const auto& m : ch.branches())
    if (!is_class(m, OperatorClass::Projection, tol)) return false;
  return true;
}

struct FixedPointReport {
  bool measurable;
  bool fixed;
};

/// Reports whether A commutes with all branches and whether L(A) = A.
/// Measurability must imply the fixed point, and for sharp channels the
/// converse must hold as well; a violation is a tolerance pathology.
inline FixedPointReport fixed_point_check(const ComplexMatrix& a, const Channel& ch,
                                          Tolerance tol = {}) {
  FixedPointReport rep{};
  rep.measurable = is_measurable(a, ch, tol);
  rep.fixed = (apply_map(ch, a) - a).norm() <= tol.eps;
  if (rep.measurable && !rep.fixed)
    throw VerdictMismatch("fixed_point_check: measurable operator is not a fixed point");
  if (rep.fixed && !rep.measurable && channel_is_sharp(ch, tol))
    throw VerdictMismatch("fixed_point_check: fixed point of sharp channel not measurable");
  return rep;
}

namespace detail {

// k-th Fourier basis vector, components exp(2*pi*i*j*k/n)/sqrt(n).
inline ComplexVector fourier_vector(int n, int k) {
  ComplexVector v(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    const double angle = 2.0 * std::numbers::pi * j * k / n;
    v(j) = Complex(std::cos(angle), std::sin(angle)) * scale;
  }
  return v;
}

}  // namespace detail

/// The completely random channel {|psi_j><phi_i| / sqrt(n)} built from the
/// standard basis phi and the Fourier basis psi (a mutually unbiased pair).
/// Its map sends every A to tr(A) I / n.
inline Channel completely_random_channel(int n) {
  require_dim(n, "completely_random_channel");
  std::vector<ComplexMatrix> branches;
  branches.reserve(static_cast<std::size_t>(n) * n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    ComplexVector phi = ComplexVector::Zero(n);
    phi(i) = 1.0;
    for (int j = 0; j < n; ++j)
      branches.push_back(scale * detail::fourier_vector(n, j) * phi.adjoint());
  }
  return make_channel(std::move(branches));
}

/// The completely random channel map R(A) = tr(A) I / n, computed exactly.
inline ComplexMatrix random_map_apply(const ComplexMatrix& a) {
  require_square(a, "random_map_apply");
  const int n = static_cast<int>(a.rows());
  return (a.trace() / static_cast<double>(n)) * identity(n);
}

}  // namespace qctx
