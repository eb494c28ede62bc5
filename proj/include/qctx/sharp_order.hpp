#pragma once

// Sharp channels (projection branches), contexts (rank-1 sharp channels),
// the classification checks that separate them, and the refinement partial
// order on sharp channels.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qctx/channel.hpp"
#include "qctx/errors.hpp"
#include "qctx/opcore.hpp"

namespace qctx {

class SharpChannel {
 public:
  int dim() const { return dim_; }
  const std::vector<ComplexMatrix>& projections() const { return projections_; }
  const ComplexMatrix& projection(int i) const { return projections_.at(i); }
  int size() const { return static_cast<int>(projections_.size()); }

  Channel to_channel(Tolerance tol = {}) const {
    return make_channel(projections_, tol);
  }

  friend SharpChannel make_sharp_channel(std::vector<ComplexMatrix> projections,
                                         Tolerance tol);

 private:
  SharpChannel(int dim, std::vector<ComplexMatrix> projections)
      : dim_(dim), projections_(std::move(projections)) {}

  int dim_;
  std::vector<ComplexMatrix> projections_;
};

/// Validates projection branches, completeness (sum = I) and pairwise
/// orthogonality.
inline SharpChannel make_sharp_channel(std::vector<ComplexMatrix> projections,
                                       Tolerance tol = {}) {
  if (projections.empty()) throw ZeroBranch("make_sharp_channel: no projections");
  const int n = static_cast<int>(projections.front().rows());
  require_dim(n, "make_sharp_channel");
  for (std::size_t i = 0; i < projections.size(); ++i) {
    require_square(projections[i], "make_sharp_channel");
    if (projections[i].rows() != n)
      throw ShapeMismatch("make_sharp_channel: projection dimensions differ");
    if (!is_class(projections[i], OperatorClass::Projection, tol))
      throw NotSharp("make_sharp_channel: branch " + std::to_string(i) +
                         " is not a projection",
                     static_cast<int>(i));
  }
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (const auto& p : projections) sum += p;
  const double dev = (sum - identity(n)).norm();
  if (dev > tol.eps)
    throw UnitalityViolation("make_sharp_channel: ||sum P - I||_F = " +
                             std::to_string(dev));
  for (std::size_t i = 0; i < projections.size(); ++i)
    for (std::size_t j = i + 1; j < projections.size(); ++j)
      if ((projections[i] * projections[j]).norm() > tol.eps)
        throw UnitalityViolation("make_sharp_channel: projections " +
                                 std::to_string(i) + ", " + std::to_string(j) +
                                 " are not orthogonal");
  return SharpChannel(n, std::move(projections));
}

class Context {
 public:
  int dim() const { return dim_; }
  /// Orthonormal basis vectors as the columns of an n x n matrix.
  const ComplexMatrix& basis() const { return basis_; }
  ComplexVector basis_vector(int i) const { return basis_.col(i); }
  ComplexMatrix projection(int i) const {
    return basis_.col(i) * basis_.col(i).adjoint();
  }

  SharpChannel to_sharp(Tolerance tol = {}) const {
    std::vector<ComplexMatrix> ps;
    ps.reserve(dim_);
    for (int i = 0; i < dim_; ++i) ps.push_back(projection(i));
    return make_sharp_channel(std::move(ps), tol);
  }

  Channel to_channel(Tolerance tol = {}) const {
    std::vector<ComplexMatrix> ps;
    ps.reserve(dim_);
    for (int i = 0; i < dim_; ++i) ps.push_back(projection(i));
    return make_channel(std::move(ps), tol);
  }

  friend Context make_context(const ComplexMatrix& basis, Tolerance tol);

 private:
  Context(int dim, ComplexMatrix basis) : dim_(dim), basis_(std::move(basis)) {}

  int dim_;
  ComplexMatrix basis_;
};

/// Builds a context from basis vectors given as matrix columns; requires
/// exactly n orthonormal vectors.
inline Context make_context(const ComplexMatrix& basis, Tolerance tol = {}) {
  const int n = static_cast<int>(basis.rows());
  require_dim(n, "make_context");
  if (basis.cols() != n)
    throw ShapeMismatch("make_context: need exactly " + std::to_string(n) +
                        " basis vectors, got " + std::to_string(basis.cols()));
  const ComplexMatrix gram = basis.adjoint() * basis;
  const double dev = (gram - identity(n)).cwiseAbs().maxCoeff();
  if (dev > tol.eps)
    throw NotUnitVector("make_context: basis not orthonormal, max |<phi_i,phi_j> - delta| = " +
                        std::to_string(dev));
  return Context(n, basis);
}

inline Context standard_context(int n) {
  return make_context(identity(n));
}

inline ComplexMatrix apply_map(const SharpChannel& s, const ComplexMatrix& a) {
  return apply_map(s.to_channel(), a);
}

inline ComplexMatrix apply_map(const Context& c, const ComplexMatrix& a) {
  return apply_map(c.to_channel(), a);
}

/// Matches two lists of matrices up to permutation at Frobenius distance
/// <= eps (exact bipartite matching; branch lists are short).
inline bool branch_sets_equal(const std::vector<ComplexMatrix>& a,
                              const std::vector<ComplexMatrix>& b, double eps) {
  if (a.size() != b.size()) return false;
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((a[i] - b[j]).norm() <= eps) adj[i].push_back(j);
  std::vector<int> match_of(n, -1);
  std::vector<char> used;
  // Kuhn's augmenting paths.
  std::function<bool(int)> try_match = [&](int i) -> bool {
    for (int j : adj[i]) {
      if (used[j]) continue;
      used[j] = 1;
      if (match_of[j] < 0 || try_match(match_of[j])) {
        match_of[j] = i;
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i < n; ++i) {
    used.assign(n, 0);
    if (!try_match(i)) return false;
  }
  return true;
}

inline bool sharp_channels_equal(const SharpChannel& a, const SharpChannel& b,
                                 Tolerance tol = {}) {
  return branch_sets_equal(a.projections(), b.projections(), tol.eps);
}

/// Context equality is equality of the rank-1 projection sets; basis vectors
/// are only defined up to phase and ordering.
inline bool contexts_equal(const Context& a, const Context& b, Tolerance tol = {}) {
  if (a.dim() != b.dim()) return false;
  return sharp_channels_equal(a.to_sharp(tol), b.to_sharp(tol), tol);
}

/// Reinterprets a channel as a sharp channel; fails with the index of the
/// first branch that is not a projection. Idempotence of the map (L o L = L)
/// is checked as a sanity assertion.
inline SharpChannel as_sharp(const Channel& ch, Tolerance tol = {}) {
  for (int i = 0; i < ch.branch_count(); ++i)
    if (!is_class(ch.branch(i), OperatorClass::Projection, tol))
      throw NotSharp("as_sharp: branch " + std::to_string(i) + " is not a projection", i);
  SharpChannel s = make_sharp_channel(ch.branches(), tol);
  if (!maps_equal(compose(ch, ch, tol), ch, tol))
    throw VerdictMismatch("as_sharp: sharp channel map is not idempotent");
  return s;
}

/// Extracts the basis of a rank-1 sharp channel; fails with the index of the
/// first projection whose trace is not 1.
inline Context as_context(const SharpChannel& s, Tolerance tol = {}) {
  std::vector<ComplexVector> vectors;
  vectors.reserve(s.size());
  for (int i = 0; i < s.size(); ++i) {
    const double tr = s.projection(i).trace().real();
    if (std::abs(tr - 1.0) > tol.eps)
      throw NotRankOne("as_context: projection " + std::to_string(i) +
                           " has trace " + std::to_string(tr),
                       i);
    // Unit eigenvector for eigenvalue 1, phase-normalized.
    Eigensystem es = hermitian_eigensystem(s.projection(i), tol);
    vectors.push_back(es.vectors.col(s.dim() - 1));
  }
  ComplexMatrix basis(s.dim(), s.size());
  for (int i = 0; i < s.size(); ++i) basis.col(i) = vectors[i];
  return make_context(basis, tol);
}

namespace detail {

inline ComplexVector random_unit_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return v / v.norm();
}

}  // namespace detail

/// Decides whether a sharp channel is a context by the rank-1 test and
/// cross-validates with the commutation criterion: a sharp channel is a
/// context iff the images of any two rank-1 projections under its map
/// commute. Tests `trials` seeded random pairs plus, for every branch of
/// rank >= 2, a constructed non-commuting pair inside that branch's range.
inline bool context_via_commutation(const SharpChannel& s, int trials,
                                    std::uint64_t seed, Tolerance tol = {}) {
  bool rank_one = true;
  for (int i = 0; i < s.size(); ++i)
    if (std::abs(s.projection(i).trace().real() - 1.0) > tol.eps) rank_one = false;

  const Channel ch = s.to_channel(tol);
  bool all_commute = true;
  std::string witness;
  auto check_pair = [&](const ComplexMatrix& p, const ComplexMatrix& q,
                        const std::string& origin) {
    const ComplexMatrix lp = apply_map(ch, p);
    const ComplexMatrix lq = apply_map(ch, q);
    if ((lp * lq - lq * lp).norm() > tol.eps && all_commute) {
      all_commute = false;
      witness = origin;
    }
  };

  // Constructed witnesses from the ranges of higher-rank branches.
  for (int i = 0; i < s.size(); ++i) {
    if (s.projection(i).trace().real() < 2.0 - tol.eps) continue;
    Eigensystem es = hermitian_eigensystem(s.projection(i), tol);
    const ComplexVector u = es.vectors.col(s.dim() - 1);
    const ComplexVector w = es.vectors.col(s.dim() - 2);
    ComplexVector mixed = (u + w) / std::sqrt(2.0);
    check_pair(rank_one_projection(u), rank_one_projection(mixed),
               "range of branch " + std::to_string(i));
  }
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const ComplexVector u = detail::random_unit_vector(s.dim(), rng);
    const ComplexVector v = detail::random_unit_vector(s.dim(), rng);
    check_pair(rank_one_projection(u), rank_one_projection(v),
               "sampled pair " + std::to_string(t));
  }

  if (rank_one != all_commute)
    throw VerdictMismatch("context_via_commutation: rank-1 test says " +
                          std::string(rank_one ? "context" : "not a context") +
                          " but commutation sampling disagrees (witness: " +
                          (witness.empty() ? std::string("none") : witness) + ")");
  return rank_one;
}

namespace detail {

// Orthonormal basis with first column phi; remaining columns greedily chosen
// from the standard basis by largest orthogonal residual.
inline ComplexMatrix complete_orthonormal_basis(const ComplexVector& phi) {
  const int n = static_cast<int>(phi.size());
  ComplexMatrix basis(n, n);
  basis.col(0) = phi / phi.norm();
  std::vector<char> taken(n, 0);
  for (int k = 1; k < n; ++k) {
    int best = -1;
    double best_norm = -1.0;
    ComplexVector best_vec;
    for (int j = 0; j < n; ++j) {
      if (taken[j]) continue;
      ComplexVector v = ComplexVector::Zero(n);
      v(j) = 1.0;
      for (int c = 0; c < k; ++c) v -= (basis.col(c).adjoint() * v)(0) * basis.col(c);
      const double nn = v.norm();
      if (nn > best_norm) {
        best_norm = nn;
        best = j;
        best_vec = v / nn;
      }
    }
    taken[best] = 1;
    // One reorthogonalization pass.
    for (int c = 0; c < k; ++c)
      best_vec -= (basis.col(c).adjoint() * best_vec)(0) * basis.col(c);
    basis.col(k) = best_vec / best_vec.norm();
  }
  return basis;
}

}  // namespace detail

/// If A and B differ, returns a context whose map separates them; contexts
/// distinguish operators. The separating basis starts from the eigenvector,
/// over both Hermitian parts of A - B, with the largest diagonal expectation.
inline std::optional<Context> find_distinguishing_context(const ComplexMatrix& a,
                                                          const ComplexMatrix& b,
                                                          Tolerance tol = {}) {
  require_same_shape(a, b, "find_distinguishing_context");
  require_square(a, "find_distinguishing_context");
  const ComplexMatrix d = a - b;
  if (d.norm() <= tol.eps) return std::nullopt;
  const int n = static_cast<int>(a.rows());
  const ComplexMatrix h1 = 0.5 * (d + d.adjoint());
  const ComplexMatrix h2 = (d - d.adjoint()) / Complex(0.0, 2.0);

  ComplexVector best_phi;
  double best_val = -1.0;
  for (const ComplexMatrix* h : {&h1, &h2}) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(*h);
    for (int k = 0; k < n; ++k) {
      const ComplexVector v = es.eigenvectors().col(k);
      const double val = std::abs((v.adjoint() * d * v)(0));
      if (val > best_val) {
        best_val = val;
        best_phi = v;
      }
    }
  }
  Context ctx = make_context(detail::complete_orthonormal_basis(best_phi), tol);
  if ((apply_map(ctx, a) - apply_map(ctx, b)).norm() <= tol.eps)
    throw VerdictMismatch(
        "find_distinguishing_context: constructed context fails to separate "
        "(||A - B||_F barely above tolerance)");
  return ctx;
}

struct ContextMapsEqualReport {
  bool equal;
  bool condition_holds;
  /// Pairs (j, k) with <psi_k, phi_j> != 0 but differing diagonal expectations.
  std::vector<std::pair<int, int>> witnesses;
};

/// L_A(X) = L_B(X) for contexts A, B iff the diagonal expectations of X agree
/// on every pair of basis vectors with nonzero overlap. Both routes are
/// computed and must agree.
inline ContextMapsEqualReport context_maps_equal_on(const Context& actx,
                                                    const Context& bctx,
                                                    const ComplexMatrix& x,
                                                    Tolerance tol = {}) {
  if (actx.dim() != bctx.dim())
    throw ShapeMismatch("context_maps_equal_on: context dimensions differ");
  require_square(x, "context_maps_equal_on");
  if (x.rows() != actx.dim())
    throw ShapeMismatch("context_maps_equal_on: operator dimension differs");

  ContextMapsEqualReport rep{};
  rep.equal = (apply_map(actx, x) - apply_map(bctx, x)).norm() <= tol.eps;

  const int n = actx.dim();
  rep.condition_holds = true;
  for (int j = 0; j < n; ++j) {
    const ComplexVector phi = actx.basis_vector(j);
    const Complex da = (phi.adjoint() * x * phi)(0);
    for (int k = 0; k < n; ++k) {
      const ComplexVector psi = bctx.basis_vector(k);
      if (std::abs((psi.adjoint() * phi)(0)) <= tol.eps) continue;
      const Complex db = (psi.adjoint() * x * psi)(0);
      if (std::abs(da - db) > tol.eps) {
        rep.condition_holds = false;
        rep.witnesses.emplace_back(j, k);
      }
    }
  }
  if (rep.equal != rep.condition_holds)
    throw VerdictMismatch("context_maps_equal_on: map comparison and diagonal "
                          "condition disagree");
  return rep;
}

struct SharpLeReport {
  bool le;
  /// For each B-projection index, the A-projection indices that sum to it.
  std::map<int, std::vector<int>> decomposition;
};

/// Refinement order: A <= B iff every projection of A sits under some
/// projection of B (P <= Q as QP = P). When the order holds, each Q in B
/// decomposes as the sum of the A-projections under it.
inline SharpLeReport sharp_le(const SharpChannel& a, const SharpChannel& b,
                              Tolerance tol = {}) {
  if (a.dim() != b.dim()) throw ShapeMismatch("sharp_le: channel dimensions differ");
  SharpLeReport rep{};
  rep.le = true;
  for (int i = 0; i < a.size() && rep.le; ++i) {
    bool found = false;
    for (int j = 0; j < b.size() && !found; ++j)
      if ((b.projection(j) * a.projection(i) - a.projection(i)).norm() <= tol.eps)
        found = true;
    if (!found) rep.le = false;
  }
  if (!rep.le) return rep;
  for (int j = 0; j < b.size(); ++j) {
    std::vector<int> under;
    ComplexMatrix sum = ComplexMatrix::Zero(a.dim(), a.dim());
    for (int i = 0; i < a.size(); ++i) {
      if ((b.projection(j) * a.projection(i) - a.projection(i)).norm() <= tol.eps) {
        under.push_back(i);
        sum += a.projection(i);
      }
    }
    if ((sum - b.projection(j)).norm() > tol.eps)
      throw DecompositionFailure("sharp_le: order holds but projections under B[" +
                                 std::to_string(j) + "] do not sum to it");
    rep.decomposition[j] = std::move(under);
  }
  return rep;
}

struct ProductsCommuteReport {
  bool channels_commute;
  bool pairwise;
  bool product_sharp;
};

/// For sharp channels, the product channels AB and BA coincide iff all branch
/// pairs commute iff the product channel is again sharp. All three are
/// computed independently and must agree.
inline ProductsCommuteReport products_commute(const SharpChannel& a,
                                              const SharpChannel& b,
                                              Tolerance tol = {}) {
  if (a.dim() != b.dim())
    throw ShapeMismatch("products_commute: channel dimensions differ");
  ProductsCommuteReport rep{};

  rep.pairwise = true;
  for (const auto& p : a.projections())
    for (const auto& q : b.projections())
      if ((p * q - q * p).norm() > tol.eps) rep.pairwise = false;

  const Channel ab = compose(a.to_channel(tol), b.to_channel(tol), tol);
  const Channel ba = compose(b.to_channel(tol), a.to_channel(tol), tol);
  rep.channels_commute = branch_sets_equal(ab.branches(), ba.branches(), tol.eps);

  rep.product_sharp = channel_is_sharp(ab, tol);

  if (rep.channels_commute != rep.pairwise || rep.pairwise != rep.product_sharp)
    throw VerdictMismatch("products_commute: the three equivalent criteria disagree");
  return rep;
}

/// Contexts are minimal for the refinement order: any sharp channel below a
/// context equals it. Returns whether that implication holds for this pair.
inline bool context_minimal_check(const Context& actx, const SharpChannel& b,
                                  Tolerance tol = {}) {
  const SharpChannel a = actx.to_sharp(tol);
  if (!sharp_le(b, a, tol).le) return true;  // vacuous
  return sharp_channels_equal(b, a, tol);
}

}  // namespace qctx
