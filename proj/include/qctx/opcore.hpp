#pragma once

// Dense complex matrix arithmetic and the operator-class predicates the rest
// of the library builds on. Exact operator equalities become Frobenius-norm
// comparisons against a Tolerance.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <set>
#include <string>

#include "qctx/errors.hpp"

namespace qctx {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Largest supported Hilbert-space dimension.
inline constexpr int kMaxDim = 256;

/// Numerical slack used wherever the underlying theory states an equality.
struct Tolerance {
  double eps = 1e-9;
};

enum class OperatorClass {
  General,
  SelfAdjoint,
  Positive,
  Effect,
  Projection,
  Density,
  Unitary,
  RankOneProjection,
};

inline std::string to_string(OperatorClass c) {
  switch (c) {
    case OperatorClass::General: return "general";
    case OperatorClass::SelfAdjoint: return "self-adjoint";
    case OperatorClass::Positive: return "positive";
    case OperatorClass::Effect: return "effect";
    case OperatorClass::Projection: return "projection";
    case OperatorClass::Density: return "density";
    case OperatorClass::Unitary: return "unitary";
    case OperatorClass::RankOneProjection: return "rank-one-projection";
  }
  return "general";
}

inline void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols())
    throw NonSquare(std::string(what) + ": matrix is " + std::to_string(a.rows()) +
                    "x" + std::to_string(a.cols()));
}

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b,
                               const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch(std::string(what) + ": shapes " + std::to_string(a.rows()) +
                        "x" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

inline void require_dim(int n, const char* what) {
  if (n < 1 || n > kMaxDim)
    throw InvalidDimension(std::string(what) + ": dimension " + std::to_string(n) +
                           " outside [1, " + std::to_string(kMaxDim) + "]");
}

inline bool all_finite(const ComplexMatrix& a) {
  return a.allFinite();
}

/// Frobenius distance between equally shaped matrices.
inline double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "frobenius_distance");
  return (a - b).norm();
}

inline ComplexMatrix identity(int n) { return ComplexMatrix::Identity(n, n); }

/// Matrix unit E_rs (1 at row r, column s). The n^2 matrix units span B(H),
/// so linear-map equalities are tested on them.
inline ComplexMatrix matrix_unit(int n, int r, int s) {
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  e(r, s) = 1.0;
  return e;
}

/// Rank-1 projection |phi><phi| onto the (not necessarily unit) vector phi.
inline ComplexMatrix rank_one_projection(const ComplexVector& phi) {
  const double nrm2 = phi.squaredNorm();
  return (phi * phi.adjoint()) / nrm2;
}

namespace detail {

// Deterministic phase fix: rotate so the largest-magnitude component is real
// positive. Ties go to the first such component.
inline void normalize_phase(Eigen::Ref<ComplexVector> v) {
  int best = 0;
  double best_mag = std::abs(v(0));
  for (int i = 1; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    if (m > best_mag) {
      best = i;
      best_mag = m;
    }
  }
  if (best_mag == 0.0) return;
  v *= std::conj(v(best)) / best_mag;
}

}  // namespace detail

struct Eigensystem {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // orthonormal columns, phase-normalized
};

/// Eigendecomposition of a self-adjoint matrix. Eigenvalues ascend; each
/// eigenvector has its largest-magnitude component made real positive so the
/// output is deterministic.
inline Eigensystem hermitian_eigensystem(const ComplexMatrix& a,
                                         Tolerance tol = {}) {
  require_square(a, "hermitian_eigensystem");
  const double dev = (a - a.adjoint()).norm();
  if (dev > tol.eps)
    throw NotSelfAdjoint("hermitian_eigensystem: ||A - A*||_F = " +
                         std::to_string(dev));
  ComplexMatrix herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm);
  Eigensystem out{es.eigenvalues(), es.eigenvectors()};
  for (int k = 0; k < out.vectors.cols(); ++k)
    detail::normalize_phase(out.vectors.col(k));
  return out;
}

/// Every operator class whose defining predicate holds within tol. The
/// General tag is never emitted; an unstructured matrix yields the empty set.
inline std::set<OperatorClass> classify(const ComplexMatrix& a, Tolerance tol = {}) {
  require_square(a, "classify");
  const double eps = tol.eps;
  const int n = static_cast<int>(a.rows());
  std::set<OperatorClass> out;

  const bool self_adjoint = (a - a.adjoint()).norm() <= eps;
  if (self_adjoint) out.insert(OperatorClass::SelfAdjoint);

  bool positive = false;
  double max_eig = 0.0;
  if (self_adjoint) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (a + a.adjoint()),
                                                    Eigen::EigenvaluesOnly);
    positive = es.eigenvalues().minCoeff() >= -eps;
    max_eig = es.eigenvalues().maxCoeff();
  }
  if (positive) out.insert(OperatorClass::Positive);
  if (positive && max_eig <= 1.0 + eps) out.insert(OperatorClass::Effect);

  const bool projection = self_adjoint && (a * a - a).norm() <= eps;
  if (projection) out.insert(OperatorClass::Projection);

  const double trace_dev = std::abs(a.trace() - Complex(1.0, 0.0));
  if (positive && trace_dev <= eps) out.insert(OperatorClass::Density);
  if (projection && trace_dev <= eps) out.insert(OperatorClass::RankOneProjection);

  const ComplexMatrix eye = identity(n);
  if ((a.adjoint() * a - eye).norm() <= eps && (a * a.adjoint() - eye).norm() <= eps)
    out.insert(OperatorClass::Unitary);

  return out;
}

inline bool is_class(const ComplexMatrix& a, OperatorClass c, Tolerance tol = {}) {
  return classify(a, tol).count(c) > 0;
}

/// Haar-style random unitary: seeded complex Gaussian matrix orthonormalized
/// by Householder QR, column phases fixed so diag(R) is real positive.
/// Deterministic for a fixed seed.
inline ComplexMatrix random_unitary(int n, std::uint64_t seed) {
  require_dim(n, "random_unitary");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k) {
    const Complex d = r(k, k);
    const double m = std::abs(d);
    if (m > 0.0) q.col(k) *= d / m;
  }
  return q;
}

}  // namespace qctx
