#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <set>

#include <qctx/qctx.hpp>

#include "testutil.hpp"

using namespace qctx;
using Catch::Approx;

namespace {
const Complex kI(0.0, 1.0);
}

TEST_CASE("identity classifies as projection, unitary, effect") {
  const auto classes = classify(identity(3));
  CHECK(classes.count(OperatorClass::SelfAdjoint) == 1);
  CHECK(classes.count(OperatorClass::Positive) == 1);
  CHECK(classes.count(OperatorClass::Effect) == 1);
  CHECK(classes.count(OperatorClass::Projection) == 1);
  CHECK(classes.count(OperatorClass::Unitary) == 1);
  CHECK(classes.count(OperatorClass::Density) == 0);
  CHECK(classes.count(OperatorClass::RankOneProjection) == 0);
}

TEST_CASE("flip operator is self-adjoint and unitary only") {
  ComplexMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const auto classes = classify(x);
  CHECK(classes ==
        std::set<OperatorClass>{OperatorClass::SelfAdjoint, OperatorClass::Unitary});
}

TEST_CASE("rank-1 projection classifies fully") {
  auto rng = testutil::make_rng(11);
  const ComplexVector v = testutil::random_state(4, rng);
  const auto classes = classify(rank_one_projection(v));
  CHECK(classes.count(OperatorClass::Projection) == 1);
  CHECK(classes.count(OperatorClass::RankOneProjection) == 1);
  CHECK(classes.count(OperatorClass::Density) == 1);
  CHECK(classes.count(OperatorClass::Effect) == 1);
  CHECK(classes.count(OperatorClass::Unitary) == 0);
}

TEST_CASE("random density classifies as density and effect") {
  auto rng = testutil::make_rng(12);
  const ComplexMatrix rho = testutil::random_density(5, rng);
  CHECK(is_class(rho, OperatorClass::Density));
  CHECK(is_class(rho, OperatorClass::Effect));
  CHECK_FALSE(is_class(rho, OperatorClass::Projection));
}

TEST_CASE("zero matrix is a projection but not a density") {
  const ComplexMatrix z = ComplexMatrix::Zero(2, 2);
  CHECK(is_class(z, OperatorClass::Projection));
  CHECK(is_class(z, OperatorClass::Effect));
  CHECK_FALSE(is_class(z, OperatorClass::Density));
}

TEST_CASE("scaled identity above one is positive but not an effect") {
  const ComplexMatrix a = 1.5 * identity(2);
  CHECK(is_class(a, OperatorClass::Positive));
  CHECK_FALSE(is_class(a, OperatorClass::Effect));
}

TEST_CASE("general matrix yields the empty class set") {
  ComplexMatrix g(2, 2);
  g << Complex(1, 2), Complex(0.5, 0), Complex(0, -1), Complex(3, 0.1);
  CHECK(classify(g).empty());
}

TEST_CASE("classify rejects non-square input") {
  CHECK_THROWS_AS(classify(ComplexMatrix::Zero(2, 3)), NonSquare);
}

TEST_CASE("dimension bound is enforced") {
  CHECK_THROWS_AS(require_dim(0, "test"), InvalidDimension);
  CHECK_THROWS_AS(require_dim(-3, "test"), InvalidDimension);
  CHECK_THROWS_AS(require_dim(kMaxDim + 1, "test"), InvalidDimension);
  CHECK_NOTHROW(require_dim(kMaxDim, "test"));
}

TEST_CASE("matrix units have a single entry") {
  const ComplexMatrix e = matrix_unit(3, 1, 2);
  CHECK(e(1, 2) == Complex(1.0, 0.0));
  CHECK(e.norm() == Approx(1.0));
}

TEST_CASE("frobenius distance is a metric on examples") {
  auto rng = testutil::make_rng(13);
  const ComplexMatrix a = testutil::random_ginibre(3, rng);
  const ComplexMatrix b = testutil::random_ginibre(3, rng);
  CHECK(frobenius_distance(a, a) == 0.0);
  CHECK(frobenius_distance(a, b) == Approx(frobenius_distance(b, a)));
  CHECK(frobenius_distance(a, b) > 0.0);
}

TEST_CASE("all_finite flags NaN and infinity") {
  ComplexMatrix a = identity(2);
  CHECK(all_finite(a));
  a(0, 1) = Complex(std::nan(""), 0.0);
  CHECK_FALSE(all_finite(a));
  a(0, 1) = Complex(0.0, INFINITY);
  CHECK_FALSE(all_finite(a));
}

TEST_CASE("hermitian eigensystem reconstructs the operator") {
  auto rng = testutil::make_rng(14);
  const ComplexMatrix a = testutil::random_hermitian(5, rng);
  const Eigensystem es = hermitian_eigensystem(a);

  ComplexMatrix rebuilt = ComplexMatrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i)
    rebuilt += es.values(i) * es.vectors.col(i) * es.vectors.col(i).adjoint();
  CHECK((rebuilt - a).norm() < 1e-12);

  for (int i = 1; i < 5; ++i) CHECK(es.values(i) >= es.values(i - 1));
  CHECK((es.vectors.adjoint() * es.vectors - identity(5)).norm() < 1e-12);
}

TEST_CASE("hermitian eigensystem rejects non-self-adjoint input") {
  ComplexMatrix a(2, 2);
  a << 0, 1, 0, 0;
  CHECK_THROWS_AS(hermitian_eigensystem(a), NotSelfAdjoint);
}

TEST_CASE("eigenvector phases are pinned") {
  auto rng = testutil::make_rng(15);
  const ComplexMatrix a = testutil::random_hermitian(4, rng);
  const Eigensystem es = hermitian_eigensystem(a);
  for (int i = 0; i < 4; ++i) {
    const ComplexVector v = es.vectors.col(i);
    int best = 0;
    for (int r = 1; r < 4; ++r)
      if (std::abs(v(r)) > std::abs(v(best))) best = r;
    CHECK(v(best).imag() == Approx(0.0).margin(1e-14));
    CHECK(v(best).real() > 0.0);
  }
}

TEST_CASE("rank_one_projection normalizes its input vector") {
  ComplexVector v(2);
  v << 2.0, 0.0;
  const ComplexMatrix p = rank_one_projection(v);
  ComplexMatrix want(2, 2);
  want << 1, 0, 0, 0;
  CHECK((p - want).norm() < 1e-15);
  CHECK(is_class(p, OperatorClass::RankOneProjection));
}

TEST_CASE("random unitary is deterministic and unitary") {
  const ComplexMatrix u1 = random_unitary(6, 42);
  const ComplexMatrix u2 = random_unitary(6, 42);
  const ComplexMatrix u3 = random_unitary(6, 43);
  CHECK(u1 == u2);
  CHECK(u1 != u3);
  CHECK((u1.adjoint() * u1 - identity(6)).norm() < 1e-12);
  CHECK((u1 * u1.adjoint() - identity(6)).norm() < 1e-12);
}

TEST_CASE("operator class names are stable") {
  CHECK(to_string(OperatorClass::SelfAdjoint) == "self-adjoint");
  CHECK(to_string(OperatorClass::RankOneProjection) == "rank-one-projection");
  CHECK(to_string(OperatorClass::Unitary) == "unitary");
}

TEST_CASE("tolerance widens class membership") {
  ComplexMatrix almost = identity(2);
  almost(0, 0) += 1e-6;
  CHECK_FALSE(is_class(almost, OperatorClass::Projection, Tolerance{1e-9}));
  CHECK(is_class(almost, OperatorClass::Projection, Tolerance{1e-4}));
}
