#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <qctx/qctx.hpp>

#include "testutil.hpp"

using namespace qctx;
using Catch::Approx;

namespace {

std::string fixture(const std::string& name) {
  return std::string(QCTX_FIXTURES_DIR) + "/" + name;
}

Context load_context(const std::string& name) {
  return context_from_json(load_json(fixture(name)));
}

ComplexMatrix load_matrix(const std::string& name) {
  return matrix_from_json(load_json(fixture(name)));
}

// Operators with constant diagonal in the context basis are exactly the
// unbiased ones; conjugating a constant-diagonal matrix back gives samples.
ComplexMatrix random_unbiased_operator(const Context& ctx, std::mt19937_64& rng) {
  const int n = ctx.dim();
  ComplexMatrix in_basis = testutil::random_ginibre(n, rng);
  const Complex mean = in_basis.trace() / static_cast<double>(n);
  for (int i = 0; i < n; ++i) in_basis(i, i) = mean;
  return ctx.basis() * in_basis * ctx.basis().adjoint();
}

}  // namespace

TEST_CASE("vector unbiasedness is the flat transition profile") {
  const Context std2 = standard_context(2);
  ComplexVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(is_unbiased_vector(plus, std2));

  CHECK_FALSE(is_unbiased_vector(standard_context(2).basis_vector(0), std2));

  ComplexVector tilted(2);
  tilted << std::sqrt(3.0) / 2.0, 0.5;
  CHECK_FALSE(is_unbiased_vector(tilted, std2));

  CHECK_THROWS_AS(is_unbiased_vector(2.0 * plus, std2), NotUnitVector);
  ComplexVector wrong(3);
  wrong << 1, 0, 0;
  CHECK_THROWS_AS(is_unbiased_vector(wrong, std2), ShapeMismatch);
}

TEST_CASE("standard and Fourier bases are mutually unbiased in every dimension") {
  for (int n = 2; n <= 5; ++n) {
    const MubVerdict v = mutually_unbiased(standard_context(n), fourier_context(n));
    CHECK(v.mutually_unbiased);
    for (int i = 0; i < n; ++i) {
      double row = 0.0, col = 0.0;
      for (int j = 0; j < n; ++j) {
        CHECK(v.transition_matrix(i, j) == Approx(1.0 / n).margin(1e-12));
        row += v.transition_matrix(i, j);
        col += v.transition_matrix(j, i);
      }
      CHECK(row == Approx(1.0).margin(1e-12));
      CHECK(col == Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("a context is not unbiased with itself") {
  const Context std3 = standard_context(3);
  const MubVerdict v = mutually_unbiased(std3, std3);
  CHECK_FALSE(v.mutually_unbiased);
  CHECK((v.transition_matrix - RealMatrix::Identity(3, 3)).norm() < 1e-12);

  CHECK_THROWS_AS(mutually_unbiased(std3, standard_context(2)), ShapeMismatch);
}

TEST_CASE("the qubit triple is pairwise unbiased") {
  const auto triple = qubit_mub_triple();
  for (int i = 0; i < 3; ++i) {
    CHECK(triple[static_cast<std::size_t>(i)].dim() == 2);
    for (int j = i + 1; j < 3; ++j) {
      const MubVerdict v = mutually_unbiased(triple[static_cast<std::size_t>(i)],
                                             triple[static_cast<std::size_t>(j)]);
      CHECK(v.mutually_unbiased);
      CHECK(v.transition_matrix.maxCoeff() == Approx(0.5).margin(1e-12));
    }
  }
}

TEST_CASE("unbiasedness survives a shared change of basis") {
  auto rng = testutil::make_rng(60);
  for (int n = 2; n <= 4; ++n) {
    const ComplexMatrix u = testutil::random_unitary(n, rng);
    const Context a = make_context(u * standard_context(n).basis());
    const Context b = make_context(u * fourier_context(n).basis());
    CHECK(mutually_unbiased(a, b).mutually_unbiased);
  }
}

TEST_CASE("commuting-map criterion accepts the unbiased pair") {
  const Context a = load_context("example1_A.json");
  const Context b = load_context("example1_B.json");
  const Eq31Report rep = eq31_check(a, b);
  CHECK(rep.holds);
  CHECK(rep.off_diagonal_residual <= 1e-12);
  CHECK(rep.diagonal_residual <= 1e-12);

  const MubVerdict v = mutually_unbiased(a, b);
  CHECK(v.mutually_unbiased);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(v.transition_matrix(i, j) - 0.5) <= 1e-12);
}

TEST_CASE("commuting-map criterion rejects the tilted pair with known residuals") {
  const Context a = load_context("example2_A.json");
  const Context b = load_context("example2_B.json");

  const Complex off = eq31_off_diagonal_sum(a, b, 0, 0, 1);
  CHECK(std::abs(off) == Approx(std::sqrt(3.0) / 8.0).margin(1e-12));

  const double diag = eq31_diagonal_sum(a, b, 0, 0);
  CHECK(diag == Approx(5.0 / 8.0).margin(1e-12));
  CHECK(std::abs(diag - 3.0 / 4.0) == Approx(1.0 / 8.0).margin(1e-12));

  const Eq31Report rep = eq31_check(a, b);
  CHECK_FALSE(rep.holds);
  CHECK(rep.off_diagonal_residual == Approx(std::sqrt(3.0) / 8.0).margin(1e-12));
}

TEST_CASE("a context's map commutes with itself") {
  auto rng = testutil::make_rng(61);
  const Context ctx = testutil::random_context(3, rng);
  const Eq31Report rep = eq31_check(ctx, ctx);
  CHECK(rep.holds);
  CHECK(rep.off_diagonal_residual <= 1e-12);
}

TEST_CASE("criterion verdict always matches direct map commutation") {
  auto rng = testutil::make_rng(62);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 3;
    Context a = testutil::random_context(n, rng);
    Context b = testutil::random_context(n, rng);
    if (trial % 4 == 1) {
      const ComplexMatrix u = testutil::random_unitary(n, rng);
      a = make_context(u * standard_context(n).basis());
      b = make_context(u * fourier_context(n).basis());
    } else if (trial % 4 == 2) {
      b = a;
    }
    Eq31Report rep{};
    CHECK_NOTHROW(rep = eq31_check(a, b));
    const bool commute = maps_equal(compose(a.to_channel(), b.to_channel()),
                                    compose(b.to_channel(), a.to_channel()));
    CHECK(rep.holds == commute);
  }
}

TEST_CASE("the four unbiased-pair characterizations stand or fall together") {
  const Context a = load_context("example1_A.json");
  const Context b = load_context("example1_B.json");
  const Cor33Report mub = cor33_equivalences(a, b);
  CHECK(mub.mub);
  CHECK(mub.map_is_r);
  CHECK(mub.sum_condition);
  CHECK(mub.block_condition);

  const Cor33Report tilted =
      cor33_equivalences(load_context("example2_A.json"), load_context("example2_B.json"));
  CHECK_FALSE(tilted.mub);
  CHECK_FALSE(tilted.map_is_r);
  CHECK_FALSE(tilted.sum_condition);
  CHECK_FALSE(tilted.block_condition);

  const Cor33Report f3 = cor33_equivalences(standard_context(3), fourier_context(3));
  CHECK(f3.mub);
  CHECK(f3.block_condition);

  CHECK_THROWS_AS(cor33_equivalences(standard_context(2), standard_context(3)),
                  ShapeMismatch);
}

TEST_CASE("unbiased pairs send spanning projections to the flat state") {
  auto rng = testutil::make_rng(63);
  const int n = 3;
  const ComplexMatrix u = testutil::random_unitary(n, rng);
  const Context a = make_context(u * standard_context(n).basis());
  const Context b = make_context(u * fourier_context(n).basis());
  const Context generic = testutil::random_context(n, rng);

  // Rank-1 projections spanning the operator space.
  std::vector<ComplexVector> seeds;
  for (int i = 0; i < n; ++i) {
    ComplexVector e = ComplexVector::Zero(n);
    e(i) = 1.0;
    seeds.push_back(e);
    for (int j = i + 1; j < n; ++j) {
      ComplexVector f = ComplexVector::Zero(n);
      f(i) = 1.0 / std::sqrt(2.0);
      f(j) = 1.0 / std::sqrt(2.0);
      seeds.push_back(f);
      ComplexVector g = ComplexVector::Zero(n);
      g(i) = 1.0 / std::sqrt(2.0);
      g(j) = Complex(0.0, 1.0 / std::sqrt(2.0));
      seeds.push_back(g);
    }
  }

  bool all_flat = true;
  for (const ComplexVector& s : seeds) {
    const ComplexMatrix p = rank_one_projection(s);
    const ComplexMatrix out = apply_map(a, apply_map(b, p));
    if ((out - identity(n) / static_cast<double>(n)).norm() > 1e-10) all_flat = false;
  }
  CHECK(all_flat);
  CHECK(mutually_unbiased(a, b).mutually_unbiased);

  bool generic_flat = true;
  for (const ComplexVector& s : seeds) {
    const ComplexMatrix p = rank_one_projection(s);
    const ComplexMatrix out = apply_map(a, apply_map(generic, p));
    if ((out - identity(n) / static_cast<double>(n)).norm() > 1e-10)
      generic_flat = false;
  }
  CHECK(generic_flat == mutually_unbiased(a, generic).mutually_unbiased);
}

TEST_CASE("self-adjoint pair is unbiased but its product is not") {
  const Context std2 = standard_context(2);
  const ComplexMatrix a = load_matrix("example3_A.json");
  const ComplexMatrix b = load_matrix("example3_B.json");
  const ComplexMatrix ab = load_matrix("example3_AB.json");

  CHECK((a * b - ab).norm() < 1e-12);
  CHECK(is_unbiased_operator(a, std2));
  CHECK(is_unbiased_operator(b, std2));
  CHECK_FALSE(is_unbiased_operator(ab, std2));
}

TEST_CASE("unbiased operators form a star-closed linear family") {
  auto rng = testutil::make_rng(64);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3;
    const Context ctx = testutil::random_context(n, rng);
    const ComplexMatrix x = random_unbiased_operator(ctx, rng);
    const ComplexMatrix y = random_unbiased_operator(ctx, rng);

    CHECK(is_unbiased_operator(x, ctx));
    CHECK(is_unbiased_operator(Complex(1.5, -0.5) * x, ctx));
    CHECK(is_unbiased_operator(x + y, ctx));
    CHECK(is_unbiased_operator(x.adjoint().eval(), ctx));
    CHECK(is_unbiased_operator(identity(n), ctx));
  }
}

TEST_CASE("channel and context forms of operator unbiasedness agree") {
  auto rng = testutil::make_rng(65);
  const Context ctx = testutil::random_context(3, rng);
  const ComplexMatrix x = random_unbiased_operator(ctx, rng);
  CHECK(is_unbiased_operator(x, ctx.to_channel()));
  CHECK(is_unbiased_operator(x, ctx.to_sharp()));

  const ComplexMatrix bad = testutil::random_hermitian(3, rng);
  CHECK(is_unbiased_operator(bad, ctx) ==
        is_unbiased_operator(bad, ctx.to_channel()));

  ComplexMatrix wrong(2, 2);
  wrong.setZero();
  CHECK_THROWS_AS(is_unbiased_operator(wrong, ctx.to_channel()), ShapeMismatch);
}

TEST_CASE("block criterion matches the channel-map criterion") {
  const Context std4 = standard_context(4);
  const SharpChannel s = testutil::coarse_grain(std4, {{0, 1}, {2, 3}});
  const std::vector<ComplexMatrix> bases = block_bases_of(s);
  REQUIRE(bases.size() == 2);
  CHECK(bases[0].cols() == 2);

  // Scalar diagonal blocks, arbitrary off-diagonal block.
  ComplexMatrix good = ComplexMatrix::Zero(4, 4);
  good(0, 0) = good(1, 1) = good(2, 2) = good(3, 3) = 0.25;
  good(0, 2) = Complex(0.3, 0.1);
  good(1, 3) = Complex(-0.2, 0.4);
  good(2, 0) = std::conj(good(0, 2));
  good(3, 1) = std::conj(good(1, 3));
  const BlockUnbiasedReport ok = thm35_block_check(good, s, bases);
  CHECK(ok.unbiased);
  CHECK(ok.violating_blocks.empty());

  const BlockUnbiasedReport id = thm35_block_check(identity(4), s, bases);
  CHECK(id.unbiased);

  ComplexMatrix bad = good;
  bad(0, 1) = 0.5;
  bad(1, 0) = 0.5;
  const BlockUnbiasedReport skewed = thm35_block_check(bad, s, bases);
  CHECK_FALSE(skewed.unbiased);
  REQUIRE(skewed.violating_blocks.size() == 1);
  CHECK(skewed.violating_blocks[0] == 0);

  ComplexMatrix lopsided = ComplexMatrix::Zero(4, 4);
  lopsided(0, 0) = 1.0;
  const BlockUnbiasedReport two = thm35_block_check(lopsided, s, bases);
  CHECK_FALSE(two.unbiased);
  CHECK(two.violating_blocks == std::vector<int>{0, 1});
}

TEST_CASE("block bases must span their projections") {
  const Context std4 = standard_context(4);
  const SharpChannel s = testutil::coarse_grain(std4, {{0, 1}, {2, 3}});
  std::vector<ComplexMatrix> bases = block_bases_of(s);

  CHECK_THROWS_AS(thm35_block_check(identity(4), s, {bases[0]}), InvalidBlockBasis);

  std::swap(bases[0], bases[1]);
  CHECK_THROWS_AS(thm35_block_check(identity(4), s, bases), InvalidBlockBasis);
}

TEST_CASE("tridiagonal hop operator fails strong unbiasedness at its square") {
  const ComplexMatrix a = load_matrix("example4_A.json");
  const Context std3 = standard_context(3);
  CHECK(is_unbiased_operator(a, std3));

  const StrongUnbiasedReport rep = is_strongly_unbiased(a, std3);
  CHECK_FALSE(rep.strongly_unbiased);
  REQUIRE(rep.first_failing_power.has_value());
  CHECK(*rep.first_failing_power == 2);
  CHECK_FALSE(is_unbiased_operator((a * a).eval(), std3));
}

TEST_CASE("equal-diagonal qubit operators are strongly unbiased") {
  const Context std2 = standard_context(2);
  const ComplexMatrix fixed = load_matrix("example5_A.json");
  CHECK(fixed(0, 0) == fixed(1, 1));
  CHECK(is_strongly_unbiased(fixed, std2).strongly_unbiased);

  // Direct power check; the equal-diagonal family is closed under products.
  ComplexMatrix power = identity(2);
  for (int m = 1; m <= 8; ++m) {
    power = power * fixed;
    const double scale = 1.0 + power.norm();
    CHECK((apply_map(std2.to_channel(), power) - random_map_apply(power)).norm() /
              scale <
          1e-12);
  }

  auto rng = testutil::make_rng(66);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix m = testutil::random_ginibre(2, rng);
    m(1, 1) = m(0, 0);
    CHECK(is_strongly_unbiased(m, std2).strongly_unbiased);
  }
}

TEST_CASE("operators measurable in one of an unbiased pair are strongly unbiased in the other") {
  auto rng = testutil::make_rng(67);
  for (int n = 2; n <= 4; ++n) {
    const Context a = standard_context(n);
    const Context b = fourier_context(n);
    ComplexMatrix diag = ComplexMatrix::Zero(n, n);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int i = 0; i < n; ++i) diag(i, i) = Complex(unif(rng), unif(rng));
    REQUIRE(is_measurable(diag, a.to_channel()));
    CHECK(is_strongly_unbiased(diag, b).strongly_unbiased);
    CHECK(is_strongly_unbiased(diag, b.to_sharp()).strongly_unbiased);
  }
}

TEST_CASE("unbiased projections are strongly unbiased") {
  const Context std2 = standard_context(2);
  ComplexVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const ComplexMatrix p2 = rank_one_projection(plus);
  REQUIRE(is_unbiased_operator(p2, std2));
  CHECK(is_strongly_unbiased(p2, std2).strongly_unbiased);

  const Context std4 = standard_context(4);
  ComplexVector u(4), w(4);
  u << 0.5, 0.5, 0.5, 0.5;
  w << 0.5, -0.5, 0.5, -0.5;
  const ComplexMatrix p4 = rank_one_projection(u) + rank_one_projection(w);
  REQUIRE(is_class(p4, OperatorClass::Projection));
  REQUIRE(is_unbiased_operator(p4, std4));
  CHECK(is_strongly_unbiased(p4, std4).strongly_unbiased);
}

TEST_CASE("eigenvectors of a strongly unbiased operator are unbiased vectors") {
  const Context std2 = standard_context(2);
  const auto triple = qubit_mub_triple();
  const Context& hadamard = triple[1];

  // Non-degenerate self-adjoint operator with an unbiased eigenbasis.
  const ComplexMatrix a = 1.0 * hadamard.projection(0) - 2.0 * hadamard.projection(1);
  REQUIRE(is_class(a, OperatorClass::SelfAdjoint));
  CHECK(is_strongly_unbiased(a, std2).strongly_unbiased);

  const Eigensystem es = hermitian_eigensystem(a);
  for (int i = 0; i < 2; ++i)
    CHECK(is_unbiased_vector(es.vectors.col(i), std2));

  // Conversely, a biased eigenbasis breaks strong unbiasedness.
  const ComplexMatrix biased =
      1.0 * std2.projection(0) - 2.0 * std2.projection(1);
  CHECK_FALSE(is_strongly_unbiased(biased, std2).strongly_unbiased);
}

TEST_CASE("flat-map channels accept every operator while their branches do not") {
  // The product of an unbiased context pair has the completely random map, so
  // every operator is unbiased in it; the branch-by-branch sufficient
  // condition still fails for operators biased in the first factor.
  const Context a = standard_context(2);
  const Context b = fourier_context(2);
  const Channel product = compose(a.to_channel(), b.to_channel());

  auto rng = testutil::make_rng(68);
  const ComplexMatrix x = testutil::random_hermitian(2, rng);
  CHECK(is_unbiased_operator(x, product));

  ComplexMatrix biased = ComplexMatrix::Zero(2, 2);
  biased(0, 0) = 1.0;
  CHECK(is_unbiased_operator(biased, product));

  const double n = product.dim();
  double worst = 0.0;
  for (int k = 0; k < product.branch_count(); ++k) {
    const ComplexMatrix& m = product.branch(k);
    worst = std::max(worst, (m.adjoint() * biased * m -
                             biased.trace() / n * (m.adjoint() * m))
                                .norm());
  }
  CHECK(worst > 0.1);

  // Seeded search over non-sharp channels: every composed unbiased pair has
  // the flat map, and a generically biased operator breaks the branch-wise
  // form, so the search must succeed and the first hit is pinned.
  int first_hit = -1;
  for (int trial = 0; trial < 50 && first_hit < 0; ++trial) {
    const ComplexMatrix u = testutil::random_unitary(3, rng);
    const Context ca = make_context(u * standard_context(3).basis());
    const Context cb = make_context(u * fourier_context(3).basis());
    const Channel ch = compose(ca.to_channel(), cb.to_channel());
    if (channel_is_sharp(ch)) continue;
    const ComplexMatrix y = testutil::random_hermitian(3, rng);
    if (!is_unbiased_operator(y, ch, Tolerance{1e-8})) continue;
    double dev = 0.0;
    for (int k = 0; k < ch.branch_count(); ++k) {
      const ComplexMatrix& m = ch.branch(k);
      dev = std::max(dev, (m.adjoint() * y * m -
                           y.trace() / 3.0 * (m.adjoint() * m))
                              .norm());
    }
    if (dev > 1e-3) first_hit = trial;
  }
  REQUIRE(first_hit == 0);
}

TEST_CASE("discrete Fourier bases are well formed") {
  CHECK(fourier_context(1).dim() == 1);
  for (int n = 2; n <= 5; ++n) {
    const Context f = fourier_context(n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        CHECK(std::norm(f.basis()(j, k)) == Approx(1.0 / n).margin(1e-12));
  }
  const Context f2 = fourier_context(2);
  CHECK(std::abs(f2.basis()(1, 1) - Complex(-1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
}
