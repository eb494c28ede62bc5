#pragma once

// Finite-outcome POVMs, the probability formulas (plain, channel-transformed,
// context-relative, and both combined), joint-measurement marginal
// verification, and per-context ontological models.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qctx/channel.hpp"
#include "qctx/errors.hpp"
#include "qctx/opcore.hpp"
#include "qctx/sharp_order.hpp"

namespace qctx {

/// Independent slack for the internal agreement assertions between the
/// equivalent probability formulas. Kept separate from the user tolerance:
/// these are algebraic identities whose residual is pure floating-point
/// noise, not a modelling choice.
inline constexpr double kTraceFormSlack = 1e-10;

/// Observable with finitely many labelled outcomes. Effects are positive,
/// bounded by I, and sum to I.
class Povm {
 public:
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(effects_.size()); }
  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::string& outcome(int i) const { return outcomes_.at(i); }
  const std::vector<ComplexMatrix>& effects() const { return effects_; }
  const ComplexMatrix& effect(int i) const { return effects_.at(i); }

  int index_of(const std::string& outcome) const {
    for (int i = 0; i < size(); ++i)
      if (outcomes_[i] == outcome) return i;
    throw UnknownOutcome("povm: no outcome labelled \"" + outcome + "\"");
  }
  const ComplexMatrix& effect(const std::string& outcome) const {
    return effects_[index_of(outcome)];
  }

  friend Povm make_povm(std::vector<std::string> outcomes,
                        std::vector<ComplexMatrix> effects, Tolerance tol);

 private:
  Povm(int dim, std::vector<std::string> outcomes,
       std::vector<ComplexMatrix> effects)
      : dim_(dim), outcomes_(std::move(outcomes)), effects_(std::move(effects)) {}

  int dim_;
  std::vector<std::string> outcomes_;
  std::vector<ComplexMatrix> effects_;
};

inline Povm make_povm(std::vector<std::string> outcomes,
                      std::vector<ComplexMatrix> effects, Tolerance tol = {}) {
  if (effects.empty()) throw InvalidPovm("make_povm: no effects");
  if (outcomes.size() != effects.size())
    throw InvalidPovm("make_povm: " + std::to_string(outcomes.size()) +
                      " labels for " + std::to_string(effects.size()) + " effects");
  const std::set<std::string> unique(outcomes.begin(), outcomes.end());
  if (unique.size() != outcomes.size())
    throw InvalidPovm("make_povm: duplicate outcome label");
  const int n = static_cast<int>(effects[0].rows());
  require_dim(n, "make_povm");
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < effects.size(); ++i) {
    require_square(effects[i], "make_povm");
    if (effects[i].rows() != n)
      throw ShapeMismatch("make_povm: effect dimensions differ");
    if (!is_class(effects[i], OperatorClass::Effect, tol))
      throw InvalidPovm("make_povm: operator for outcome \"" + outcomes[i] +
                        "\" is not an effect");
    sum += effects[i];
  }
  const double dev = (sum - identity(n)).norm();
  if (dev > tol.eps)
    throw InvalidPovm("make_povm: ||sum E - I||_F = " + std::to_string(dev));
  return Povm(n, std::move(outcomes), std::move(effects));
}

/// Two-observable joint measurement on a product outcome grid, indexed
/// grid[x][y]. Summing a fixed-x slice over y gives the X marginal effect;
/// summing over x gives the Y marginal.
class JointPovm {
 public:
  int dim() const { return dim_; }
  const std::vector<std::string>& x_outcomes() const { return x_outcomes_; }
  const std::vector<std::string>& y_outcomes() const { return y_outcomes_; }
  const ComplexMatrix& entry(int xi, int yi) const { return grid_.at(xi).at(yi); }

  ComplexMatrix marginal_x_effect(int xi) const {
    ComplexMatrix sum = ComplexMatrix::Zero(dim_, dim_);
    for (const ComplexMatrix& e : grid_.at(xi)) sum += e;
    return sum;
  }
  ComplexMatrix marginal_y_effect(int yi) const {
    ComplexMatrix sum = ComplexMatrix::Zero(dim_, dim_);
    for (const auto& row : grid_) sum += row.at(yi);
    return sum;
  }
  Povm marginal_x(Tolerance tol = {}) const {
    std::vector<ComplexMatrix> effects;
    for (int xi = 0; xi < static_cast<int>(x_outcomes_.size()); ++xi)
      effects.push_back(marginal_x_effect(xi));
    return make_povm(x_outcomes_, std::move(effects), tol);
  }
  Povm marginal_y(Tolerance tol = {}) const {
    std::vector<ComplexMatrix> effects;
    for (int yi = 0; yi < static_cast<int>(y_outcomes_.size()); ++yi)
      effects.push_back(marginal_y_effect(yi));
    return make_povm(y_outcomes_, std::move(effects), tol);
  }

  friend JointPovm make_joint_povm(std::vector<std::string> x_outcomes,
                                   std::vector<std::string> y_outcomes,
                                   std::vector<std::vector<ComplexMatrix>> grid,
                                   Tolerance tol);

 private:
  JointPovm(int dim, std::vector<std::string> x_outcomes,
            std::vector<std::string> y_outcomes,
            std::vector<std::vector<ComplexMatrix>> grid)
      : dim_(dim),
        x_outcomes_(std::move(x_outcomes)),
        y_outcomes_(std::move(y_outcomes)),
        grid_(std::move(grid)) {}

  int dim_;
  std::vector<std::string> x_outcomes_;
  std::vector<std::string> y_outcomes_;
  std::vector<std::vector<ComplexMatrix>> grid_;
};

inline JointPovm make_joint_povm(std::vector<std::string> x_outcomes,
                                 std::vector<std::string> y_outcomes,
                                 std::vector<std::vector<ComplexMatrix>> grid,
                                 Tolerance tol = {}) {
  if (grid.empty() || grid[0].empty())
    throw InvalidPovm("make_joint_povm: empty grid");
  if (grid.size() != x_outcomes.size())
    throw InvalidPovm("make_joint_povm: grid rows != x outcome count");
  const int n = static_cast<int>(grid[0][0].rows());
  require_dim(n, "make_joint_povm");
  for (const auto& row : grid) {
    if (row.size() != y_outcomes.size())
      throw InvalidPovm("make_joint_povm: grid columns != y outcome count");
    for (const ComplexMatrix& e : row) {
      require_square(e, "make_joint_povm");
      if (e.rows() != n)
        throw ShapeMismatch("make_joint_povm: entry dimensions differ");
      if (!is_class(e, OperatorClass::Effect, tol))
        throw InvalidPovm("make_joint_povm: grid entry is not an effect");
    }
  }
  JointPovm z(n, std::move(x_outcomes), std::move(y_outcomes), std::move(grid));
  // Both marginals must themselves be observables; make_povm re-checks.
  z.marginal_x(tol);
  z.marginal_y(tol);
  return z;
}

namespace detail {

inline double real_checked(Complex value, const char* where) {
  if (std::abs(value.imag()) > kTraceFormSlack * (1.0 + std::abs(value.real())))
    throw VerdictMismatch(std::string(where) + ": expected a real value, got imag " +
                          std::to_string(value.imag()));
  return value.real();
}

inline void check_band(double p, const char* where, Tolerance tol) {
  if (p < -tol.eps || p > 1.0 + tol.eps)
    throw VerdictMismatch(std::string(where) + ": probability " + std::to_string(p) +
                          " outside [0,1] band");
}

}  // namespace detail

/// Outcome probability tr(rho E) for a state and one labelled effect.
inline double prob(const ComplexMatrix& rho, const Povm& x,
                   const std::string& outcome, Tolerance tol = {}) {
  require_square(rho, "prob");
  if (rho.rows() != x.dim()) throw ShapeMismatch("prob: state dimension differs");
  const double p = detail::real_checked((rho * x.effect(outcome)).trace(), "prob");
  detail::check_band(p, "prob", tol);
  return p;
}

/// Probability after sending the state through a channel: tr(L_Phi(rho) E).
/// The branch-by-branch expansion sum_j tr(M_j* rho M_j E) is computed
/// independently and must agree.
inline double prob_transformed(const ComplexMatrix& rho, const Channel& phi,
                               const Povm& x, const std::string& outcome,
                               Tolerance tol = {}) {
  require_square(rho, "prob_transformed");
  if (rho.rows() != x.dim() || phi.dim() != x.dim())
    throw ShapeMismatch("prob_transformed: dimensions differ");
  const ComplexMatrix& e = x.effect(outcome);
  const double via_map = detail::real_checked(
      (apply_map(phi, rho) * e).trace(), "prob_transformed");
  Complex via_branches = 0.0;
  for (const ComplexMatrix& m : phi.branches())
    via_branches += (m.adjoint() * rho * m * e).trace();
  if (std::abs(via_map - via_branches) >
      kTraceFormSlack * (1.0 + std::abs(via_map)))
    throw VerdictMismatch("prob_transformed: branch expansion disagrees with "
                          "map form by " +
                          std::to_string(std::abs(via_map - via_branches)));
  detail::check_band(via_map, "prob_transformed", tol);
  return via_map;
}

/// Context-relative probability sum_i <phi_i,rho phi_i><phi_i,E phi_i>.
/// The three equivalent trace forms tr(L_A(rho)E), tr(rho L_A(E)) and
/// tr(L_A(rho)L_A(E)) are checked against the sum.
inline double prob_in_context(const Context& actx, const ComplexMatrix& rho,
                              const Povm& x, const std::string& outcome,
                              Tolerance tol = {}) {
  require_square(rho, "prob_in_context");
  if (rho.rows() != x.dim() || actx.dim() != x.dim())
    throw ShapeMismatch("prob_in_context: dimensions differ");
  const ComplexMatrix& e = x.effect(outcome);
  const int n = actx.dim();

  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const ComplexVector phi = actx.basis_vector(i);
    sum += ((phi.adjoint() * rho * phi)(0) * (phi.adjoint() * e * phi)(0)).real();
  }

  const Channel a = actx.to_channel(tol);
  const ComplexMatrix rho_a = apply_map(a, rho);
  const ComplexMatrix e_a = apply_map(a, e);
  const double forms[3] = {
      detail::real_checked((rho_a * e).trace(), "prob_in_context"),
      detail::real_checked((rho * e_a).trace(), "prob_in_context"),
      detail::real_checked((rho_a * e_a).trace(), "prob_in_context")};
  for (double f : forms)
    if (std::abs(f - sum) > kTraceFormSlack * (1.0 + std::abs(sum)))
      throw VerdictMismatch("prob_in_context: trace form deviates from the "
                            "diagonal sum by " + std::to_string(std::abs(f - sum)));
  detail::check_band(sum, "prob_in_context", tol);
  return sum;
}

/// M(i, j) = <phi_i, M_j* rho M_j phi_i>: the probability that the state
/// traverses branch j and is then found at basis index i. Entries are
/// nonnegative and total tr(rho).
inline RealMatrix random_matrix(const Context& actx, const ComplexMatrix& rho,
                                const Channel& phi) {
  require_square(rho, "random_matrix");
  if (rho.rows() != actx.dim() || phi.dim() != actx.dim())
    throw ShapeMismatch("random_matrix: dimensions differ");
  const int n = actx.dim();
  const int k = phi.branch_count();
  RealMatrix m(n, k);
  for (int j = 0; j < k; ++j) {
    const ComplexMatrix moved = phi.branch(j).adjoint() * rho * phi.branch(j);
    for (int i = 0; i < n; ++i) {
      const ComplexVector v = actx.basis_vector(i);
      m(i, j) = detail::real_checked((v.adjoint() * moved * v)(0), "random_matrix");
    }
  }
  return m;
}

/// Context-relative probability for a channel-transformed state, computed
/// through the random matrix as sum_{i,j} M(i,j) <phi_i, E phi_i> and checked
/// against the trace forms tr(L_A(E) Phi(rho)) and tr(E L_A(Phi(rho))).
inline double prob_in_context_transformed(const Context& actx,
                                          const ComplexMatrix& rho,
                                          const Channel& phi, const Povm& x,
                                          const std::string& outcome,
                                          Tolerance tol = {}) {
  require_square(rho, "prob_in_context_transformed");
  if (rho.rows() != x.dim() || actx.dim() != x.dim() || phi.dim() != x.dim())
    throw ShapeMismatch("prob_in_context_transformed: dimensions differ");
  const ComplexMatrix& e = x.effect(outcome);
  const int n = actx.dim();

  const RealMatrix m = random_matrix(actx, rho, phi);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const ComplexVector v = actx.basis_vector(i);
    const double fuzzy = detail::real_checked((v.adjoint() * e * v)(0),
                                              "prob_in_context_transformed");
    sum += m.row(i).sum() * fuzzy;
  }

  const Channel a = actx.to_channel(tol);
  const ComplexMatrix moved = apply_map(phi, rho);
  const double forms[2] = {
      detail::real_checked((apply_map(a, e) * moved).trace(),
                           "prob_in_context_transformed"),
      detail::real_checked((e * apply_map(a, moved)).trace(),
                           "prob_in_context_transformed")};
  for (double f : forms)
    if (std::abs(f - sum) > kTraceFormSlack * (1.0 + std::abs(sum)))
      throw VerdictMismatch("prob_in_context_transformed: trace form deviates "
                            "from the random-matrix sum by " +
                            std::to_string(std::abs(f - sum)));
  detail::check_band(sum, "prob_in_context_transformed", tol);
  return sum;
}

/// Effect-wise image of an observable under a channel map. Unitality keeps
/// the effect sum at I, so the result is again an observable.
inline Povm transform_povm(const Channel& ch, const Povm& x, Tolerance tol = {}) {
  if (ch.dim() != x.dim())
    throw ShapeMismatch("transform_povm: channel dimension differs");
  std::vector<ComplexMatrix> effects;
  effects.reserve(x.size());
  for (const ComplexMatrix& e : x.effects()) effects.push_back(apply_map(ch, e));
  return make_povm(x.outcomes(), std::move(effects), tol);
}

/// True when the grid's partial sums reproduce the claimed marginal
/// observables outcome by outcome.
inline bool verify_joint(const JointPovm& z, const Povm& x, const Povm& y,
                         Tolerance tol = {}) {
  if (z.dim() != x.dim() || z.dim() != y.dim())
    throw ShapeMismatch("verify_joint: dimensions differ");
  if (z.x_outcomes() != x.outcomes() || z.y_outcomes() != y.outcomes())
    throw LabelMismatch("verify_joint: outcome labels do not line up");
  for (int xi = 0; xi < x.size(); ++xi)
    if ((z.marginal_x_effect(xi) - x.effect(xi)).norm() > tol.eps) return false;
  for (int yi = 0; yi < y.size(); ++yi)
    if ((z.marginal_y_effect(yi) - y.effect(yi)).norm() > tol.eps) return false;
  return true;
}

/// As above, and additionally asserts that applying the channel map entry-wise
/// commutes with taking marginals: the transformed joint must stand in the
/// same relation to the transformed marginals.
inline bool verify_joint(const JointPovm& z, const Povm& x, const Povm& y,
                         const Channel& ch, Tolerance tol = {}) {
  const bool plain = verify_joint(z, x, y, tol);
  if (ch.dim() != z.dim())
    throw ShapeMismatch("verify_joint: channel dimension differs");
  std::vector<std::vector<ComplexMatrix>> grid;
  for (int xi = 0; xi < static_cast<int>(z.x_outcomes().size()); ++xi) {
    grid.emplace_back();
    for (int yi = 0; yi < static_cast<int>(z.y_outcomes().size()); ++yi)
      grid.back().push_back(apply_map(ch, z.entry(xi, yi)));
  }
  const JointPovm moved =
      make_joint_povm(z.x_outcomes(), z.y_outcomes(), std::move(grid), tol);
  const bool transformed = verify_joint(moved, transform_povm(ch, x, tol),
                                        transform_povm(ch, y, tol), tol);
  if (plain != transformed)
    throw VerdictMismatch("verify_joint: marginal verdict changed under the "
                          "channel map");
  return plain;
}

/// Classical snapshot of one context: outcome measure mu over basis indices,
/// a fuzzy event per observable outcome, and (when a channel is supplied) the
/// branch-traversal random matrix.
struct OntologicalModel {
  std::string context_id;
  RealVector mu;
  std::vector<std::string> outcomes;
  std::vector<RealVector> fuzzy_events;
  std::optional<RealMatrix> random_matrix;
};

/// One model per context. Marginal identities of the random matrix are
/// asserted: column sums give the branch traversal probabilities
/// tr(M_j* rho M_j) and row sums give the measure of the transformed state.
inline std::vector<OntologicalModel> build_ontological_model(
    const std::vector<Context>& contexts, const ComplexMatrix& rho, const Povm& x,
    const std::optional<Channel>& phi = std::nullopt, Tolerance tol = {}) {
  require_square(rho, "build_ontological_model");
  if (rho.rows() != x.dim())
    throw ShapeMismatch("build_ontological_model: state dimension differs");
  if (!is_class(rho, OperatorClass::Density, tol))
    throw Error("build_ontological_model: rho is not a density operator");
  if (phi && phi->dim() != x.dim())
    throw ShapeMismatch("build_ontological_model: channel dimension differs");

  std::vector<OntologicalModel> models;
  for (std::size_t c = 0; c < contexts.size(); ++c) {
    const Context& ctx = contexts[c];
    if (ctx.dim() != x.dim())
      throw ShapeMismatch("build_ontological_model: context dimension differs");
    const int n = ctx.dim();

    OntologicalModel model;
    model.context_id = "context-" + std::to_string(c);
    model.mu = RealVector(n);
    for (int i = 0; i < n; ++i) {
      const ComplexVector v = ctx.basis_vector(i);
      model.mu(i) = detail::real_checked((v.adjoint() * rho * v)(0),
                                         "build_ontological_model");
      if (model.mu(i) < -tol.eps)
        throw VerdictMismatch("build_ontological_model: negative measure entry " +
                              std::to_string(model.mu(i)));
    }
    if (std::abs(model.mu.sum() - 1.0) > tol.eps)
      throw VerdictMismatch("build_ontological_model: measure sums to " +
                            std::to_string(model.mu.sum()));

    model.outcomes = x.outcomes();
    for (int o = 0; o < x.size(); ++o) {
      RealVector f(n);
      for (int i = 0; i < n; ++i) {
        const ComplexVector v = ctx.basis_vector(i);
        f(i) = detail::real_checked((v.adjoint() * x.effect(o) * v)(0),
                                    "build_ontological_model");
        if (f(i) < -tol.eps || f(i) > 1.0 + tol.eps)
          throw VerdictMismatch("build_ontological_model: fuzzy event value " +
                                std::to_string(f(i)) + " outside [0,1] band");
      }
      model.fuzzy_events.push_back(std::move(f));
    }

    if (phi) {
      RealMatrix m = random_matrix(ctx, rho, *phi);
      for (int j = 0; j < phi->branch_count(); ++j) {
        const double traversal = detail::real_checked(
            (phi->branch(j).adjoint() * rho * phi->branch(j)).trace(),
            "build_ontological_model");
        if (std::abs(m.col(j).sum() - traversal) > tol.eps)
          throw VerdictMismatch(
              "build_ontological_model: column marginal deviates by " +
              std::to_string(std::abs(m.col(j).sum() - traversal)));
      }
      const ComplexMatrix moved = apply_map(*phi, rho);
      for (int i = 0; i < n; ++i) {
        const ComplexVector v = ctx.basis_vector(i);
        const double mu_moved = detail::real_checked(
            (v.adjoint() * moved * v)(0), "build_ontological_model");
        if (std::abs(m.row(i).sum() - mu_moved) > tol.eps)
          throw VerdictMismatch(
              "build_ontological_model: row marginal deviates by " +
              std::to_string(std::abs(m.row(i).sum() - mu_moved)));
      }
      if (std::abs(m.sum() - 1.0) > tol.eps)
        throw VerdictMismatch("build_ontological_model: random matrix total " +
                              std::to_string(m.sum()));
      model.random_matrix = std::move(m);
    }
    models.push_back(std::move(model));
  }
  return models;
}

}  // namespace qctx
