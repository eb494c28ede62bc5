// Command-line front door for the library: loads matrices, channels,
// contexts and observables from JSON files, runs checks and maps, and prints
// reports with residuals in text or JSON form.
//
// Exit codes: 0 affirmative verdict, 1 negative verdict, 2 parse error,
// 3 validation/domain error, 4 internal cross-check mismatch, 64 usage.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <qctx/qctx.hpp>

namespace {

using namespace qctx;

struct Options {
  Tolerance tol{1e-9};
  std::string format = "text";
  std::uint64_t seed = 0;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string fmt(Complex v) {
  return fmt(v.real()) + (v.imag() < 0 ? "" : "+") + fmt(v.imag()) + "i";
}

std::string error_name(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse-error";
  if (dynamic_cast<const VerdictMismatch*>(&e)) return "verdict-mismatch";
  if (dynamic_cast<const NonSquare*>(&e)) return "non-square";
  if (dynamic_cast<const ShapeMismatch*>(&e)) return "shape-mismatch";
  if (dynamic_cast<const InvalidDimension*>(&e)) return "invalid-dimension";
  if (dynamic_cast<const NotSelfAdjoint*>(&e)) return "not-self-adjoint";
  if (dynamic_cast<const NotUnitVector*>(&e)) return "not-unit-vector";
  if (dynamic_cast<const UnitalityViolation*>(&e)) return "unitality-violation";
  if (dynamic_cast<const ZeroBranch*>(&e)) return "zero-branch";
  if (dynamic_cast<const NotSharp*>(&e)) return "not-sharp";
  if (dynamic_cast<const NotRankOne*>(&e)) return "not-rank-one";
  if (dynamic_cast<const DecompositionFailure*>(&e)) return "decomposition-failure";
  if (dynamic_cast<const InvalidPovm*>(&e)) return "invalid-povm";
  if (dynamic_cast<const UnknownOutcome*>(&e)) return "unknown-outcome";
  if (dynamic_cast<const LabelMismatch*>(&e)) return "label-mismatch";
  if (dynamic_cast<const InvalidBlockBasis*>(&e)) return "invalid-block-basis";
  return "error";
}

void emit_error(const Options& opt, const std::string& type,
                const std::string& message) {
  if (opt.format == "json") {
    Json body{{"error", Json{{"type", type}, {"message", message}}}};
    std::cerr << body.dump(2) << "\n";
  } else {
    std::cerr << "error: " << type << ": " << message << "\n";
  }
}

void print_matrix_text(std::ostream& os, const ComplexMatrix& a,
                       const std::string& indent = "  ") {
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    os << indent;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (c > 0) os << "  ";
      os << fmt(a(r, c));
    }
    os << "\n";
  }
}

/// One report per command: JSON mode dumps `body`, text mode prints the
/// lines queued by `line`.
struct Report {
  Json body = Json::object();
  std::vector<std::string> text;

  void line(const std::string& s) { text.push_back(s); }
  void scalar(const std::string& key, double v) {
    body[key] = v;
    line(key + ": " + fmt(v));
  }
  void flag(const std::string& key, bool v) {
    body[key] = v;
    line(key + ": " + (v ? std::string("true") : std::string("false")));
  }
  void matrix(const std::string& key, const ComplexMatrix& a) {
    body[key] = matrix_to_json(a);
    std::ostringstream os;
    os << key << ":\n";
    print_matrix_text(os, a);
    std::string s = os.str();
    if (!s.empty() && s.back() == '\n') s.pop_back();
    line(s);
  }

  void print(const Options& opt) const {
    if (opt.format == "json") {
      std::cout << body.dump(2) << "\n";
    } else {
      for (const std::string& s : text) std::cout << s << "\n";
    }
  }
};

ComplexMatrix load_matrix(const std::string& path) {
  return matrix_from_json(load_json(path));
}

ComplexMatrix load_density(const std::string& path, Tolerance tol) {
  ComplexMatrix rho = load_matrix(path);
  if (!is_class(rho, OperatorClass::Density, tol))
    throw Error(path + ": operator is not a density matrix");
  return rho;
}

double unbiased_residual(const ComplexMatrix& a, const Channel& ch) {
  return (apply_map(ch, a) - random_map_apply(a)).norm();
}

int cmd_classify(const Options& opt, const std::string& path) {
  const ComplexMatrix a = load_matrix(path);
  const std::set<OperatorClass> classes = classify(a, opt.tol);

  Report rep;
  std::string joined;
  Json names = Json::array();
  for (OperatorClass c : classes) {
    if (!joined.empty()) joined += " ";
    joined += to_string(c);
    names.push_back(to_string(c));
  }
  rep.body["classes"] = std::move(names);
  rep.line("classes: " + joined);

  const int n = static_cast<int>(a.rows());
  rep.scalar("self_adjoint_residual", (a - a.adjoint()).norm());
  rep.scalar("projection_residual", (a * a - a).norm());
  rep.scalar("unitary_residual",
             std::max((a.adjoint() * a - identity(n)).norm(),
                      (a * a.adjoint() - identity(n)).norm()));
  rep.body["trace"] = Json::array({a.trace().real(), a.trace().imag()});
  rep.line("trace: " + fmt(a.trace()));
  if (classes.count(OperatorClass::SelfAdjoint)) {
    const Eigensystem es = hermitian_eigensystem(a, opt.tol);
    rep.scalar("min_eigenvalue", es.values(0));
    rep.scalar("max_eigenvalue", es.values(es.values.size() - 1));
  }
  rep.print(opt);
  return 0;
}

int cmd_check(const Options& opt, const std::string& path,
              const std::string& kind) {
  const Json j = load_json(path);
  Report rep;
  rep.body["kind"] = kind;
  rep.line("kind: " + kind);

  bool valid = true;
  std::string fail_type, fail_message;
  try {
    if (kind == "channel" || kind == "sharp") {
      const Channel ch = channel_from_json(j, opt.tol);
      const int n = ch.dim();
      ComplexMatrix left = ComplexMatrix::Zero(n, n);
      ComplexMatrix right = ComplexMatrix::Zero(n, n);
      for (const ComplexMatrix& m : ch.branches()) {
        left += m.adjoint() * m;
        right += m * m.adjoint();
      }
      rep.scalar("left_unitality_residual", (left - identity(n)).norm());
      rep.scalar("right_unitality_residual", (right - identity(n)).norm());
      if (kind == "sharp") {
        double proj_residual = 0.0;
        for (const ComplexMatrix& m : ch.branches())
          proj_residual = std::max(
              {proj_residual, (m - m.adjoint()).norm(), (m * m - m).norm()});
        rep.scalar("projection_residual", proj_residual);
        const SharpChannel s = as_sharp(ch, opt.tol);
        rep.flag("context", context_via_commutation(s, 8, opt.seed, opt.tol));
      }
    } else if (kind == "context") {
      const Context ctx = context_from_json(j, opt.tol);
      rep.scalar("orthonormality_residual",
                 (ctx.basis().adjoint() * ctx.basis() - identity(ctx.dim()))
                     .cwiseAbs()
                     .maxCoeff());
    } else if (kind == "povm") {
      const Povm x = povm_from_json(j, opt.tol);
      ComplexMatrix sum = ComplexMatrix::Zero(x.dim(), x.dim());
      double min_eig = 0.0;
      for (const ComplexMatrix& e : x.effects()) {
        sum += e;
        const Eigensystem es = hermitian_eigensystem(e, opt.tol);
        min_eig = std::min(min_eig, es.values(0));
      }
      rep.scalar("completeness_residual", (sum - identity(x.dim())).norm());
      rep.scalar("min_effect_eigenvalue", min_eig);
    } else {
      emit_error(opt, "usage", "unknown kind \"" + kind + "\"");
      return 64;
    }
  } catch (const ParseError&) {
    throw;
  } catch (const VerdictMismatch&) {
    throw;
  } catch (const Error& e) {
    valid = false;
    fail_type = error_name(e);
    fail_message = e.what();
  }

  rep.flag(kind, valid);
  if (!valid) {
    rep.body["error"] = Json{{"type", fail_type}, {"message", fail_message}};
    rep.line("error_type: " + fail_type);
    rep.line("error_message: " + fail_message);
  }
  rep.print(opt);
  return valid ? 0 : 1;
}

int cmd_apply(const Options& opt, const std::string& channel_path,
              const std::string& operator_path) {
  const Channel ch = channel_from_json(load_json(channel_path), opt.tol);
  const ComplexMatrix a = load_matrix(operator_path);
  const ChannelMapReport map_rep = apply_map_report(ch, a, opt.tol);

  Report rep;
  rep.body["trace_in"] = Json::array(
      {map_rep.trace_in.real(), map_rep.trace_in.imag()});
  rep.line("trace_in: " + fmt(map_rep.trace_in));
  rep.body["trace_out"] = Json::array(
      {map_rep.trace_out.real(), map_rep.trace_out.imag()});
  rep.line("trace_out: " + fmt(map_rep.trace_out));
  rep.scalar("trace_residual", std::abs(map_rep.trace_in - map_rep.trace_out));
  rep.matrix("output", map_rep.output);
  rep.print(opt);
  return 0;
}

int cmd_compose(const Options& opt, const std::string& a_path,
                const std::string& b_path) {
  const Channel a = channel_from_json(load_json(a_path), opt.tol);
  const Channel b = channel_from_json(load_json(b_path), opt.tol);
  const Channel ab = compose(a, b, opt.tol);

  Report rep;
  rep.body["channel"] = channel_to_json(ab);
  rep.body["branch_count"] = ab.branch_count();
  rep.line("dim: " + std::to_string(ab.dim()));
  rep.line("branch_count: " + std::to_string(ab.branch_count()));
  for (int i = 0; i < ab.branch_count(); ++i) {
    std::ostringstream os;
    os << "branch " << i << ":\n";
    print_matrix_text(os, ab.branch(i));
    std::string s = os.str();
    s.pop_back();
    rep.line(s);
  }
  rep.print(opt);
  return 0;
}

int cmd_maps_equal(const Options& opt, const std::string& a_path,
                   const std::string& b_path) {
  const Channel a = channel_from_json(load_json(a_path), opt.tol);
  const Channel b = channel_from_json(load_json(b_path), opt.tol);
  const bool equal = maps_equal(a, b, opt.tol);
  double residual = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int s = 0; s < a.dim(); ++s) {
      const ComplexMatrix e = matrix_unit(a.dim(), r, s);
      residual = std::max(residual, (apply_map(a, e) - apply_map(b, e)).norm());
    }

  Report rep;
  rep.flag("equal", equal);
  rep.scalar("max_residual", residual);
  rep.print(opt);
  return equal ? 0 : 1;
}

int cmd_order(const Options& opt, const std::string& a_path,
              const std::string& b_path) {
  const SharpChannel a = as_sharp(channel_from_json(load_json(a_path), opt.tol), opt.tol);
  const SharpChannel b = as_sharp(channel_from_json(load_json(b_path), opt.tol), opt.tol);
  const SharpLeReport le_rep = sharp_le(a, b, opt.tol);

  Report rep;
  rep.flag("le", le_rep.le);
  Json decomposition = Json::object();
  std::string decomposition_text;
  double embed_residual = 0.0;
  double sum_residual = 0.0;
  for (const auto& [bi, group] : le_rep.decomposition) {
    decomposition[std::to_string(bi)] = group;
    std::string ids;
    ComplexMatrix sum = ComplexMatrix::Zero(a.dim(), a.dim());
    for (int ai : group) {
      if (!ids.empty()) ids += ",";
      ids += std::to_string(ai);
      embed_residual = std::max(
          embed_residual,
          (b.projection(bi) * a.projection(ai) - a.projection(ai)).norm());
      sum += a.projection(ai);
    }
    sum_residual = std::max(sum_residual, (sum - b.projection(bi)).norm());
    if (!decomposition_text.empty()) decomposition_text += " ";
    decomposition_text += std::to_string(bi) + ":[" + ids + "]";
  }
  if (le_rep.le) {
    rep.body["decomposition"] = std::move(decomposition);
    rep.line("decomposition: " + decomposition_text);
    rep.scalar("max_embedding_residual", embed_residual);
    rep.scalar("max_decomposition_residual", sum_residual);
  }
  rep.print(opt);
  return le_rep.le ? 0 : 1;
}

int cmd_eq31(const Options& opt, const std::string& a_path,
             const std::string& b_path) {
  const Context a = context_from_json(load_json(a_path), opt.tol);
  const Context b = context_from_json(load_json(b_path), opt.tol);
  const Eq31Report eq_rep = eq31_check(a, b, opt.tol);

  Report rep;
  rep.flag("holds", eq_rep.holds);
  rep.scalar("off_diagonal_residual", eq_rep.off_diagonal_residual);
  rep.scalar("diagonal_residual", eq_rep.diagonal_residual);
  rep.print(opt);
  return eq_rep.holds ? 0 : 1;
}

int cmd_cor33(const Options& opt, const std::string& a_path,
              const std::string& b_path) {
  const Context a = context_from_json(load_json(a_path), opt.tol);
  const Context b = context_from_json(load_json(b_path), opt.tol);
  const Cor33Report c_rep = cor33_equivalences(a, b, opt.tol);
  const int n = a.dim();

  double transition_residual = 0.0;
  const RealMatrix t = mutually_unbiased(a, b, opt.tol).transition_matrix;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      transition_residual =
          std::max(transition_residual, std::abs(t(i, j) - 1.0 / n));

  const Channel a_ch = a.to_channel(opt.tol);
  const Channel b_ch = b.to_channel(opt.tol);
  double map_residual = 0.0;
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s) {
      const ComplexMatrix e = matrix_unit(n, r, s);
      map_residual = std::max(
          map_residual,
          (apply_map(a_ch, apply_map(b_ch, e)) - random_map_apply(e)).norm());
    }

  double sum_residual = 0.0;
  double block_residual = 0.0;
  for (int k = 0; k < n; ++k) {
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const ComplexMatrix pqp = a.projection(i) * b.projection(k) * a.projection(i);
      sum += pqp;
      block_residual = std::max(
          block_residual, (pqp - a.projection(i) / static_cast<double>(n)).norm());
    }
    sum_residual = std::max(
        sum_residual, (sum - identity(n) / static_cast<double>(n)).norm());
  }

  Report rep;
  rep.flag("mub", c_rep.mub);
  rep.flag("map_is_r", c_rep.map_is_r);
  rep.flag("sum_condition", c_rep.sum_condition);
  rep.flag("block_condition", c_rep.block_condition);
  rep.scalar("transition_residual", transition_residual);
  rep.scalar("map_residual", map_residual);
  rep.scalar("sum_residual", sum_residual);
  rep.scalar("block_residual", block_residual);
  rep.print(opt);
  return c_rep.mub ? 0 : 1;
}

int cmd_mub(const Options& opt, const std::string& a_path,
            const std::string& b_path) {
  const Context a = context_from_json(load_json(a_path), opt.tol);
  const Context b = context_from_json(load_json(b_path), opt.tol);
  const MubVerdict verdict = mutually_unbiased(a, b, opt.tol);
  const int n = a.dim();

  Report rep;
  rep.flag("mutually_unbiased", verdict.mutually_unbiased);
  double deviation = 0.0;
  Json rows = Json::array();
  for (int i = 0; i < n; ++i) {
    Json row = Json::array();
    std::string row_text;
    for (int j = 0; j < n; ++j) {
      row.push_back(verdict.transition_matrix(i, j));
      deviation = std::max(deviation,
                           std::abs(verdict.transition_matrix(i, j) - 1.0 / n));
      if (j > 0) row_text += "  ";
      row_text += fmt(verdict.transition_matrix(i, j));
    }
    rows.push_back(std::move(row));
    rep.line("transition_row_" + std::to_string(i) + ": " + row_text);
  }
  rep.body["transition_matrix"] = std::move(rows);
  rep.scalar("max_deviation", deviation);
  rep.print(opt);
  return verdict.mutually_unbiased ? 0 : 1;
}

int cmd_unbiased(const Options& opt, const std::string& operator_path,
                 const std::string& channel_path,
                 const std::string& context_path) {
  const ComplexMatrix a = load_matrix(operator_path);
  std::optional<Context> ctx;
  std::optional<Channel> ch;
  if (!context_path.empty()) {
    ctx = context_from_json(load_json(context_path), opt.tol);
    ch = ctx->to_channel(opt.tol);
  } else {
    ch = channel_from_json(load_json(channel_path), opt.tol);
  }

  const bool unbiased = ctx ? is_unbiased_operator(a, *ctx, opt.tol)
                            : is_unbiased_operator(a, *ch, opt.tol);
  Report rep;
  rep.flag("unbiased", unbiased);
  rep.scalar("residual", unbiased_residual(a, *ch));
  rep.print(opt);
  return unbiased ? 0 : 1;
}

int cmd_strongly_unbiased(const Options& opt, const std::string& operator_path,
                          const std::string& channel_path,
                          const std::string& context_path) {
  const ComplexMatrix a = load_matrix(operator_path);
  std::optional<Channel> ch;
  if (!context_path.empty()) {
    ch = context_from_json(load_json(context_path), opt.tol).to_channel(opt.tol);
  } else {
    ch = channel_from_json(load_json(channel_path), opt.tol);
  }

  const StrongUnbiasedReport s_rep = is_strongly_unbiased(a, *ch, opt.tol);
  Report rep;
  rep.flag("strongly_unbiased", s_rep.strongly_unbiased);
  if (s_rep.first_failing_power) {
    rep.body["first_failing_power"] = *s_rep.first_failing_power;
    rep.line("first_failing_power: " + std::to_string(*s_rep.first_failing_power));
  } else {
    rep.body["first_failing_power"] = nullptr;
    rep.line("first_failing_power: none");
  }
  Json residuals = Json::array();
  std::string residual_text;
  ComplexMatrix power = identity(static_cast<int>(a.rows()));
  for (int m = 1; m <= ch->dim() - 1; ++m) {
    power = power * a;
    const double r = unbiased_residual(power, *ch);
    residuals.push_back(r);
    if (!residual_text.empty()) residual_text += " ";
    residual_text += fmt(r);
  }
  rep.body["power_residuals"] = std::move(residuals);
  rep.line("power_residuals: " + residual_text);
  rep.print(opt);
  return s_rep.strongly_unbiased ? 0 : 1;
}

int cmd_prob(const Options& opt, const std::string& state_path,
             const std::string& povm_path, const std::string& outcome,
             const std::string& channel_path) {
  const ComplexMatrix rho = load_density(state_path, opt.tol);
  const Povm x = povm_from_json(load_json(povm_path), opt.tol);
  std::optional<Channel> phi;
  if (!channel_path.empty())
    phi = channel_from_json(load_json(channel_path), opt.tol);

  const double value = phi ? prob_transformed(rho, *phi, x, outcome, opt.tol)
                           : prob(rho, x, outcome, opt.tol);
  double total = 0.0;
  for (const std::string& o : x.outcomes())
    total += phi ? prob_transformed(rho, *phi, x, o, opt.tol)
                 : prob(rho, x, o, opt.tol);

  Report rep;
  rep.body["outcome"] = outcome;
  rep.line("outcome: " + outcome);
  rep.scalar("value", value);
  rep.scalar("normalization_residual", std::abs(total - 1.0));
  rep.print(opt);
  return 0;
}

int cmd_prob_context(const Options& opt, const std::string& context_path,
                     const std::string& state_path, const std::string& povm_path,
                     const std::string& outcome,
                     const std::string& channel_path) {
  const Context ctx = context_from_json(load_json(context_path), opt.tol);
  const ComplexMatrix rho = load_density(state_path, opt.tol);
  const Povm x = povm_from_json(load_json(povm_path), opt.tol);
  std::optional<Channel> phi;
  if (!channel_path.empty())
    phi = channel_from_json(load_json(channel_path), opt.tol);

  const double value =
      phi ? prob_in_context_transformed(ctx, rho, *phi, x, outcome, opt.tol)
          : prob_in_context(ctx, rho, x, outcome, opt.tol);
  const double plain = phi ? prob_transformed(rho, *phi, x, outcome, opt.tol)
                           : prob(rho, x, outcome, opt.tol);

  const Channel ctx_ch = ctx.to_channel(opt.tol);
  const ComplexMatrix effective_state = phi ? apply_map(*phi, rho) : rho;

  Report rep;
  rep.body["outcome"] = outcome;
  rep.line("outcome: " + outcome);
  rep.scalar("value", value);
  rep.scalar("plain_value", plain);
  rep.scalar("difference", std::abs(value - plain));
  rep.flag("state_measurable", is_measurable(effective_state, ctx_ch, opt.tol));
  rep.flag("effect_measurable", is_measurable(x.effect(outcome), ctx_ch, opt.tol));
  rep.print(opt);
  return 0;
}

int cmd_ontmodel(const Options& opt, const std::vector<std::string>& context_paths,
                 const std::string& state_path, const std::string& povm_path,
                 const std::string& channel_path) {
  std::vector<Context> contexts;
  for (const std::string& p : context_paths)
    contexts.push_back(context_from_json(load_json(p), opt.tol));
  const ComplexMatrix rho = load_density(state_path, opt.tol);
  const Povm x = povm_from_json(load_json(povm_path), opt.tol);
  std::optional<Channel> phi;
  if (!channel_path.empty())
    phi = channel_from_json(load_json(channel_path), opt.tol);

  const std::vector<OntologicalModel> models =
      build_ontological_model(contexts, rho, x, phi, opt.tol);

  Report rep;
  Json list = Json::array();
  for (const OntologicalModel& m : models) {
    list.push_back(model_to_json(m));
    rep.line("context_id: " + m.context_id);
    std::string mu_text;
    for (Eigen::Index i = 0; i < m.mu.size(); ++i) {
      if (i > 0) mu_text += " ";
      mu_text += fmt(m.mu(i));
    }
    rep.line("mu: " + mu_text);
    for (std::size_t o = 0; o < m.outcomes.size(); ++o) {
      std::string f_text;
      for (Eigen::Index i = 0; i < m.fuzzy_events[o].size(); ++i) {
        if (i > 0) f_text += " ";
        f_text += fmt(m.fuzzy_events[o](i));
      }
      rep.line("fuzzy[" + m.outcomes[o] + "]: " + f_text);
    }
    if (m.random_matrix) {
      for (Eigen::Index i = 0; i < m.random_matrix->rows(); ++i) {
        std::string row_text;
        for (Eigen::Index jj = 0; jj < m.random_matrix->cols(); ++jj) {
          if (jj > 0) row_text += " ";
          row_text += fmt((*m.random_matrix)(i, jj));
        }
        rep.line("random_matrix_row_" + std::to_string(i) + ": " + row_text);
      }
    }
  }
  rep.body["models"] = std::move(list);
  rep.print(opt);
  return 0;
}

int cmd_joint_verify(const Options& opt, const std::string& joint_path,
                     const std::string& x_path, const std::string& y_path,
                     const std::string& channel_path) {
  const JointPovm z = joint_povm_from_json(load_json(joint_path), opt.tol);
  const Povm x = povm_from_json(load_json(x_path), opt.tol);
  const Povm y = povm_from_json(load_json(y_path), opt.tol);

  bool verified;
  if (channel_path.empty()) {
    verified = verify_joint(z, x, y, opt.tol);
  } else {
    const Channel ch = channel_from_json(load_json(channel_path), opt.tol);
    verified = verify_joint(z, x, y, ch, opt.tol);
  }

  double residual = 0.0;
  for (int xi = 0; xi < x.size(); ++xi)
    residual = std::max(residual, (z.marginal_x_effect(xi) - x.effect(xi)).norm());
  for (int yi = 0; yi < y.size(); ++yi)
    residual = std::max(residual, (z.marginal_y_effect(yi) - y.effect(yi)).norm());

  Report rep;
  rep.flag("verified", verified);
  rep.scalar("max_marginal_residual", residual);
  rep.print(opt);
  return verified ? 0 : 1;
}

int cmd_distinguish(const Options& opt, const std::string& a_path,
                    const std::string& b_path) {
  const ComplexMatrix a = load_matrix(a_path);
  const ComplexMatrix b = load_matrix(b_path);
  const std::optional<Context> ctx = find_distinguishing_context(a, b, opt.tol);

  Report rep;
  rep.flag("distinguishable", ctx.has_value());
  rep.scalar("operator_distance", (a - b).norm());
  if (ctx) {
    double separation = 0.0;
    for (int i = 0; i < ctx->dim(); ++i) {
      const ComplexVector v = ctx->basis_vector(i);
      separation = std::max(separation,
                            std::abs((v.adjoint() * (a - b) * v)(0)));
    }
    rep.scalar("separation", separation);
    rep.body["context"] = context_to_json(*ctx);
    for (int i = 0; i < ctx->dim(); ++i) {
      std::string v_text;
      for (int r = 0; r < ctx->dim(); ++r) {
        if (r > 0) v_text += "  ";
        v_text += fmt(ctx->basis_vector(i)(r));
      }
      rep.line("basis_vector_" + std::to_string(i) + ": " + v_text);
    }
  }
  rep.print(opt);
  return ctx ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"operator-algebra toolkit for channels, contexts and "
               "measurement probabilities"};
  app.require_subcommand(1);
  app.add_option("--tolerance", opt.tol.eps, "comparison tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"json", "text"}))
      ->capture_default_str();
  app.add_option("--seed", opt.seed, "seed for randomized cross-checks")
      ->capture_default_str();

  std::string path, kind, a_path, b_path, channel_path, context_path;
  std::string operator_path, state_path, povm_path, outcome, joint_path;
  std::string x_path, y_path;
  std::vector<std::string> context_paths;

  CLI::App* classify = app.add_subcommand("classify", "classify an operator");
  classify->add_option("path", path, "matrix JSON file")->required();

  CLI::App* check = app.add_subcommand("check", "validate a JSON object");
  check->add_option("path", path, "JSON file")->required();
  check->add_option("--kind", kind, "channel|sharp|context|povm")
      ->required()
      ->check(CLI::IsMember({"channel", "sharp", "context", "povm"}));

  CLI::App* apply = app.add_subcommand("apply", "apply a channel map");
  apply->add_option("--channel", channel_path, "channel JSON")->required();
  apply->add_option("--operator", operator_path, "matrix JSON")->required();

  CLI::App* compose_cmd = app.add_subcommand("compose", "product channel");
  compose_cmd->add_option("--a", a_path, "channel JSON")->required();
  compose_cmd->add_option("--b", b_path, "channel JSON")->required();

  CLI::App* maps_equal_cmd =
      app.add_subcommand("maps-equal", "compare two channel maps");
  maps_equal_cmd->add_option("--a", a_path, "channel JSON")->required();
  maps_equal_cmd->add_option("--b", b_path, "channel JSON")->required();

  CLI::App* order = app.add_subcommand("order", "refinement order on sharp channels");
  order->add_option("--a", a_path, "sharp channel JSON")->required();
  order->add_option("--b", b_path, "sharp channel JSON")->required();

  CLI::App* eq31 = app.add_subcommand(
      "eq31", "transition-probability criterion for commuting context maps");
  eq31->add_option("--a", a_path, "context JSON")->required();
  eq31->add_option("--b", b_path, "context JSON")->required();

  CLI::App* cor33 = app.add_subcommand(
      "cor33", "equivalent characterizations of mutual unbiasedness");
  cor33->add_option("--a", a_path, "context JSON")->required();
  cor33->add_option("--b", b_path, "context JSON")->required();

  CLI::App* mub = app.add_subcommand("mub", "transition matrix of two contexts");
  mub->add_option("--a", a_path, "context JSON")->required();
  mub->add_option("--b", b_path, "context JSON")->required();

  CLI::App* unbiased = app.add_subcommand("unbiased", "unbiased-operator check");
  unbiased->add_option("--operator", operator_path, "matrix JSON")->required();
  unbiased->add_option("--channel", channel_path, "channel JSON");
  unbiased->add_option("--context", context_path, "context JSON");

  CLI::App* strongly = app.add_subcommand(
      "strongly-unbiased", "unbiasedness of all operator powers");
  strongly->add_option("--operator", operator_path, "matrix JSON")->required();
  strongly->add_option("--channel", channel_path, "channel JSON");
  strongly->add_option("--context", context_path, "context JSON");

  CLI::App* prob_cmd = app.add_subcommand("prob", "outcome probability");
  prob_cmd->add_option("--state", state_path, "density matrix JSON")->required();
  prob_cmd->add_option("--povm", povm_path, "observable JSON")->required();
  prob_cmd->add_option("--outcome", outcome, "outcome label")->required();
  prob_cmd->add_option("--channel", channel_path, "optional channel JSON");

  CLI::App* prob_ctx = app.add_subcommand(
      "prob-context", "context-relative outcome probability");
  prob_ctx->add_option("--context", context_path, "context JSON")->required();
  prob_ctx->add_option("--state", state_path, "density matrix JSON")->required();
  prob_ctx->add_option("--povm", povm_path, "observable JSON")->required();
  prob_ctx->add_option("--outcome", outcome, "outcome label")->required();
  prob_ctx->add_option("--channel", channel_path, "optional channel JSON");

  CLI::App* ontmodel = app.add_subcommand(
      "ontmodel", "per-context classical model of a state and observable");
  ontmodel->add_option("--context", context_paths, "context JSON (repeatable)")
      ->required();
  ontmodel->add_option("--state", state_path, "density matrix JSON")->required();
  ontmodel->add_option("--povm", povm_path, "observable JSON")->required();
  ontmodel->add_option("--channel", channel_path, "optional channel JSON");

  CLI::App* joint = app.add_subcommand("joint-verify", "joint-observable marginals");
  joint->add_option("--joint", joint_path, "joint observable JSON")->required();
  joint->add_option("--x", x_path, "first marginal JSON")->required();
  joint->add_option("--y", y_path, "second marginal JSON")->required();
  joint->add_option("--channel", channel_path, "optional channel JSON");

  CLI::App* distinguish = app.add_subcommand(
      "distinguish", "find a context separating two operators");
  distinguish->add_option("--a", a_path, "matrix JSON")->required();
  distinguish->add_option("--b", b_path, "matrix JSON")->required();

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  }

  if ((app.got_subcommand(unbiased) || app.got_subcommand(strongly)) &&
      channel_path.empty() == context_path.empty()) {
    emit_error(opt, "usage", "provide exactly one of --channel or --context");
    return 64;
  }

  try {
    if (app.got_subcommand(classify)) return cmd_classify(opt, path);
    if (app.got_subcommand(check)) return cmd_check(opt, path, kind);
    if (app.got_subcommand(apply)) return cmd_apply(opt, channel_path, operator_path);
    if (app.got_subcommand(compose_cmd)) return cmd_compose(opt, a_path, b_path);
    if (app.got_subcommand(maps_equal_cmd))
      return cmd_maps_equal(opt, a_path, b_path);
    if (app.got_subcommand(order)) return cmd_order(opt, a_path, b_path);
    if (app.got_subcommand(eq31)) return cmd_eq31(opt, a_path, b_path);
    if (app.got_subcommand(cor33)) return cmd_cor33(opt, a_path, b_path);
    if (app.got_subcommand(mub)) return cmd_mub(opt, a_path, b_path);
    if (app.got_subcommand(unbiased))
      return cmd_unbiased(opt, operator_path, channel_path, context_path);
    if (app.got_subcommand(strongly))
      return cmd_strongly_unbiased(opt, operator_path, channel_path, context_path);
    if (app.got_subcommand(prob_cmd))
      return cmd_prob(opt, state_path, povm_path, outcome, channel_path);
    if (app.got_subcommand(prob_ctx))
      return cmd_prob_context(opt, context_path, state_path, povm_path, outcome,
                              channel_path);
    if (app.got_subcommand(ontmodel))
      return cmd_ontmodel(opt, context_paths, state_path, povm_path, channel_path);
    if (app.got_subcommand(joint))
      return cmd_joint_verify(opt, joint_path, x_path, y_path, channel_path);
    if (app.got_subcommand(distinguish)) return cmd_distinguish(opt, a_path, b_path);
  } catch (const ParseError& e) {
    emit_error(opt, "parse-error", e.what());
    return 2;
  } catch (const VerdictMismatch& e) {
    emit_error(opt, "verdict-mismatch", e.what());
    return 4;
  } catch (const Error& e) {
    emit_error(opt, error_name(e), e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error(opt, "internal", e.what());
    return 70;
  }
  return 64;
}
