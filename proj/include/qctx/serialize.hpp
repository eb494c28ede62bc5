#pragma once

// JSON encodings for matrices, channels, contexts, observables and models,
// plus file helpers. Keys are emitted in sorted order and doubles use
// shortest round-trip formatting, so output is byte-stable for fixed input.

#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qctx/channel.hpp"
#include "qctx/errors.hpp"
#include "qctx/measure.hpp"
#include "qctx/opcore.hpp"
#include "qctx/sharp_order.hpp"

namespace qctx {

using Json = nlohmann::json;

inline Json matrix_to_json(const ComplexMatrix& a) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      row.push_back(Json::array({a(r, c).real(), a(r, c).imag()}));
    data.push_back(std::move(row));
  }
  return Json{{"rows", a.rows()}, {"cols", a.cols()}, {"data", std::move(data)}};
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  try {
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    if (rows < 1 || rows > kMaxDim || cols < 1 || cols > kMaxDim)
      throw ParseError("matrix: shape " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " out of supported range");
    const Json& data = j.at("data");
    if (!data.is_array() || static_cast<int>(data.size()) != rows)
      throw ParseError("matrix: data must hold one list per row");
    ComplexMatrix a(rows, cols);
    for (int r = 0; r < rows; ++r) {
      const Json& row = data.at(r);
      if (!row.is_array() || static_cast<int>(row.size()) != cols)
        throw ParseError("matrix: row " + std::to_string(r) + " has " +
                         std::to_string(row.size()) + " entries, expected " +
                         std::to_string(cols));
      for (int c = 0; c < cols; ++c) {
        const Json& cell = row.at(c);
        if (!cell.is_array() || cell.size() != 2 || !cell.at(0).is_number() ||
            !cell.at(1).is_number())
          throw ParseError("matrix: entry (" + std::to_string(r) + "," +
                           std::to_string(c) + ") is not a [re, im] pair");
        a(r, c) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
      }
    }
    if (!all_finite(a)) throw ParseError("matrix: non-finite entry");
    return a;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("matrix: ") + e.what());
  }
}

inline Json vector_to_json(const ComplexVector& v) {
  return matrix_to_json(ComplexMatrix(v));
}

inline ComplexVector vector_from_json(const Json& j) {
  const ComplexMatrix a = matrix_from_json(j);
  if (a.cols() != 1) throw ParseError("vector: expected a single column");
  return ComplexVector(a.col(0));
}

inline Json channel_to_json(const Channel& ch) {
  Json branches = Json::array();
  for (const ComplexMatrix& m : ch.branches()) branches.push_back(matrix_to_json(m));
  return Json{{"dim", ch.dim()}, {"branches", std::move(branches)}};
}

inline Channel channel_from_json(const Json& j, Tolerance tol = {}) {
  int dim = 0;
  std::vector<ComplexMatrix> branches;
  try {
    dim = j.at("dim").get<int>();
    const Json& arr = j.at("branches");
    if (!arr.is_array() || arr.empty())
      throw ParseError("channel: branches must be a nonempty list");
    for (const Json& b : arr) branches.push_back(matrix_from_json(b));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("channel: ") + e.what());
  }
  for (const ComplexMatrix& b : branches)
    if (b.rows() != dim || b.cols() != dim)
      throw ParseError("channel: branch shape disagrees with declared dim");
  return make_channel(std::move(branches), tol);
}

inline Json context_to_json(const Context& ctx) {
  Json basis = Json::array();
  for (int i = 0; i < ctx.dim(); ++i)
    basis.push_back(vector_to_json(ctx.basis_vector(i)));
  return Json{{"dim", ctx.dim()}, {"basis", std::move(basis)}};
}

inline Context context_from_json(const Json& j, Tolerance tol = {}) {
  int dim = 0;
  std::vector<ComplexVector> vectors;
  try {
    dim = j.at("dim").get<int>();
    const Json& arr = j.at("basis");
    if (!arr.is_array())
      throw ParseError("context: basis must be a list of column vectors");
    for (const Json& v : arr) vectors.push_back(vector_from_json(v));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("context: ") + e.what());
  }
  if (static_cast<int>(vectors.size()) != dim)
    throw ParseError("context: expected " + std::to_string(dim) + " basis vectors");
  ComplexMatrix basis(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (vectors[i].size() != dim)
      throw ParseError("context: basis vector " + std::to_string(i) +
                       " has wrong length");
    basis.col(i) = vectors[i];
  }
  return make_context(basis, tol);
}

inline Json povm_to_json(const Povm& x) {
  Json effects = Json::array();
  for (const ComplexMatrix& e : x.effects()) effects.push_back(matrix_to_json(e));
  return Json{{"dim", x.dim()},
              {"outcomes", x.outcomes()},
              {"effects", std::move(effects)}};
}

inline Povm povm_from_json(const Json& j, Tolerance tol = {}) {
  int dim = 0;
  std::vector<std::string> outcomes;
  std::vector<ComplexMatrix> effects;
  try {
    dim = j.at("dim").get<int>();
    outcomes = j.at("outcomes").get<std::vector<std::string>>();
    const Json& arr = j.at("effects");
    if (!arr.is_array()) throw ParseError("povm: effects must be a list");
    for (const Json& e : arr) effects.push_back(matrix_from_json(e));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("povm: ") + e.what());
  }
  for (const ComplexMatrix& e : effects)
    if (e.rows() != dim || e.cols() != dim)
      throw ParseError("povm: effect shape disagrees with declared dim");
  return make_povm(std::move(outcomes), std::move(effects), tol);
}

inline Json joint_povm_to_json(const JointPovm& z) {
  Json grid = Json::array();
  for (int xi = 0; xi < static_cast<int>(z.x_outcomes().size()); ++xi) {
    Json row = Json::array();
    for (int yi = 0; yi < static_cast<int>(z.y_outcomes().size()); ++yi)
      row.push_back(matrix_to_json(z.entry(xi, yi)));
    grid.push_back(std::move(row));
  }
  return Json{{"dim", z.dim()},
              {"x_outcomes", z.x_outcomes()},
              {"y_outcomes", z.y_outcomes()},
              {"grid", std::move(grid)}};
}

inline JointPovm joint_povm_from_json(const Json& j, Tolerance tol = {}) {
  int dim = 0;
  std::vector<std::string> xs, ys;
  std::vector<std::vector<ComplexMatrix>> grid;
  try {
    dim = j.at("dim").get<int>();
    xs = j.at("x_outcomes").get<std::vector<std::string>>();
    ys = j.at("y_outcomes").get<std::vector<std::string>>();
    const Json& rows = j.at("grid");
    if (!rows.is_array()) throw ParseError("joint povm: grid must be a list");
    for (const Json& row : rows) {
      if (!row.is_array()) throw ParseError("joint povm: grid rows must be lists");
      grid.emplace_back();
      for (const Json& e : row) grid.back().push_back(matrix_from_json(e));
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("joint povm: ") + e.what());
  }
  for (const auto& row : grid)
    for (const ComplexMatrix& e : row)
      if (e.rows() != dim || e.cols() != dim)
        throw ParseError("joint povm: entry shape disagrees with declared dim");
  return make_joint_povm(std::move(xs), std::move(ys), std::move(grid), tol);
}

inline Json model_to_json(const OntologicalModel& m) {
  Json fuzzy = Json::object();
  for (std::size_t o = 0; o < m.outcomes.size(); ++o) {
    Json values = Json::array();
    for (Eigen::Index i = 0; i < m.fuzzy_events[o].size(); ++i)
      values.push_back(m.fuzzy_events[o](i));
    fuzzy[m.outcomes[o]] = std::move(values);
  }
  Json mu = Json::array();
  for (Eigen::Index i = 0; i < m.mu.size(); ++i) mu.push_back(m.mu(i));
  Json out{{"context_id", m.context_id},
           {"mu", std::move(mu)},
           {"fuzzy_events", std::move(fuzzy)}};
  if (m.random_matrix) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.random_matrix->rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index jj = 0; jj < m.random_matrix->cols(); ++jj)
        row.push_back((*m.random_matrix)(i, jj));
      rows.push_back(std::move(row));
    }
    out["random_matrix"] = std::move(rows);
  }
  return out;
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw ParseError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out.is_open()) throw ParseError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace qctx
