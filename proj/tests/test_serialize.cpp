#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <qctx/qctx.hpp>

#include "testutil.hpp"

using namespace qctx;

namespace {

std::string fixture(const std::string& name) {
  return std::string(QCTX_FIXTURES_DIR) + "/" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.is_open());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("matrices round-trip bit-exactly") {
  auto rng = testutil::make_rng(80);
  const ComplexMatrix a = testutil::random_ginibre(3, rng);

  const ComplexMatrix direct = matrix_from_json(matrix_to_json(a));
  CHECK((direct - a).norm() == 0.0);

  // Through text: shortest round-trip double formatting recovers every bit.
  const Json reparsed = Json::parse(matrix_to_json(a).dump());
  const ComplexMatrix through_text = matrix_from_json(reparsed);
  CHECK((through_text - a).norm() == 0.0);
}

TEST_CASE("matrix encoding is canonical") {
  ComplexMatrix one(1, 1);
  one << Complex(3.5, 0.0);
  CHECK(matrix_to_json(one).dump() == R"({"cols":1,"data":[[[3.5,0.0]]],"rows":1})");
}

TEST_CASE("malformed matrix documents are rejected") {
  const Json good = matrix_to_json(identity(2));

  Json missing = good;
  missing.erase("rows");
  CHECK_THROWS_AS(matrix_from_json(missing), ParseError);

  Json zero = good;
  zero["rows"] = 0;
  CHECK_THROWS_AS(matrix_from_json(zero), ParseError);

  Json huge = good;
  huge["rows"] = kMaxDim + 1;
  CHECK_THROWS_AS(matrix_from_json(huge), ParseError);

  Json short_data = good;
  short_data["data"].erase(1);
  CHECK_THROWS_AS(matrix_from_json(short_data), ParseError);

  Json ragged = good;
  ragged["data"][0].erase(1);
  CHECK_THROWS_AS(matrix_from_json(ragged), ParseError);

  Json bad_cell = good;
  bad_cell["data"][0][0] = "x";
  CHECK_THROWS_AS(matrix_from_json(bad_cell), ParseError);

  Json triple = good;
  triple["data"][0][0] = Json::array({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(matrix_from_json(triple), ParseError);

  Json infinite = good;
  infinite["data"][0][0] = Json::array({std::nan(""), 0.0});
  CHECK_THROWS_AS(matrix_from_json(infinite), ParseError);

  CHECK_THROWS_AS(matrix_from_json(Json::array()), ParseError);
}

TEST_CASE("vectors are single-column matrices") {
  ComplexVector v(2);
  v << Complex(1.0, -2.0), Complex(0.5, 0.25);
  const ComplexVector back = vector_from_json(vector_to_json(v));
  CHECK((back - v).norm() == 0.0);

  CHECK_THROWS_AS(vector_from_json(matrix_to_json(identity(2))), ParseError);
}

TEST_CASE("channels round-trip with exact branches") {
  auto rng = testutil::make_rng(81);
  const Channel ch = testutil::random_mixed_unitary(3, 2, rng);
  const Channel back = channel_from_json(channel_to_json(ch));
  REQUIRE(back.branch_count() == ch.branch_count());
  for (int i = 0; i < ch.branch_count(); ++i)
    CHECK((back.branch(i) - ch.branch(i)).norm() == 0.0);
}

TEST_CASE("channel documents surface both parse and domain failures") {
  Json doc = channel_to_json(identity_channel(2));
  doc.erase("branches");
  CHECK_THROWS_AS(channel_from_json(doc), ParseError);

  Json empty = channel_to_json(identity_channel(2));
  empty["branches"] = Json::array();
  CHECK_THROWS_AS(channel_from_json(empty), ParseError);

  Json wrong_dim = channel_to_json(identity_channel(2));
  wrong_dim["dim"] = 3;
  CHECK_THROWS_AS(channel_from_json(wrong_dim), ParseError);

  // Shape parses fine; unitality is a domain error, not a parse error.
  Json lopsided = Json{
      {"dim", 2},
      {"branches", Json::array({matrix_to_json(identity(2)),
                                matrix_to_json(identity(2))})}};
  CHECK_THROWS_AS(channel_from_json(lopsided), UnitalityViolation);
}

TEST_CASE("contexts round-trip up to nothing at all") {
  auto rng = testutil::make_rng(82);
  const Context ctx = testutil::random_context(4, rng);
  const Context back = context_from_json(context_to_json(ctx));
  CHECK((back.basis() - ctx.basis()).norm() == 0.0);

  Json doc = context_to_json(ctx);
  doc["basis"].erase(3);
  CHECK_THROWS_AS(context_from_json(doc), ParseError);

  Json skew = context_to_json(standard_context(2));
  skew["basis"][1] = skew["basis"][0];
  CHECK_THROWS_AS(context_from_json(skew), NotUnitVector);
}

TEST_CASE("observables round-trip with labels in order") {
  auto rng = testutil::make_rng(83);
  const Povm x = testutil::random_povm(3, 3, rng);
  const Povm back = povm_from_json(povm_to_json(x));
  CHECK(back.outcomes() == x.outcomes());
  for (int i = 0; i < x.size(); ++i)
    CHECK((back.effect(i) - x.effect(i)).norm() == 0.0);

  Json doc = povm_to_json(x);
  doc["effects"].erase(2);
  CHECK_THROWS_AS(povm_from_json(doc), InvalidPovm);

  Json unlabeled = povm_to_json(x);
  unlabeled.erase("outcomes");
  CHECK_THROWS_AS(povm_from_json(unlabeled), ParseError);
}

TEST_CASE("joint observables round-trip entry by entry") {
  const Context std4 = standard_context(4);
  const ComplexMatrix x0 = std4.projection(0) + std4.projection(1);
  const ComplexMatrix x1 = std4.projection(2) + std4.projection(3);
  const ComplexMatrix y0 = std4.projection(0) + std4.projection(2);
  const ComplexMatrix y1 = std4.projection(1) + std4.projection(3);
  const JointPovm z = make_joint_povm({"x0", "x1"}, {"y0", "y1"},
                                      {{x0 * y0, x0 * y1}, {x1 * y0, x1 * y1}});

  const JointPovm back = joint_povm_from_json(joint_povm_to_json(z));
  CHECK(back.x_outcomes() == z.x_outcomes());
  CHECK(back.y_outcomes() == z.y_outcomes());
  for (int xi = 0; xi < 2; ++xi)
    for (int yi = 0; yi < 2; ++yi)
      CHECK((back.entry(xi, yi) - z.entry(xi, yi)).norm() == 0.0);

  Json doc = joint_povm_to_json(z);
  doc["grid"] = 7;
  CHECK_THROWS_AS(joint_povm_from_json(doc), ParseError);
}

TEST_CASE("model snapshots serialize with labelled fuzzy events") {
  const ComplexMatrix rho =
      matrix_from_json(load_json(fixture("state_psi1.json")));
  const Povm x = povm_from_json(load_json(fixture("povm_standard2.json")));
  const std::vector<OntologicalModel> models = build_ontological_model(
      {standard_context(2)}, rho, x,
      std::optional<Channel>(identity_channel(2)));

  const Json j = model_to_json(models.at(0));
  CHECK(j.at("context_id") == "context-0");
  CHECK(j.at("mu").size() == 2);
  CHECK(j.at("fuzzy_events").contains("up"));
  CHECK(j.at("fuzzy_events").contains("down"));
  CHECK(j.at("random_matrix").size() == 2);

  const std::vector<OntologicalModel> plain =
      build_ontological_model({standard_context(2)}, rho, x);
  CHECK_FALSE(model_to_json(plain.at(0)).contains("random_matrix"));
}

TEST_CASE("every shipped fixture loads as its intended type") {
  for (const char* name :
       {"example1_A", "example1_B", "example2_A", "example2_B", "std2", "std3",
        "qubit_mub_1", "qubit_mub_2", "qubit_mub_3"})
    CHECK_NOTHROW(context_from_json(load_json(fixture(std::string(name) + ".json"))));

  for (const char* name : {"example3_A", "example3_B", "example3_AB",
                           "example4_A", "example5_A", "state_psi1",
                           "state_max_mixed2"})
    CHECK_NOTHROW(matrix_from_json(load_json(fixture(std::string(name) + ".json"))));

  for (const char* name : {"std3_channel", "coarse3_channel", "hadamard_channel",
                           "random2_channel"})
    CHECK_NOTHROW(channel_from_json(load_json(fixture(std::string(name) + ".json"))));

  for (const char* name : {"povm_standard2", "povm_plusminus2"})
    CHECK_NOTHROW(povm_from_json(load_json(fixture(std::string(name) + ".json"))));
}

TEST_CASE("files round-trip and rewrite byte-identically") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "qctx_serialize_roundtrip.json").string();

  auto rng = testutil::make_rng(84);
  const ComplexMatrix a = testutil::random_hermitian(3, rng);
  save_json(path, matrix_to_json(a));
  const ComplexMatrix back = matrix_from_json(load_json(path));
  CHECK((back - a).norm() == 0.0);

  const std::string first = read_file(path);
  save_json(path, matrix_to_json(back));
  CHECK(read_file(path) == first);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_json((dir / "qctx_no_such_file.json").string()), ParseError);
}
