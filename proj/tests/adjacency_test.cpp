#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lqot/adjacency.hpp"
#include "lqot/complex_model.hpp"
#include "lqot/kg.hpp"
#include "lqot/util.hpp"

using namespace lqot;
namespace fs = std::filesystem;

namespace {

KnowledgeGraph random_graph(int entities, int relations, int edges, std::uint64_t seed) {
  Vocab v;
  for (int i = 0; i < entities; ++i) v.add_entity("e" + std::to_string(i));
  for (int i = 0; i < relations; ++i) v.add_relation("r" + std::to_string(i));
  Rng rng(seed);
  std::vector<Triple> triples;
  while (static_cast<int>(triples.size()) < edges) {
    EntityId h = static_cast<EntityId>(rng.next_index(static_cast<std::uint64_t>(entities)));
    EntityId t = static_cast<EntityId>(rng.next_index(static_cast<std::uint64_t>(entities)));
    RelationId r = static_cast<RelationId>(rng.next_index(static_cast<std::uint64_t>(relations)));
    triples.push_back({h, r, t});
  }
  return KnowledgeGraph(v, triples);
}

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "lqot_adjacency_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("calibrate_row oracle: softmax times n_t, observed pinned to 1") {
  // scores (ln 2, 0, 0): softmax = (0.5, 0.25, 0.25). Column 0 is observed
  // so it pins to exactly 1.0; the rest keep softmax * n_t with n_t = 1.
  std::vector<double> scores = {std::log(2.0), 0.0, 0.0};
  std::vector<double> out = calibrate_row(scores, {0}, 1, 0.0001);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("calibrate_row oracle: ceiling at 1 - delta") {
  // Uniform scores, n_t = 3: raw = 1.5 each, clamped to 1 - delta.
  std::vector<double> scores = {0.0, 0.0};
  std::vector<double> out = calibrate_row(scores, {}, 3, 0.0001);
  CHECK(out[0] == 1.0 - 0.0001);
  CHECK(out[1] == 1.0 - 0.0001);
}

TEST_CASE("calibrate_row is shift-invariant in the scores") {
  std::vector<double> base = {1.3, -0.2, 0.7, 2.1};
  std::vector<double> shifted = base;
  for (double& x : shifted) x += 1000.0;
  std::vector<double> a = calibrate_row(base, {2}, 2, 0.0001);
  std::vector<double> b = calibrate_row(shifted, {2}, 2, 0.0001);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("calibrate_row survives extreme scores without overflow") {
  std::vector<double> scores = {5000.0, -5000.0, 4999.0};
  std::vector<double> out = calibrate_row(scores, {}, 1, 0.0001);
  for (double x : out) {
    CHECK(std::isfinite(x));
    CHECK(x >= 0.0);
    CHECK(x <= 1.0 - 0.0001);
  }
  CHECK(out[0] > out[2]);
  CHECK(out[2] > out[1]);
}

TEST_CASE("sparse matrix stores rows sorted and answers point lookups") {
  SparseRelationMatrix m(0, 4);
  m.set_row(1, {{0, 0.5}, {3, 1.0}});
  CHECK(m.entry(1, 0) == 0.5);
  CHECK(m.entry(1, 3) == 1.0);
  CHECK(m.entry(1, 2) == 0.0);
  CHECK(m.entry(0, 0) == 0.0);
  CHECK(m.entry_count() == 2);
  CHECK_THROWS(m.set_row(2, {{3, 0.5}, {0, 0.5}}));  // not sorted
  CHECK_THROWS(m.set_row(2, {{1, 0.0}}));            // zero belief is "absent"
  CHECK_THROWS(m.set_row(2, {{1, 1.5}}));
}

TEST_CASE("build_matrix pins observed edges and caps the rest") {
  KnowledgeGraph kg = random_graph(20, 2, 60, 3);
  TrainConfig tc;
  tc.dim = 8;
  tc.epochs = 30;
  tc.seed = 5;
  ComplExModel model = train(init_model(kg.vocab(), tc), kg, tc).model;
  AdjacencyConfig ac;

  for (RelationId r = 0; r < 2; ++r) {
    SparseRelationMatrix m = build_matrix(model, kg, r, ac);
    CHECK(m.relation() == r);
    CHECK(m.size() == 20);
    for (EntityId h = 0; h < 20; ++h) {
      for (const auto& [col, value] : m.row(h)) {
        if (kg.has_triple(h, r, col)) {
          CHECK(value == 1.0);
        } else {
          CHECK(value > 0.0);
          CHECK(value <= 1.0 - ac.delta);
          CHECK(value >= ac.floor);
        }
      }
      // every observed edge must be present
      for (EntityId t : kg.neighbors(h, r)) CHECK(m.entry(h, t) == 1.0);
    }
  }
}

TEST_CASE("build_matrix respects top_k per row") {
  KnowledgeGraph kg = random_graph(30, 1, 40, 9);
  TrainConfig tc;
  tc.dim = 4;
  tc.epochs = 10;
  tc.seed = 1;
  ComplExModel model = train(init_model(kg.vocab(), tc), kg, tc).model;
  AdjacencyConfig ac;
  ac.top_k = 3;
  ac.floor = 0.0;  // keep everything above zero so top_k is the binding limit
  SparseRelationMatrix m = build_matrix(model, kg, 0, ac);
  for (EntityId h = 0; h < 30; ++h) {
    std::size_t observed = kg.neighbors(h, 0).size();
    CHECK(m.row(h).size() <= observed + 3);
  }
}

TEST_CASE("boolean_matrix is exactly the graph") {
  KnowledgeGraph kg = random_graph(15, 2, 40, 7);
  for (RelationId r = 0; r < 2; ++r) {
    SparseRelationMatrix m = boolean_matrix(kg, r);
    std::size_t expected = 0;
    for (EntityId h = 0; h < 15; ++h) expected += kg.neighbors(h, r).size();
    CHECK(m.entry_count() == expected);
    for (EntityId h = 0; h < 15; ++h)
      for (EntityId t = 0; t < 15; ++t)
        CHECK(m.entry(h, t) == (kg.has_triple(h, r, t) ? 1.0 : 0.0));
  }
}

TEST_CASE("matrix files round-trip bit-exact in both formats") {
  KnowledgeGraph kg = random_graph(12, 1, 30, 11);
  TrainConfig tc;
  tc.dim = 6;
  tc.epochs = 20;
  tc.seed = 2;
  ComplExModel model = train(init_model(kg.vocab(), tc), kg, tc).model;
  SparseRelationMatrix m = build_matrix(model, kg, 0, AdjacencyConfig{});

  fs::path dir = temp_dir();
  save_matrix_text(m, kg.vocab().relation_name(0), (dir / "m.txt").string());
  save_matrix_binary(m, kg.vocab().relation_name(0), (dir / "m.bin").string());
  SparseRelationMatrix from_text = load_matrix((dir / "m.txt").string(), kg.vocab());
  SparseRelationMatrix from_bin = load_matrix((dir / "m.bin").string(), kg.vocab());
  CHECK(from_text == m);
  CHECK(from_bin == m);
}

TEST_CASE("load_matrix rejects unknown relation names and junk files") {
  KnowledgeGraph kg = random_graph(5, 1, 8, 1);
  SparseRelationMatrix m = boolean_matrix(kg, 0);
  fs::path dir = temp_dir();
  save_matrix_binary(m, "no_such_relation", (dir / "alien.bin").string());
  CHECK_THROWS(load_matrix((dir / "alien.bin").string(), kg.vocab()));
  {
    std::ofstream out(dir / "junk.adj", std::ios::binary);
    out << "neither magic";
  }
  CHECK_THROWS(load_matrix((dir / "junk.adj").string(), kg.vocab()));
}

TEST_CASE("text format header is stable") {
  KnowledgeGraph kg = random_graph(4, 1, 5, 2);
  SparseRelationMatrix m = boolean_matrix(kg, 0);
  fs::path dir = temp_dir();
  fs::path p = dir / "header.txt";
  save_matrix_text(m, "r0", p.string());
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  CHECK(line == "lqot-adjacency 1 text");
  std::getline(in, line);
  CHECK(line == "r0");
}
