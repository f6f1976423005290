#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "lqot/kg.hpp"
#include "lqot/query.hpp"
#include "lqot/util.hpp"

using namespace lqot;
namespace fs = std::filesystem;

namespace {

// a --r1--> b --r1--> c, a --r2--> c, c --r2--> a, d isolated-ish
KnowledgeGraph tiny_graph() {
  Vocab v;
  EntityId a = v.add_entity("a"), b = v.add_entity("b"), c = v.add_entity("c");
  v.add_entity("d");
  RelationId r1 = v.add_relation("r1"), r2 = v.add_relation("r2");
  return KnowledgeGraph(v, {{a, r1, b}, {b, r1, c}, {a, r2, c}, {c, r2, a}});
}

KnowledgeGraph random_graph(int entities, int relations, int edges, std::uint64_t seed) {
  Vocab v;
  for (int i = 0; i < entities; ++i) v.add_entity("e" + std::to_string(i));
  for (int i = 0; i < relations; ++i) v.add_relation("r" + std::to_string(i));
  Rng rng(seed);
  std::vector<Triple> triples;
  for (int i = 0; i < edges; ++i)
    triples.push_back({static_cast<EntityId>(rng.next_index(static_cast<std::uint64_t>(entities))),
                       static_cast<RelationId>(rng.next_index(static_cast<std::uint64_t>(relations))),
                       static_cast<EntityId>(rng.next_index(static_cast<std::uint64_t>(entities)))});
  return KnowledgeGraph(v, triples);
}

// Random tree over the vocab; depth-bounded, all six node kinds.
QueryNode random_tree(Rng& rng, const KnowledgeGraph& kg, int depth) {
  std::uint64_t entities = kg.num_entities();
  std::uint64_t relations = kg.num_relations();
  if (depth == 0) return QueryNode::anchor(static_cast<EntityId>(rng.next_index(entities)));
  switch (rng.next_index(6)) {
    case 0: return QueryNode::anchor(static_cast<EntityId>(rng.next_index(entities)));
    case 1:
      return QueryNode::project(static_cast<RelationId>(rng.next_index(relations)),
                                random_tree(rng, kg, depth - 1));
    case 2:
      return QueryNode::neg_project(static_cast<RelationId>(rng.next_index(relations)),
                                    random_tree(rng, kg, depth - 1));
    case 3:
      return QueryNode::intersect(
          {random_tree(rng, kg, depth - 1), random_tree(rng, kg, depth - 1)});
    case 4:
      return QueryNode::set_union(
          {random_tree(rng, kg, depth - 1), random_tree(rng, kg, depth - 1)});
    default: return QueryNode::complement(random_tree(rng, kg, depth - 1));
  }
}

}  // namespace

TEST_CASE("parse the six operator forms") {
  KnowledgeGraph kg = tiny_graph();
  const Vocab& v = kg.vocab();

  QueryNode q1 = parse_query("(p r1 \"a\")", v);
  CHECK(q1 == QueryNode::project(0, QueryNode::anchor(0)));

  QueryNode q2 = parse_query("(np r2 \"b\")", v);
  CHECK(q2 == QueryNode::neg_project(1, QueryNode::anchor(1)));

  QueryNode q3 = parse_query("(i (p r1 \"a\") (p r2 \"a\"))", v);
  CHECK(q3.kind == NodeKind::Intersect);
  CHECK(q3.children.size() == 2);

  QueryNode q4 = parse_query("(u \"a\" \"b\" \"c\")", v);
  CHECK(q4.kind == NodeKind::Union);
  CHECK(q4.children.size() == 3);

  QueryNode q5 = parse_query("(n \"d\")", v);
  CHECK(q5 == QueryNode::complement(QueryNode::anchor(3)));

  QueryNode q6 = parse_query("(p r1 (p r1 \"a\"))", v);
  CHECK(q6 == QueryNode::project(0, QueryNode::project(0, QueryNode::anchor(0))));
}

TEST_CASE("parse tolerates irregular whitespace and escapes") {
  Vocab v;
  v.add_entity("needs \"quotes\" and \\slash");
  v.add_relation("rel name");
  QueryNode q = parse_query("  ( p \"rel name\"   \"needs \\\"quotes\\\" and \\\\slash\" ) ", v);
  CHECK(q == QueryNode::project(0, QueryNode::anchor(0)));
}

TEST_CASE("parse errors carry an offset and a reason") {
  KnowledgeGraph kg = tiny_graph();
  const Vocab& v = kg.vocab();
  CHECK_THROWS_AS(parse_query("", v), QueryParseError);
  CHECK_THROWS_AS(parse_query("(p r1 \"a\"", v), QueryParseError);       // unclosed
  CHECK_THROWS_AS(parse_query("(p r1 \"a\")x", v), QueryParseError);     // trailing
  CHECK_THROWS_AS(parse_query("(p r9 \"a\")", v), QueryParseError);      // unknown relation
  CHECK_THROWS_AS(parse_query("(p r1 \"zz\")", v), QueryParseError);     // unknown entity
  CHECK_THROWS_AS(parse_query("(i (p r1 \"a\"))", v), QueryParseError);  // arity < 2
  CHECK_THROWS_AS(parse_query("(x \"a\")", v), QueryParseError);         // unknown op
  CHECK_THROWS_AS(parse_query("(p r1 \"a\" \"b\")", v), QueryParseError);

  try {
    parse_query("(p r1 zz)", v);
    FAIL("expected QueryParseError");
  } catch (const QueryParseError& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
}

TEST_CASE("render emits canonical text and quotes only when needed") {
  Vocab v;
  v.add_entity("a");
  v.add_relation("plain");
  v.add_relation("has space");
  QueryNode tree = QueryNode::set_union(
      {QueryNode::project(0, QueryNode::anchor(0)), QueryNode::project(1, QueryNode::anchor(0))});
  CHECK(render_query(tree, v) == "(u (p plain \"a\") (p \"has space\" \"a\"))");
}

TEST_CASE("parse(render(t)) == t on random trees") {
  KnowledgeGraph kg = random_graph(12, 4, 30, 17);
  Rng rng(99);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    QueryNode tree = random_tree(rng, kg, 3);
    std::string text = render_query(tree, kg.vocab());
    QueryNode back = parse_query(text, kg.vocab());
    CHECK(back == tree);
    ++checked;
  }
  CHECK(checked == 500);
}

TEST_CASE("round-trip holds for hostile entity names") {
  Vocab v;
  v.add_entity("has \"quote\"");
  v.add_entity("back\\slash");
  v.add_entity("(parens)");
  v.add_entity("tab\tand space");
  v.add_relation("r (weird) \"rel\"");
  for (EntityId e = 0; e < 4; ++e) {
    QueryNode tree = QueryNode::project(0, QueryNode::anchor(e));
    CHECK(parse_query(render_query(tree, v), v) == tree);
  }
}

TEST_CASE("validate_query rejects malformed trees") {
  KnowledgeGraph kg = tiny_graph();
  const Vocab& v = kg.vocab();
  QueryNode bad_anchor = QueryNode::anchor(99);
  CHECK_THROWS_AS(validate_query(bad_anchor, v), std::invalid_argument);
  QueryNode bad_arity;
  bad_arity.kind = NodeKind::Intersect;
  bad_arity.children.push_back(QueryNode::anchor(0));
  CHECK_THROWS_AS(validate_query(bad_arity, v), std::invalid_argument);
  QueryNode bad_rel = QueryNode::project(7, QueryNode::anchor(0));
  CHECK_THROWS_AS(validate_query(bad_rel, v), std::invalid_argument);
  QueryNode anchored_child = QueryNode::anchor(0);
  anchored_child.children.push_back(QueryNode::anchor(1));
  CHECK_THROWS_AS(validate_query(anchored_child, v), std::invalid_argument);
}

TEST_CASE("traverse_answers implements the set semantics") {
  KnowledgeGraph kg = tiny_graph();
  const Vocab& v = kg.vocab();
  auto answers = [&](const char* text) { return traverse_answers(kg, parse_query(text, v)); };

  CHECK(answers("(p r1 \"a\")") == std::vector<EntityId>{1});
  CHECK(answers("(p r1 (p r1 \"a\"))") == std::vector<EntityId>{2});
  CHECK(answers("(u (p r1 \"a\") (p r2 \"a\"))") == std::vector<EntityId>{1, 2});
  CHECK(answers("(i (p r1 \"b\") (p r2 \"a\"))") == std::vector<EntityId>{2});
  CHECK(answers("(n \"a\")") == std::vector<EntityId>{1, 2, 3});
  // NegProject: everything NOT reachable from a via r1, including a itself.
  CHECK(answers("(np r1 \"a\")") == std::vector<EntityId>{0, 2, 3});
  // Complement of a projection equals NegProject of the same atom.
  CHECK(answers("(n (p r1 \"a\"))") == answers("(np r1 \"a\")"));
  // Projection from an empty set is empty.
  CHECK(answers("(p r1 \"d\")").empty());
}

TEST_CASE("shape names parse both ways") {
  for (QueryShape s : kAllShapes) CHECK(parse_shape(shape_name(s)) == s);
  CHECK_THROWS(parse_shape("9z"));
}

TEST_CASE("sample_query instantiates each shape with non-empty gold") {
  KnowledgeGraph kg = random_graph(30, 3, 150, 5);
  for (QueryShape shape : kAllShapes) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SampledQuery s = sample_query(kg, shape, mix_seed(77, seed));
      CHECK_FALSE(s.gold.empty());
      CHECK(std::is_sorted(s.gold.begin(), s.gold.end()));
      CHECK(s.gold == traverse_answers(kg, s.tree));
      validate_query(s.tree, kg.vocab());

      // the tree matches its shape
      const QueryNode& t = s.tree;
      switch (shape) {
        case QueryShape::OneP:
          CHECK(t.kind == NodeKind::Project);
          CHECK(t.children[0].kind == NodeKind::Anchor);
          break;
        case QueryShape::TwoP:
          CHECK(t.kind == NodeKind::Project);
          CHECK(t.children[0].kind == NodeKind::Project);
          CHECK(t.children[0].children[0].kind == NodeKind::Anchor);
          break;
        case QueryShape::ThreeP:
          CHECK(t.kind == NodeKind::Project);
          CHECK(t.children[0].kind == NodeKind::Project);
          CHECK(t.children[0].children[0].kind == NodeKind::Project);
          break;
        case QueryShape::TwoI:
          CHECK(t.kind == NodeKind::Intersect);
          REQUIRE(t.children.size() == 2);
          CHECK(t.children[0].kind == NodeKind::Project);
          CHECK(t.children[1].kind == NodeKind::Project);
          break;
        case QueryShape::TwoU:
          CHECK(t.kind == NodeKind::Union);
          REQUIRE(t.children.size() == 2);
          break;
        case QueryShape::Pin:
          CHECK(t.kind == NodeKind::Intersect);
          REQUIRE(t.children.size() == 2);
          CHECK(t.children[0].kind == NodeKind::Project);
          CHECK(t.children[0].children[0].kind == NodeKind::Project);
          CHECK(t.children[1].kind == NodeKind::NegProject);
          break;
      }
    }
  }
}

TEST_CASE("sample_query is deterministic in the seed") {
  KnowledgeGraph kg = random_graph(25, 2, 100, 8);
  for (QueryShape shape : kAllShapes) {
    SampledQuery a = sample_query(kg, shape, 123);
    SampledQuery b = sample_query(kg, shape, 123);
    CHECK(a.tree == b.tree);
    CHECK(a.gold == b.gold);
  }
}

TEST_CASE("2i anchors use distinct (head, relation) legs") {
  KnowledgeGraph kg = random_graph(20, 3, 120, 4);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SampledQuery s = sample_query(kg, QueryShape::TwoI, seed);
    const QueryNode& l = s.tree.children[0];
    const QueryNode& r = s.tree.children[1];
    bool distinct = l.relation != r.relation || l.children[0].entity != r.children[0].entity;
    CHECK(distinct);
  }
}

TEST_CASE("sample_query throws when the shape cannot be filled") {
  // one entity, a single self-loop: pin needs a complementable atom and
  // never finds a non-empty gold set.
  Vocab v;
  v.add_entity("a");
  RelationId r = v.add_relation("r");
  KnowledgeGraph kg(v, {{0, r, 0}});
  CHECK_THROWS(sample_query(kg, QueryShape::Pin, 0, 50));
}

TEST_CASE("workload files round-trip") {
  fs::path dir = fs::temp_directory_path() / "lqot_query_test";
  fs::create_directories(dir);
  fs::path p = dir / "wl.tsv";
  std::vector<WorkloadRecord> records = {
      {"(p r1 \"a\")", "who is a's r1?", {"b", "c"}},
      {"(u \"a\" \"b\")", "", {"a"}},
  };
  save_workload(records, p.string());
  std::vector<WorkloadRecord> back = load_workload(p.string());
  REQUIRE(back.size() == 2);
  CHECK(back[0].query == records[0].query);
  CHECK(back[0].question == records[0].question);
  CHECK(back[0].gold_names == records[0].gold_names);
  CHECK(back[1].question.empty());
  CHECK(back[1].gold_names == std::vector<std::string>{"a"});
}
