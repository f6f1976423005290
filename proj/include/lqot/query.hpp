#pragma once

// First-order queries with one free variable, shaped as computation trees.
//
// Node kinds and their set semantics over a graph:
//   Anchor(e)          {e}
//   Project(r, S)      entities reachable from any member of S via r
//   NegProject(r, S)   complement of Project(r, S)
//   Intersect(S...)    set intersection (arity >= 2)
//   Union(S...)        set union (arity >= 2)
//   Complement(S)      full complement over the entity set
//
// NegProject negates the edge atom itself; Complement negates a whole
// subquery. They coincide only when the child is a single anchor.
//
// Concrete syntax (s-expressions):
//   node   := anchor | "(" op ")"
//   anchor := '"' name '"'
//   op     := "p" rel node | "np" rel node | "n" node
//           | "i" node node+ | "u" node node+
// Entity names are always double-quoted ('\' escapes '"' and '\').
// Relation names are bare tokens, quoted only when they contain
// whitespace, quotes or parentheses. render_query() emits the canonical
// single-spaced form and parse(render(t)) == t.
//
// Workload files are TSV: query text, optional natural-language question,
// comma-separated gold entity names.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lqot/kg.hpp"

namespace lqot {

enum class NodeKind { Anchor, Project, NegProject, Intersect, Union, Complement };

struct QueryNode {
  NodeKind kind = NodeKind::Anchor;
  EntityId entity = -1;      // Anchor only
  RelationId relation = -1;  // Project / NegProject only
  std::vector<QueryNode> children;

  friend bool operator==(const QueryNode&, const QueryNode&) = default;

  static QueryNode anchor(EntityId e);
  static QueryNode project(RelationId r, QueryNode child);
  static QueryNode neg_project(RelationId r, QueryNode child);
  static QueryNode intersect(std::vector<QueryNode> children);
  static QueryNode set_union(std::vector<QueryNode> children);
  static QueryNode complement(QueryNode child);
};

struct QueryParseError : std::runtime_error {
  QueryParseError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " (at offset " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

// Throws QueryParseError on syntax errors (with character offset), unknown
// entity or relation names, and arity violations.
QueryNode parse_query(std::string_view text, const Vocab& vocab);

std::string render_query(const QueryNode& tree, const Vocab& vocab);

// Structural validity: anchors are leaves, projections are unary, set ops
// have arity >= 2, ids are within the vocab. Throws std::invalid_argument.
void validate_query(const QueryNode& tree, const Vocab& vocab);

// Exact set semantics; the reference answer oracle. Returns sorted ids.
std::vector<EntityId> traverse_answers(const KnowledgeGraph& kg, const QueryNode& tree);

enum class QueryShape { OneP, TwoP, ThreeP, TwoI, TwoU, Pin };

constexpr QueryShape kAllShapes[] = {QueryShape::OneP, QueryShape::TwoP, QueryShape::ThreeP,
                                     QueryShape::TwoI, QueryShape::TwoU, QueryShape::Pin};

// "1p" "2p" "3p" "2i" "2u" "pin"
const char* shape_name(QueryShape s);
QueryShape parse_shape(std::string_view name);

struct SampledQuery {
  QueryNode tree;
  std::vector<EntityId> gold;  // sorted, non-empty, from the full graph
};

// Instantiates the shape by random walks over kg, so every positive edge in
// the tree exists. Retries until the gold set is non-empty; throws after
// max_retries attempts. Deterministic in (kg, shape, seed).
SampledQuery sample_query(const KnowledgeGraph& kg, QueryShape shape, std::uint64_t seed,
                          int max_retries = 1000);

struct WorkloadRecord {
  std::string query;
  std::string question;  // may be empty
  std::vector<std::string> gold_names;
};

std::vector<WorkloadRecord> load_workload(const std::string& path);
void save_workload(const std::vector<WorkloadRecord>& records, const std::string& path);

}  // namespace lqot
