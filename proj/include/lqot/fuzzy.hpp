#pragma once

// Fuzzy-set execution of query trees under the product t-norm.
//
// A fuzzy set over the entities is a dense vector t in [0,1]^n. Operators:
//
//   project(t, M)[j]     = max_i t[i] * M[i][j]
//   neg_project(t, M)[j] = max_i t[i] * (1 - M[i][j])
//   intersect(ts)[j]     = prod_i ts[i][j]
//   union(ts)[j]         = 1 - prod_i (1 - ts[i][j])
//   complement(t)[j]     = 1 - t[j]
//
// The max over i realizes the existential quantifier, the product is the
// t-norm. No renormalization happens between operators: scores compose
// multiplicatively through the whole tree.
//
// neg_project is evaluated lazily: absent matrix entries contribute
// t[i] * 1, so once the strongest remaining row lacks an entry for column j
// no weaker row can improve it. The result equals the dense formula exactly.
//
// execute() walks the tree bottom-up. After computing each node's vector it
// offers (node context, vector) to an optional hook which may return a
// replacement of the same length; this is the seam where external answer
// sources are fused in. A null hook, or one returning its input unchanged,
// leaves results bit-identical to the plain engine.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lqot/adjacency.hpp"
#include "lqot/kg.hpp"
#include "lqot/query.hpp"

namespace lqot {

using FuzzyVector = std::vector<double>;

// t-norm algebra shared by the engine and its oracles.
namespace tnorm {
inline double conj(double a, double b) { return a * b; }
inline double disj(double a, double b) { return 1.0 - (1.0 - a) * (1.0 - b); }
inline double negate(double a) { return 1.0 - a; }
}  // namespace tnorm

FuzzyVector one_hot(EntityId e, std::size_t n);

FuzzyVector project(const FuzzyVector& t, const SparseRelationMatrix& m);
FuzzyVector neg_project(const FuzzyVector& t, const SparseRelationMatrix& m);
FuzzyVector intersect(std::span<const FuzzyVector> ts);
FuzzyVector fuzzy_union(std::span<const FuzzyVector> ts);
FuzzyVector complement(const FuzzyVector& t);

using MatrixMap = std::unordered_map<RelationId, SparseRelationMatrix>;

struct NodeContext {
  NodeKind kind = NodeKind::Anchor;
  RelationId relation = -1;          // Project / NegProject
  const FuzzyVector* child = nullptr;  // input vector of unary nodes
  bool is_root = false;
  int node_index = 0;  // postorder position, stable per tree
};

// May return a replacement vector (same length). Receives the node's
// computed vector by value.
using NodeHook = std::function<FuzzyVector(const NodeContext&, FuzzyVector)>;

struct ScoredEntity {
  EntityId id;
  double score;
  friend bool operator==(const ScoredEntity&, const ScoredEntity&) = default;
};

struct TraceEntry {
  int node_index;
  NodeKind kind;
  RelationId relation;
  std::vector<ScoredEntity> top;  // up to 10 entries
};
using ExecutionTrace = std::vector<TraceEntry>;

// Evaluates the tree over n entities. Every relation used by the tree must
// be present in `matrices` (missing ones raise std::runtime_error naming the
// relation id). `hook` and `trace` may be null.
FuzzyVector execute(const QueryNode& tree, std::size_t n, const MatrixMap& matrices,
                    const NodeHook* hook = nullptr, ExecutionTrace* trace = nullptr);

// Top k entries by (score desc, id asc); k larger than n clamps to n.
std::vector<ScoredEntity> top_k_ids(const FuzzyVector& t, std::size_t k);
std::vector<std::pair<std::string, double>> top_k(const FuzzyVector& t, std::size_t k,
                                                  const Vocab& vocab);

std::string format_trace(const ExecutionTrace& trace, const Vocab& vocab);

}  // namespace lqot
