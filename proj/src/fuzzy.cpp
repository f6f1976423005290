#include "lqot/fuzzy.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace lqot {

FuzzyVector one_hot(EntityId e, std::size_t n) {
  if (e < 0 || static_cast<std::size_t>(e) >= n)
    throw std::out_of_range("one_hot: entity id out of range");
  FuzzyVector t(n, 0.0);
  t[static_cast<std::size_t>(e)] = 1.0;
  return t;
}

FuzzyVector project(const FuzzyVector& t, const SparseRelationMatrix& m) {
  if (t.size() != m.size()) throw std::invalid_argument("project: size mismatch");
  FuzzyVector out(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double ti = t[i];
    if (ti == 0.0) continue;
    for (const auto& [col, value] : m.row(static_cast<EntityId>(i))) {
      double v = ti * value;
      std::size_t j = static_cast<std::size_t>(col);
      if (v > out[j]) out[j] = v;
    }
  }
  return out;
}

FuzzyVector neg_project(const FuzzyVector& t, const SparseRelationMatrix& m) {
  if (t.size() != m.size()) throw std::invalid_argument("neg_project: size mismatch");
  std::size_t n = t.size();
  FuzzyVector out(n, 0.0);

  // Rows in descending t order. Once a row has no entry for column j its
  // contribution is t[i] * 1, which no later (weaker) row can beat, so j is
  // finished.
  std::vector<EntityId> support;
  for (std::size_t i = 0; i < n; ++i)
    if (t[i] > 0.0) support.push_back(static_cast<EntityId>(i));
  if (support.empty()) return out;
  std::sort(support.begin(), support.end(), [&](EntityId a, EntityId b) {
    double ta = t[static_cast<std::size_t>(a)], tb = t[static_cast<std::size_t>(b)];
    if (ta != tb) return ta > tb;
    return a < b;
  });

  std::vector<EntityId> open(n);
  for (std::size_t j = 0; j < n; ++j) open[j] = static_cast<EntityId>(j);

  for (EntityId i : support) {
    if (open.empty()) break;
    double ti = t[static_cast<std::size_t>(i)];
    const auto& row = m.row(i);
    std::vector<EntityId> still_open;
    still_open.reserve(row.size());
    std::size_t ri = 0;
    for (EntityId j : open) {
      while (ri < row.size() && row[ri].first < j) ++ri;
      std::size_t jj = static_cast<std::size_t>(j);
      if (ri < row.size() && row[ri].first == j) {
        double v = ti * (1.0 - row[ri].second);
        if (v > out[jj]) out[jj] = v;
        still_open.push_back(j);
      } else {
        // Absent entry: dense formula gives t[i] * (1 - 0).
        double v = ti * 1.0;
        if (v > out[jj]) out[jj] = v;
      }
    }
    open = std::move(still_open);
  }
  return out;
}

FuzzyVector intersect(std::span<const FuzzyVector> ts) {
  if (ts.size() < 2) throw std::invalid_argument("intersect: need at least 2 operands");
  FuzzyVector out = ts[0];
  for (std::size_t c = 1; c < ts.size(); ++c) {
    if (ts[c].size() != out.size()) throw std::invalid_argument("intersect: size mismatch");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = tnorm::conj(out[j], ts[c][j]);
  }
  return out;
}

FuzzyVector fuzzy_union(std::span<const FuzzyVector> ts) {
  if (ts.size() < 2) throw std::invalid_argument("fuzzy_union: need at least 2 operands");
  FuzzyVector out = ts[0];
  for (std::size_t c = 1; c < ts.size(); ++c) {
    if (ts[c].size() != out.size()) throw std::invalid_argument("fuzzy_union: size mismatch");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = tnorm::disj(out[j], ts[c][j]);
  }
  return out;
}

FuzzyVector complement(const FuzzyVector& t) {
  FuzzyVector out(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) out[j] = tnorm::negate(t[j]);
  return out;
}

namespace {

const SparseRelationMatrix& matrix_for(const MatrixMap& matrices, RelationId r) {
  auto it = matrices.find(r);
  if (it == matrices.end())
    throw std::runtime_error("execute: no adjacency matrix for relation id " + std::to_string(r));
  return it->second;
}

FuzzyVector execute_node(const QueryNode& node, std::size_t n, const MatrixMap& matrices,
                         const NodeHook* hook, ExecutionTrace* trace, bool is_root,
                         int& next_index) {
  FuzzyVector result;
  const FuzzyVector* child_view = nullptr;
  FuzzyVector child_storage;

  switch (node.kind) {
    case NodeKind::Anchor:
      result = one_hot(node.entity, n);
      break;
    case NodeKind::Project:
    case NodeKind::NegProject: {
      child_storage = execute_node(node.children[0], n, matrices, hook, trace, false, next_index);
      child_view = &child_storage;
      const SparseRelationMatrix& m = matrix_for(matrices, node.relation);
      result = node.kind == NodeKind::Project ? project(child_storage, m)
                                              : neg_project(child_storage, m);
      break;
    }
    case NodeKind::Complement:
      child_storage = execute_node(node.children[0], n, matrices, hook, trace, false, next_index);
      child_view = &child_storage;
      result = complement(child_storage);
      break;
    case NodeKind::Intersect:
    case NodeKind::Union: {
      std::vector<FuzzyVector> inputs;
      inputs.reserve(node.children.size());
      for (const QueryNode& c : node.children)
        inputs.push_back(execute_node(c, n, matrices, hook, trace, false, next_index));
      result = node.kind == NodeKind::Intersect ? intersect(inputs) : fuzzy_union(inputs);
      break;
    }
  }

  NodeContext ctx;
  ctx.kind = node.kind;
  ctx.relation = node.relation;
  ctx.child = child_view;
  ctx.is_root = is_root;
  ctx.node_index = next_index++;

  if (hook != nullptr && *hook) {
    result = (*hook)(ctx, std::move(result));
    if (result.size() != n) throw std::runtime_error("execute: hook changed vector length");
  }
  if (trace != nullptr) {
    TraceEntry entry;
    entry.node_index = ctx.node_index;
    entry.kind = node.kind;
    entry.relation = node.relation;
    entry.top = top_k_ids(result, 10);
    trace->push_back(std::move(entry));
  }
  return result;
}

}  // namespace

FuzzyVector execute(const QueryNode& tree, std::size_t n, const MatrixMap& matrices,
                    const NodeHook* hook, ExecutionTrace* trace) {
  int next_index = 0;
  return execute_node(tree, n, matrices, hook, trace, true, next_index);
}

std::vector<ScoredEntity> top_k_ids(const FuzzyVector& t, std::size_t k) {
  k = std::min(k, t.size());
  std::vector<ScoredEntity> all(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    all[i] = ScoredEntity{static_cast<EntityId>(i), t[i]};
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    [](const ScoredEntity& a, const ScoredEntity& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.id < b.id;
                    });
  all.resize(k);
  return all;
}

std::vector<std::pair<std::string, double>> top_k(const FuzzyVector& t, std::size_t k,
                                                  const Vocab& vocab) {
  std::vector<std::pair<std::string, double>> out;
  for (const ScoredEntity& e : top_k_ids(t, k)) out.emplace_back(vocab.entity_name(e.id), e.score);
  return out;
}

namespace {

const char* kind_label(NodeKind k) {
  switch (k) {
    case NodeKind::Anchor: return "anchor";
    case NodeKind::Project: return "project";
    case NodeKind::NegProject: return "neg_project";
    case NodeKind::Intersect: return "intersect";
    case NodeKind::Union: return "union";
    case NodeKind::Complement: return "complement";
  }
  return "?";
}

}  // namespace

std::string format_trace(const ExecutionTrace& trace, const Vocab& vocab) {
  std::ostringstream out;
  for (const TraceEntry& e : trace) {
    out << "node " << e.node_index << " " << kind_label(e.kind);
    if (e.kind == NodeKind::Project || e.kind == NodeKind::NegProject)
      out << " rel=" << vocab.relation_name(e.relation);
    out << " top:";
    for (const ScoredEntity& s : e.top) {
      out << ' ' << vocab.entity_name(s.id) << '=';
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6g", s.score);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace lqot
