#pragma once

// Sparse relation matrices with calibrated edge beliefs.
//
// Row i of the matrix for relation r holds, for each kept column j, the
// model's belief that (i, r, j) holds. Calibration of one row:
//
//   p = softmax(score_all_tails(i, r))          (max-subtracted)
//   raw[j] = p[j] * n_t      where n_t = max(1, |observed tails of (i, r)|)
//   out[j] = 1.0             if (i, r, j) is an observed edge
//          = min(raw[j], 1 - delta)   otherwise
//
// Scaling by n_t turns one softmax mass into an expected edge count, so a
// head with several known tails can give several candidates high belief.
// The 1 - delta ceiling keeps unobserved edges strictly below certainty;
// exact 1.0 is reserved for observed edges, which makes the matrix collapse
// to the plain boolean adjacency when everything below 1.0 is dropped.
//
// Per row the matrix keeps all observed columns plus the top_k best
// unobserved ones with value >= floor. Entries absent from the row are 0.
//
// Two interchangeable file formats. Text:
//   line 1: "lqot-adjacency 1 text"
//   line 2: relation name (verbatim)
//   line 3: "<n> <entry_count>"
//   then one "<row> <col> <value>" per entry, sorted by (row, col), values
//   printed with 17 significant digits so they reparse exactly.
// Binary: magic "LQAM", version byte 1, u32 name length + bytes, u64 n,
// u64 entry count, then (u32 row, u32 col, f64 value) records in the same
// order. Both round-trip bit-exact.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lqot/complex_model.hpp"
#include "lqot/kg.hpp"

namespace lqot {

struct AdjacencyConfig {
  double delta = 0.0001;  // ceiling margin for unobserved edges
  int top_k = 50;         // kept unobserved entries per row
  double floor = 1e-4;    // minimum kept value
};

class SparseRelationMatrix {
 public:
  using Entry = std::pair<EntityId, double>;  // (col, value)

  SparseRelationMatrix() = default;
  SparseRelationMatrix(RelationId relation, std::size_t n);

  RelationId relation() const { return relation_; }
  std::size_t size() const { return n_; }
  std::size_t entry_count() const;

  // Entries must be sorted by column, in (0, 1], with no duplicates.
  void set_row(EntityId row, std::vector<Entry> entries);

  const std::vector<Entry>& row(EntityId row) const;
  double entry(EntityId row, EntityId col) const;  // 0 when absent

  friend bool operator==(const SparseRelationMatrix&, const SparseRelationMatrix&) = default;

 private:
  RelationId relation_ = -1;
  std::size_t n_ = 0;
  std::vector<std::vector<Entry>> rows_;
};

// Calibrates one row as described above. `observed` must be sorted and
// n_t >= 1; scores.size() fixes the row length.
std::vector<double> calibrate_row(std::span<const double> scores,
                                  const std::vector<EntityId>& observed, int n_t, double delta);

SparseRelationMatrix build_matrix(const ComplExModel& model, const KnowledgeGraph& kg,
                                  RelationId relation, const AdjacencyConfig& cfg);

// Degenerate {0,1} adjacency straight from the graph, no model involved.
SparseRelationMatrix boolean_matrix(const KnowledgeGraph& kg, RelationId relation);

void save_matrix_text(const SparseRelationMatrix& m, const std::string& relation_name,
                      const std::string& path);
void save_matrix_binary(const SparseRelationMatrix& m, const std::string& relation_name,
                        const std::string& path);

// Detects the format from the file header and resolves the stored relation
// name against `vocab` (unknown names are an error).
SparseRelationMatrix load_matrix(const std::string& path, const Vocab& vocab);

}  // namespace lqot
