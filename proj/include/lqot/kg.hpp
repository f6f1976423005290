#pragma once

// Triple store for a directed, labeled knowledge graph.
//
// Storage model:
//   - Vocab interns entity and relation names in first-seen order, so ids are
//     dense in [0, n) and name<->id maps stay bijective.
//   - KnowledgeGraph owns a deduplicated triple list plus an out-edge index
//     keyed by (head, relation) with sorted tail lists. The graph is
//     immutable after construction; query answering assumes the index never
//     changes underneath it.
//
// File format: UTF-8 TSV, one "head<TAB>relation<TAB>tail" per line. Lines
// whose first non-space character is '#' are comments. Blank lines are
// skipped. Anything else with a field count != 3 or an empty field is an
// error that names the 1-based line number.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lqot {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
  EntityId head = -1;
  RelationId relation = -1;
  EntityId tail = -1;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const {
    std::uint64_t k = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.head)) << 40) ^
                      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.relation)) << 20) ^
                      static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.tail));
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdull;
    k ^= k >> 33;
    return static_cast<std::size_t>(k);
  }
};

class Vocab {
 public:
  EntityId add_entity(const std::string& name);
  RelationId add_relation(const std::string& name);

  std::optional<EntityId> entity_id(const std::string& name) const;
  std::optional<RelationId> relation_id(const std::string& name) const;

  const std::string& entity_name(EntityId id) const;
  const std::string& relation_name(RelationId id) const;

  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
};

class KnowledgeGraph {
 public:
  // Deduplicates triples (first occurrence kept) and builds the out-index.
  // Throws std::invalid_argument on ids outside the vocab.
  KnowledgeGraph(Vocab vocab, std::vector<Triple> triples);

  const Vocab& vocab() const { return vocab_; }
  const std::vector<Triple>& triples() const { return triples_; }
  std::size_t num_entities() const { return vocab_.num_entities(); }
  std::size_t num_relations() const { return vocab_.num_relations(); }

  // Sorted tail ids of (head, relation); empty list when none exist.
  const std::vector<EntityId>& neighbors(EntityId head, RelationId relation) const;

  bool has_triple(EntityId head, RelationId relation, EntityId tail) const;

  // max(1, |neighbors|); the lower bound keeps downstream scale factors >= 1.
  int tail_count(EntityId head, RelationId relation) const;

  void save(const std::string& path) const;

 private:
  static std::uint64_t out_key(EntityId h, RelationId r) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(h)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(r));
  }

  Vocab vocab_;
  std::vector<Triple> triples_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> out_;
};

// Parses the TSV format described above. Errors carry the offending line
// number; a file with zero triples is an error.
KnowledgeGraph load_triples(const std::string& path);

struct SplitResult {
  KnowledgeGraph train;          // shares the full graph's vocab
  std::vector<Triple> removed;   // complement, original order
};

// Keeps ceil(keep_fraction * |triples|) uniformly chosen triples (order
// preserved) and returns the rest as `removed`. keep_fraction must lie in
// (0, 1]. Deterministic in (graph, keep_fraction, seed).
SplitResult split_edges(const KnowledgeGraph& kg, double keep_fraction, std::uint64_t seed);

// Writes triples in the 3-column TSV format (used for split manifests).
void save_triples(const std::vector<Triple>& triples, const Vocab& vocab,
                  const std::string& path);

}  // namespace lqot
