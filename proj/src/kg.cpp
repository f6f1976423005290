#include "lqot/kg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "lqot/util.hpp"

namespace lqot {

EntityId Vocab::add_entity(const std::string& name) {
  auto it = entity_ids_.find(name);
  if (it != entity_ids_.end()) return it->second;
  EntityId id = static_cast<EntityId>(entities_.size());
  entities_.push_back(name);
  entity_ids_.emplace(name, id);
  return id;
}

RelationId Vocab::add_relation(const std::string& name) {
  auto it = relation_ids_.find(name);
  if (it != relation_ids_.end()) return it->second;
  RelationId id = static_cast<RelationId>(relations_.size());
  relations_.push_back(name);
  relation_ids_.emplace(name, id);
  return id;
}

std::optional<EntityId> Vocab::entity_id(const std::string& name) const {
  auto it = entity_ids_.find(name);
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Vocab::relation_id(const std::string& name) const {
  auto it = relation_ids_.find(name);
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::entity_name(EntityId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= entities_.size())
    throw std::out_of_range("Vocab::entity_name: id " + std::to_string(id) + " out of range");
  return entities_[static_cast<std::size_t>(id)];
}

const std::string& Vocab::relation_name(RelationId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= relations_.size())
    throw std::out_of_range("Vocab::relation_name: id " + std::to_string(id) + " out of range");
  return relations_[static_cast<std::size_t>(id)];
}

KnowledgeGraph::KnowledgeGraph(Vocab vocab, std::vector<Triple> triples)
    : vocab_(std::move(vocab)) {
  std::unordered_set<Triple, TripleHash> seen;
  seen.reserve(triples.size());
  triples_.reserve(triples.size());
  for (const Triple& t : triples) {
    if (t.head < 0 || static_cast<std::size_t>(t.head) >= vocab_.num_entities() ||
        t.tail < 0 || static_cast<std::size_t>(t.tail) >= vocab_.num_entities() ||
        t.relation < 0 || static_cast<std::size_t>(t.relation) >= vocab_.num_relations()) {
      throw std::invalid_argument("KnowledgeGraph: triple references id outside vocab");
    }
    if (seen.insert(t).second) triples_.push_back(t);
  }
  for (const Triple& t : triples_) out_[out_key(t.head, t.relation)].push_back(t.tail);
  for (auto& [key, tails] : out_) std::sort(tails.begin(), tails.end());
}

const std::vector<EntityId>& KnowledgeGraph::neighbors(EntityId head, RelationId relation) const {
  static const std::vector<EntityId> empty;
  auto it = out_.find(out_key(head, relation));
  return it == out_.end() ? empty : it->second;
}

bool KnowledgeGraph::has_triple(EntityId head, RelationId relation, EntityId tail) const {
  const auto& tails = neighbors(head, relation);
  return std::binary_search(tails.begin(), tails.end(), tail);
}

int KnowledgeGraph::tail_count(EntityId head, RelationId relation) const {
  return std::max<int>(1, static_cast<int>(neighbors(head, relation).size()));
}

void KnowledgeGraph::save(const std::string& path) const {
  save_triples(triples_, vocab_, path);
}

KnowledgeGraph load_triples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_triples: cannot open " + path);

  Vocab vocab;
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 3)
      throw std::runtime_error("load_triples: " + path + ":" + std::to_string(line_no) +
                               ": expected 3 tab-separated fields, got " +
                               std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw std::runtime_error("load_triples: " + path + ":" + std::to_string(line_no) +
                               ": empty field");

    Triple t;
    t.head = vocab.add_entity(fields[0]);
    t.relation = vocab.add_relation(fields[1]);
    t.tail = vocab.add_entity(fields[2]);
    triples.push_back(t);
  }
  if (triples.empty())
    throw std::runtime_error("load_triples: " + path + ": no triples found");
  return KnowledgeGraph(std::move(vocab), std::move(triples));
}

SplitResult split_edges(const KnowledgeGraph& kg, double keep_fraction, std::uint64_t seed) {
  if (!(keep_fraction > 0.0) || keep_fraction > 1.0)
    throw std::invalid_argument("split_edges: keep_fraction must be in (0, 1]");

  const auto& all = kg.triples();
  std::size_t n = all.size();
  std::size_t keep = static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(n)));
  keep = std::min(keep, n);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<bool> kept(n, false);
  for (std::size_t i = 0; i < keep; ++i) kept[order[i]] = true;

  std::vector<Triple> train_triples, removed;
  train_triples.reserve(keep);
  removed.reserve(n - keep);
  for (std::size_t i = 0; i < n; ++i) (kept[i] ? train_triples : removed).push_back(all[i]);

  return SplitResult{KnowledgeGraph(kg.vocab(), std::move(train_triples)), std::move(removed)};
}

void save_triples(const std::vector<Triple>& triples, const Vocab& vocab,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_triples: cannot open " + path + " for writing");
  for (const Triple& t : triples) {
    out << vocab.entity_name(t.head) << '\t' << vocab.relation_name(t.relation) << '\t'
        << vocab.entity_name(t.tail) << '\n';
  }
  if (!out) throw std::runtime_error("save_triples: write failed for " + path);
}

}  // namespace lqot
