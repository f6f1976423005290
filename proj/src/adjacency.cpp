#include "lqot/adjacency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "lqot/util.hpp"

namespace lqot {

namespace {

constexpr char kMagic[4] = {'L', 'Q', 'A', 'M'};
constexpr std::uint8_t kVersion = 1;
constexpr const char* kTextHeader = "lqot-adjacency 1 text";

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SparseRelationMatrix::SparseRelationMatrix(RelationId relation, std::size_t n)
    : relation_(relation), n_(n), rows_(n) {}

std::size_t SparseRelationMatrix::entry_count() const {
  std::size_t c = 0;
  for (const auto& r : rows_) c += r.size();
  return c;
}

void SparseRelationMatrix::set_row(EntityId row, std::vector<Entry> entries) {
  if (row < 0 || static_cast<std::size_t>(row) >= n_)
    throw std::out_of_range("SparseRelationMatrix::set_row: row out of range");
  EntityId prev = -1;
  for (const auto& [col, value] : entries) {
    if (col < 0 || static_cast<std::size_t>(col) >= n_)
      throw std::out_of_range("SparseRelationMatrix::set_row: column out of range");
    if (col <= prev)
      throw std::invalid_argument("SparseRelationMatrix::set_row: columns must be sorted, unique");
    if (!(value > 0.0) || value > 1.0)
      throw std::invalid_argument("SparseRelationMatrix::set_row: value outside (0, 1]");
    prev = col;
  }
  rows_[static_cast<std::size_t>(row)] = std::move(entries);
}

const std::vector<SparseRelationMatrix::Entry>& SparseRelationMatrix::row(EntityId row) const {
  if (row < 0 || static_cast<std::size_t>(row) >= n_)
    throw std::out_of_range("SparseRelationMatrix::row: row out of range");
  return rows_[static_cast<std::size_t>(row)];
}

double SparseRelationMatrix::entry(EntityId row, EntityId col) const {
  const auto& r = this->row(row);
  auto it = std::lower_bound(r.begin(), r.end(), col,
                             [](const Entry& e, EntityId c) { return e.first < c; });
  if (it != r.end() && it->first == col) return it->second;
  return 0.0;
}

std::vector<double> calibrate_row(std::span<const double> scores,
                                  const std::vector<EntityId>& observed, int n_t, double delta) {
  if (n_t < 1) throw std::invalid_argument("calibrate_row: n_t must be >= 1");
  if (!(delta > 0.0) || delta >= 1.0)
    throw std::invalid_argument("calibrate_row: delta must be in (0, 1)");

  double mx = -std::numeric_limits<double>::infinity();
  for (double s : scores) mx = std::max(mx, s);

  std::vector<double> out(scores.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    out[j] = std::exp(scores[j] - mx);
    sum += out[j];
  }
  double cap = 1.0 - delta;
  double scale = static_cast<double>(n_t) / sum;
  for (double& v : out) v = std::min(v * scale, cap);
  for (EntityId j : observed) {
    if (j < 0 || static_cast<std::size_t>(j) >= out.size())
      throw std::out_of_range("calibrate_row: observed column out of range");
    out[static_cast<std::size_t>(j)] = 1.0;
  }
  return out;
}

SparseRelationMatrix build_matrix(const ComplExModel& model, const KnowledgeGraph& kg,
                                  RelationId relation, const AdjacencyConfig& cfg) {
  if (relation < 0 || static_cast<std::size_t>(relation) >= kg.num_relations())
    throw std::out_of_range("build_matrix: relation out of range");
  if (static_cast<std::size_t>(model.num_entities) != kg.num_entities())
    throw std::invalid_argument("build_matrix: model and graph disagree on entity count");
  if (cfg.top_k < 0) throw std::invalid_argument("build_matrix: top_k must be >= 0");

  std::size_t n = kg.num_entities();
  SparseRelationMatrix m(relation, n);
  std::vector<std::pair<double, EntityId>> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    EntityId head = static_cast<EntityId>(i);
    const auto& observed = kg.neighbors(head, relation);
    std::vector<double> scores = score_all_tails(model, head, relation);
    std::vector<double> values =
        calibrate_row(scores, observed, kg.tail_count(head, relation), cfg.delta);

    candidates.clear();
    std::size_t oi = 0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      EntityId col = static_cast<EntityId>(j);
      if (oi < observed.size() && observed[oi] == col) {
        ++oi;  // observed edges are kept unconditionally
        continue;
      }
      if (values[j] >= cfg.floor) candidates.emplace_back(values[j], col);
    }
    std::size_t keep = std::min(candidates.size(), static_cast<std::size_t>(cfg.top_k));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    candidates.resize(keep);

    std::vector<SparseRelationMatrix::Entry> entries;
    entries.reserve(observed.size() + keep);
    for (EntityId col : observed) entries.emplace_back(col, 1.0);
    for (const auto& [value, col] : candidates) entries.emplace_back(col, value);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    m.set_row(head, std::move(entries));
  }
  return m;
}

SparseRelationMatrix boolean_matrix(const KnowledgeGraph& kg, RelationId relation) {
  if (relation < 0 || static_cast<std::size_t>(relation) >= kg.num_relations())
    throw std::out_of_range("boolean_matrix: relation out of range");
  std::size_t n = kg.num_entities();
  SparseRelationMatrix m(relation, n);
  for (std::size_t i = 0; i < n; ++i) {
    EntityId head = static_cast<EntityId>(i);
    const auto& tails = kg.neighbors(head, relation);
    if (tails.empty()) continue;
    std::vector<SparseRelationMatrix::Entry> entries;
    entries.reserve(tails.size());
    for (EntityId t : tails) entries.emplace_back(t, 1.0);
    m.set_row(head, std::move(entries));
  }
  return m;
}

void save_matrix_text(const SparseRelationMatrix& m, const std::string& relation_name,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_matrix_text: cannot open " + path + " for writing");
  out << kTextHeader << '\n' << relation_name << '\n';
  out << m.size() << ' ' << m.entry_count() << '\n';
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const auto& [col, value] : m.row(static_cast<EntityId>(i)))
      out << i << ' ' << col << ' ' << format_value(value) << '\n';
  if (!out) throw std::runtime_error("save_matrix_text: write failed for " + path);
}

void save_matrix_binary(const SparseRelationMatrix& m, const std::string& relation_name,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_matrix_binary: cannot open " + path + " for writing");
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), 1);
  std::uint32_t name_len = static_cast<std::uint32_t>(relation_name.size());
  out.write(reinterpret_cast<const char*>(&name_len), 4);
  out.write(relation_name.data(), name_len);
  std::uint64_t n = m.size(), count = m.entry_count();
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&count), 8);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::uint32_t row = static_cast<std::uint32_t>(i);
    for (const auto& [col, value] : m.row(static_cast<EntityId>(i))) {
      std::uint32_t c = static_cast<std::uint32_t>(col);
      out.write(reinterpret_cast<const char*>(&row), 4);
      out.write(reinterpret_cast<const char*>(&c), 4);
      out.write(reinterpret_cast<const char*>(&value), 8);
    }
  }
  if (!out) throw std::runtime_error("save_matrix_binary: write failed for " + path);
}

namespace {

SparseRelationMatrix assemble(const std::string& path, const std::string& name, std::uint64_t n,
                              const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& entries,
                              const Vocab& vocab) {
  auto rel = vocab.relation_id(name);
  if (!rel)
    throw std::runtime_error("load_matrix: " + path + ": unknown relation '" + name + "'");
  SparseRelationMatrix m(*rel, static_cast<std::size_t>(n));
  std::vector<SparseRelationMatrix::Entry> row;
  std::uint32_t current = 0;
  auto flush = [&](std::uint32_t upto) {
    if (!row.empty()) {
      m.set_row(static_cast<EntityId>(current), std::move(row));
      row = {};
    }
    current = upto;
  };
  for (const auto& [r, c, v] : entries) {
    if (r != current) {
      if (r < current) throw std::runtime_error("load_matrix: " + path + ": rows out of order");
      flush(r);
    }
    row.emplace_back(static_cast<EntityId>(c), v);
  }
  flush(current);
  return m;
}

SparseRelationMatrix load_matrix_text(std::ifstream& in, const std::string& path,
                                      const Vocab& vocab) {
  std::string header, name, dims;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != kTextHeader)
    throw std::runtime_error("load_matrix: " + path + ": bad or unsupported text header");
  if (!std::getline(in, name)) throw std::runtime_error("load_matrix: " + path + ": truncated");
  if (!name.empty() && name.back() == '\r') name.pop_back();
  if (!std::getline(in, dims)) throw std::runtime_error("load_matrix: " + path + ": truncated");
  unsigned long long n = 0, count = 0;
  if (std::sscanf(dims.c_str(), "%llu %llu", &n, &count) != 2)
    throw std::runtime_error("load_matrix: " + path + ": bad dimension line");

  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> entries;
  entries.reserve(count);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::uint32_t r = 0, c = 0;
    double v = 0.0;
    if (std::sscanf(line.c_str(), "%u %u %lf", &r, &c, &v) != 3)
      throw std::runtime_error("load_matrix: " + path + ": bad entry line: " + line);
    entries.emplace_back(r, c, v);
  }
  if (entries.size() != count)
    throw std::runtime_error("load_matrix: " + path + ": entry count mismatch");
  return assemble(path, name, n, entries, vocab);
}

SparseRelationMatrix load_matrix_binary(std::ifstream& in, const std::string& path,
                                        const Vocab& vocab) {
  std::uint8_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 1);
  if (!in || version != kVersion)
    throw std::runtime_error("load_matrix: " + path + ": unsupported binary version");
  std::uint32_t name_len = 0;
  in.read(reinterpret_cast<char*>(&name_len), 4);
  std::string name(name_len, '\0');
  in.read(name.data(), name_len);
  std::uint64_t n = 0, count = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&count), 8);
  if (!in) throw std::runtime_error("load_matrix: " + path + ": truncated header");

  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> entries;
  entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t r = 0, c = 0;
    double v = 0.0;
    in.read(reinterpret_cast<char*>(&r), 4);
    in.read(reinterpret_cast<char*>(&c), 4);
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw std::runtime_error("load_matrix: " + path + ": truncated entries");
    entries.emplace_back(r, c, v);
  }
  return assemble(path, name, n, entries, vocab);
}

}  // namespace

SparseRelationMatrix load_matrix(const std::string& path, const Vocab& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_matrix: cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in && std::memcmp(magic, kMagic, 4) == 0) return load_matrix_binary(in, path, vocab);
  in.clear();
  in.seekg(0);
  return load_matrix_text(in, path, vocab);
}

}  // namespace lqot
