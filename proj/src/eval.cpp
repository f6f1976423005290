#include "lqot/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "lqot/adjacency.hpp"
#include "lqot/complex_model.hpp"
#include "lqot/llm.hpp"
#include "lqot/util.hpp"

namespace lqot {

int hit_at_k(std::span<const EntityId> ranked, const std::vector<EntityId>& gold, int k) {
  if (k <= 0) throw std::invalid_argument("hit_at_k: k must be positive");
  std::size_t upto = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < upto; ++i)
    if (std::binary_search(gold.begin(), gold.end(), ranked[i])) return 1;
  return 0;
}

namespace {

// Slot assignment for the enumeration oracle: slot 0 is the target, each
// projection whose child is not an anchor opens a fresh existential slot
// for that child; set operators and complements share their parent's slot.
void assign_slots(const QueryNode& node, int slot,
                  std::unordered_map<const QueryNode*, int>& slots, int& next_slot) {
  slots[&node] = slot;
  switch (node.kind) {
    case NodeKind::Anchor:
      return;
    case NodeKind::Project:
    case NodeKind::NegProject: {
      const QueryNode& child = node.children[0];
      int child_slot = child.kind == NodeKind::Anchor ? -1 : next_slot++;
      assign_slots(child, child_slot, slots, next_slot);
      return;
    }
    case NodeKind::Complement:
      assign_slots(node.children[0], slot, slots, next_slot);
      return;
    case NodeKind::Intersect:
    case NodeKind::Union:
      for (const QueryNode& c : node.children) assign_slots(c, slot, slots, next_slot);
      return;
  }
}

double oracle_value(const QueryNode& node, const std::unordered_map<const QueryNode*, int>& slots,
                    const std::vector<EntityId>& assignment, EntityId target,
                    const MatrixMap& matrices) {
  auto slot_value = [&](const QueryNode& n) -> EntityId {
    int slot = slots.at(&n);
    if (slot == 0) return target;
    if (slot < 0) return n.kind == NodeKind::Anchor ? n.entity : -1;
    return assignment[static_cast<std::size_t>(slot - 1)];
  };

  switch (node.kind) {
    case NodeKind::Anchor: {
      int slot = slots.at(&node);
      if (slot < 0) return 1.0;  // the projection below reads the constant directly
      return slot_value(node) == node.entity ? 1.0 : 0.0;
    }
    case NodeKind::Project:
    case NodeKind::NegProject: {
      const QueryNode& child = node.children[0];
      double t = oracle_value(child, slots, assignment, target, matrices);
      auto it = matrices.find(node.relation);
      if (it == matrices.end())
        throw std::runtime_error("brute_force_fuzzy: no matrix for relation id " +
                                 std::to_string(node.relation));
      double edge = it->second.entry(slot_value(child), slot_value(node));
      return node.kind == NodeKind::Project ? tnorm::conj(t, edge)
                                            : tnorm::conj(t, tnorm::negate(edge));
    }
    case NodeKind::Complement:
      return tnorm::negate(oracle_value(node.children[0], slots, assignment, target, matrices));
    case NodeKind::Intersect: {
      double v = 1.0;
      for (const QueryNode& c : node.children)
        v = tnorm::conj(v, oracle_value(c, slots, assignment, target, matrices));
      return v;
    }
    case NodeKind::Union: {
      double v = 0.0;
      for (const QueryNode& c : node.children)
        v = tnorm::disj(v, oracle_value(c, slots, assignment, target, matrices));
      return v;
    }
  }
  return 0.0;
}

}  // namespace

double brute_force_fuzzy(const QueryNode& tree, std::size_t n, const MatrixMap& matrices,
                         EntityId target) {
  if (n > 12)
    throw std::invalid_argument("brute_force_fuzzy: guarded to at most 12 entities, got " +
                                std::to_string(n));
  std::unordered_map<const QueryNode*, int> slots;
  int next_slot = 1;
  assign_slots(tree, 0, slots, next_slot);
  int vars = next_slot - 1;
  if (vars > 3)
    throw std::invalid_argument("brute_force_fuzzy: guarded to at most 3 existential variables, got " +
                                std::to_string(vars));

  std::vector<EntityId> assignment(static_cast<std::size_t>(vars), 0);
  double best = 0.0;
  std::size_t total = 1;
  for (int v = 0; v < vars; ++v) total *= n;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (int v = 0; v < vars; ++v) {
      assignment[static_cast<std::size_t>(v)] = static_cast<EntityId>(rest % n);
      rest /= n;
    }
    best = std::max(best, oracle_value(tree, slots, assignment, target, matrices));
  }
  return best;
}

namespace {

std::string format_rate(int hits, int total) {
  char buf[16];
  double rate = total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
  std::snprintf(buf, sizeof(buf), "%.3f", rate);
  return buf;
}

EvalMode parse_mode(const std::string& s) {
  if (s == "kg_only") return EvalMode::KgOnly;
  if (s == "llm_only") return EvalMode::LlmOnly;
  if (s == "combined") return EvalMode::Combined;
  throw std::invalid_argument("unknown mode '" + s + "' (kg_only | llm_only | combined)");
}

const char* mode_name(EvalMode m) {
  switch (m) {
    case EvalMode::KgOnly: return "kg_only";
    case EvalMode::LlmOnly: return "llm_only";
    case EvalMode::Combined: return "combined";
  }
  return "?";
}

MatrixKind parse_matrices(const std::string& s) {
  if (s == "trained") return MatrixKind::Trained;
  if (s == "boolean") return MatrixKind::Boolean;
  throw std::invalid_argument("unknown matrices kind '" + s + "' (trained | boolean)");
}

}  // namespace

ExperimentSpec spec_from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentSpec spec;
  auto geti = [](const std::string& v) { return std::stoi(v); };
  auto getd = [](const std::string& v) { return std::stod(v); };
  auto getu = [](const std::string& v) { return static_cast<std::uint64_t>(std::stoull(v)); };

  for (const auto& [key, value] : kv) {
    if (key == "triples_path") spec.triples_path = value;
    else if (key == "shapes") {
      spec.shapes.clear();
      for (const std::string& s : split(value, ','))
        if (!trim(s).empty()) spec.shapes.push_back(parse_shape(trim(s)));
      if (spec.shapes.empty()) throw std::invalid_argument("spec: empty shapes list");
    } else if (key == "per_shape_count") spec.per_shape_count = geti(value);
    else if (key == "keep_fraction") spec.keep_fraction = getd(value);
    else if (key == "mode") spec.mode = parse_mode(value);
    else if (key == "provider") spec.provider = value;
    else if (key == "matrices") spec.matrices = parse_matrices(value);
    else if (key == "theta") spec.theta = getd(value);
    else if (key == "alpha") spec.alpha = getd(value);
    else if (key == "delta") spec.delta = getd(value);
    else if (key == "top_k") spec.top_k = geti(value);
    else if (key == "floor") spec.floor = getd(value);
    else if (key == "dim") spec.dim = geti(value);
    else if (key == "epochs") spec.epochs = geti(value);
    else if (key == "learning_rate") spec.learning_rate = getd(value);
    else if (key == "l2") spec.l2 = getd(value);
    else if (key == "batch_size") spec.batch_size = geti(value);
    else if (key == "frontier_cap") spec.frontier_cap = geti(value);
    else if (key == "frontier_tau") spec.frontier_tau = getd(value);
    else if (key == "samples") spec.samples = geti(value);
    else if (key == "evaluate_at") spec.evaluate_at = value;
    else if (key == "seed_split") spec.seed_split = getu(value);
    else if (key == "seed_queries") spec.seed_queries = getu(value);
    else if (key == "seed_train") spec.seed_train = getu(value);
    else if (key == "threads") spec.threads = geti(value);
    else if (key == "cache_dir") spec.cache_dir = value;
    else throw std::invalid_argument("spec: unknown key '" + key + "'");
  }
  if (spec.evaluate_at != "off" && spec.evaluate_at != "final" && spec.evaluate_at != "all")
    throw std::invalid_argument("spec: evaluate_at must be off | final | all");
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_experiment_spec: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    std::size_t eq = stripped.find('=');
    std::string key, value;
    if (eq != std::string_view::npos) {
      key = std::string(trim(stripped.substr(0, eq)));
      value = std::string(trim(stripped.substr(eq + 1)));
    } else {
      std::size_t sp = stripped.find_first_of(" \t");
      if (sp == std::string_view::npos)
        throw std::runtime_error("load_experiment_spec: " + path + ":" + std::to_string(line_no) +
                                 ": expected 'key = value'");
      key = std::string(trim(stripped.substr(0, sp)));
      value = std::string(trim(stripped.substr(sp + 1)));
    }
    if (key.empty() || value.empty())
      throw std::runtime_error("load_experiment_spec: " + path + ":" + std::to_string(line_no) +
                               ": empty key or value");
    kv[key] = value;
  }
  try {
    return spec_from_kv(kv);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("load_experiment_spec: " + path + ": " + e.what());
  }
}

namespace {

// Up to 3 illustrating (head, tail) name pairs per relation, triple order.
std::vector<std::pair<std::string, std::string>> sample_pairs(const KnowledgeGraph& kg,
                                                              RelationId r) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const Triple& t : kg.triples()) {
    if (t.relation != r) continue;
    pairs.emplace_back(kg.vocab().entity_name(t.head), kg.vocab().entity_name(t.tail));
    if (pairs.size() == 3) break;
  }
  return pairs;
}

}  // namespace

EvalReport run_experiment(const ExperimentSpec& spec) {
  auto started = std::chrono::steady_clock::now();
  if (spec.per_shape_count <= 0)
    throw std::invalid_argument("run_experiment: per_shape_count must be positive");
  if (spec.triples_path.empty())
    throw std::invalid_argument("run_experiment: triples_path is required");

  KnowledgeGraph full = load_triples(spec.triples_path);
  SplitResult split = split_edges(full, spec.keep_fraction, spec.seed_split);
  const KnowledgeGraph& train_kg = split.train;
  std::size_t n = full.num_entities();

  // Matrices come from the train split only; gold answers never leak in.
  MatrixMap matrices;
  if (spec.mode != EvalMode::LlmOnly) {
    if (spec.matrices == MatrixKind::Boolean) {
      for (std::size_t r = 0; r < train_kg.num_relations(); ++r)
        matrices.emplace(static_cast<RelationId>(r),
                         boolean_matrix(train_kg, static_cast<RelationId>(r)));
    } else {
      TrainConfig tc;
      tc.dim = spec.dim;
      tc.epochs = spec.epochs;
      tc.learning_rate = spec.learning_rate;
      tc.l2 = spec.l2;
      tc.batch_size = spec.batch_size;
      tc.seed = spec.seed_train;
      TrainResult trained = train(init_model(train_kg.vocab(), tc), train_kg, tc);
      AdjacencyConfig ac{spec.delta, spec.top_k, spec.floor};
      std::vector<SparseRelationMatrix> built(train_kg.num_relations());
      parallel_for(train_kg.num_relations(), spec.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r)
          built[r] = build_matrix(trained.model, train_kg, static_cast<RelationId>(r), ac);
      });
      for (std::size_t r = 0; r < built.size(); ++r)
        matrices.emplace(static_cast<RelationId>(r), std::move(built[r]));
    }
  }

  struct Task {
    QueryShape shape;
    SampledQuery sampled;
  };
  std::vector<Task> tasks;
  for (QueryShape shape : spec.shapes) {
    for (int q = 0; q < spec.per_shape_count; ++q) {
      std::uint64_t seed = mix_seed(mix_seed(spec.seed_queries, static_cast<std::uint64_t>(shape)),
                                    static_cast<std::uint64_t>(q));
      tasks.push_back({shape, sample_query(full, shape, seed)});
    }
  }

  ProviderHandle bundle;
  std::unordered_map<RelationId, QuestionTemplate> templates;
  std::unique_ptr<LlmHook> hook;
  if (spec.mode != EvalMode::KgOnly) {
    if (spec.provider == "none" || spec.provider.empty())
      throw std::runtime_error(std::string("run_experiment: mode ") + mode_name(spec.mode) +
                               " needs a provider (mock:<fixture-path> | garbage | http)");
    bundle = make_provider(spec.provider, spec.cache_dir);
    if (spec.mode == EvalMode::Combined) {
      std::vector<std::string> template_texts;
      for (std::size_t r = 0; r < full.num_relations(); ++r) {
        RelationId rel = static_cast<RelationId>(r);
        QuestionTemplate t =
            atom_to_question(rel, sample_pairs(train_kg, rel), bundle.provider.get(), full.vocab());
        template_texts.push_back(t.text);
        templates.emplace(rel, std::move(t));
      }
      if (bundle.mock != nullptr) bundle.mock->set_question_templates(template_texts);
      FusionConfig fc;
      fc.theta = spec.theta;
      fc.alpha = spec.alpha;
      fc.frontier_cap = spec.frontier_cap;
      fc.frontier_tau = spec.frontier_tau;
      fc.samples = spec.samples;
      fc.evaluate_at = spec.evaluate_at == "all"
                           ? EvaluateAt::All
                           : (spec.evaluate_at == "final" ? EvaluateAt::Final : EvaluateAt::Off);
      hook = std::make_unique<LlmHook>(bundle.provider.get(), templates, fc, full.vocab());
    }
  }

  std::vector<QueryDetail> details(tasks.size());
  NodeHook node_hook = hook ? hook->as_node_hook() : NodeHook{};
  parallel_for(tasks.size(), spec.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Task& task = tasks[i];
      QueryDetail& detail = details[i];
      detail.shape = task.shape;
      detail.query = render_query(task.sampled.tree, full.vocab());
      detail.gold = task.sampled.gold;

      if (spec.mode == EvalMode::LlmOnly) {
        std::string prompt = wrap_projection_question(detail.query);
        NameResolver resolver(full.vocab());
        std::vector<EntityId> ranked;
        try {
          ranked = parse_answer_payload(bundle.provider->ask(prompt), resolver, full.vocab()).ids;
        } catch (const std::exception&) {
          ranked.clear();  // failed whole-query call scores zero hits
        }
        if (ranked.size() > 10) ranked.resize(10);
        detail.ranked = std::move(ranked);
      } else {
        FuzzyVector result = execute(task.sampled.tree, n, matrices,
                                     node_hook ? &node_hook : nullptr);
        detail.ranked.clear();
        for (const ScoredEntity& e : top_k_ids(result, 10)) detail.ranked.push_back(e.id);
      }
    }
  });

  EvalReport report;
  report.spec = spec;
  std::map<QueryShape, ShapeMetrics> by_shape;
  for (const QueryDetail& d : details) {
    ShapeMetrics& m = by_shape[d.shape];
    ++m.queries;
    m.hits1 += hit_at_k(d.ranked, d.gold, 1);
    m.hits3 += hit_at_k(d.ranked, d.gold, 3);
    m.hits10 += hit_at_k(d.ranked, d.gold, 10);
  }
  for (QueryShape shape : spec.shapes) {
    ShapeMetrics m = by_shape[shape];
    report.per_shape.emplace_back(shape, m);
    report.overall.queries += m.queries;
    report.overall.hits1 += m.hits1;
    report.overall.hits3 += m.hits3;
    report.overall.hits10 += m.hits10;
  }
  report.details = std::move(details);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::string EvalReport::table() const {
  std::ostringstream out;
  out << "experiment: mode=" << mode_name(spec.mode) << " provider=" << spec.provider
      << " matrices=" << (spec.matrices == MatrixKind::Boolean ? "boolean" : "trained")
      << " keep_fraction=" << spec.keep_fraction << '\n';
  out << "params: theta=" << spec.theta << " alpha=" << spec.alpha << " delta=" << spec.delta
      << " top_k=" << spec.top_k << " floor=" << spec.floor << " dim=" << spec.dim
      << " epochs=" << spec.epochs << " learning_rate=" << spec.learning_rate
      << " l2=" << spec.l2 << " batch_size=" << spec.batch_size << '\n';
  out << "fusion: frontier_cap=" << spec.frontier_cap << " frontier_tau=" << spec.frontier_tau
      << " samples=" << spec.samples << " evaluate_at=" << spec.evaluate_at << '\n';
  out << "seeds: split=" << spec.seed_split << " queries=" << spec.seed_queries
      << " train=" << spec.seed_train << '\n';
  out << "shape   queries  hit@1  hit@3  hit@10\n";
  auto row = [&](const std::string& name, const ShapeMetrics& m) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-7s %7d  %s  %s  %s\n", name.c_str(), m.queries,
                  format_rate(m.hits1, m.queries).c_str(), format_rate(m.hits3, m.queries).c_str(),
                  format_rate(m.hits10, m.queries).c_str());
    out << buf;
  };
  for (const auto& [shape, m] : per_shape) row(shape_name(shape), m);
  row("all", overall);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "wall_seconds %.2f\n", wall_seconds);
  out << buf;
  return out.str();
}

std::string EvalReport::csv() const {
  std::ostringstream out;
  out << "shape,k,hits,total,rate\n";
  auto rows = [&](const std::string& name, const ShapeMetrics& m) {
    for (auto [k, hits] : {std::pair<int, int>{1, m.hits1}, {3, m.hits3}, {10, m.hits10}})
      out << name << ',' << k << ',' << hits << ',' << m.queries << ','
          << format_rate(hits, m.queries) << '\n';
  };
  for (const auto& [shape, m] : per_shape) rows(shape_name(shape), m);
  rows("all", overall);
  return out.str();
}

}  // namespace lqot
