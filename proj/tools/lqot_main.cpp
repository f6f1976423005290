// lqot: split | train | build-adj | gen-queries | query | eval
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure. Every run prints
// its effective core knobs (theta, alpha, delta, dim, epochs, top_k) to
// standard error so no result file is ever missing its configuration.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lqot/adjacency.hpp"
#include "lqot/complex_model.hpp"
#include "lqot/eval.hpp"
#include "lqot/fuzzy.hpp"
#include "lqot/kg.hpp"
#include "lqot/llm.hpp"
#include "lqot/query.hpp"
#include "lqot/util.hpp"

namespace fs = std::filesystem;
using namespace lqot;

namespace {

void print_header(const std::string& cmd, double theta, double alpha, double delta, int dim,
                  int epochs, int top_k) {
  std::fprintf(stderr, "lqot %s | theta=%g alpha=%g delta=%g dim=%d epochs=%d top_k=%d\n",
               cmd.c_str(), theta, alpha, delta, dim, epochs, top_k);
}

std::vector<QueryShape> parse_shapes(const std::string& csv) {
  std::vector<QueryShape> shapes;
  for (const std::string& s : split(csv, ','))
    if (!trim(s).empty()) shapes.push_back(parse_shape(trim(s)));
  if (shapes.empty()) throw CLI::ValidationError("--shapes", "empty shape list");
  return shapes;
}

MatrixMap load_adjacency_dir(const std::string& dir, const Vocab& vocab) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".adj")
      files.push_back(entry.path());
  if (files.empty()) throw std::runtime_error("no .adj files in " + dir);
  std::sort(files.begin(), files.end());
  MatrixMap matrices;
  for (const fs::path& p : files) {
    SparseRelationMatrix m = load_matrix(p.string(), vocab);
    RelationId r = m.relation();
    if (!matrices.emplace(r, std::move(m)).second)
      throw std::runtime_error("duplicate matrix for relation '" + vocab.relation_name(r) +
                               "' in " + dir);
  }
  return matrices;
}

struct SplitArgs {
  std::string kg, out, removed;
  double keep = 0.5;
  std::uint64_t seed = 1;
};

struct TrainArgs {
  std::string kg, out;
  TrainConfig cfg;
};

struct BuildAdjArgs {
  std::string kg, model, out;
  AdjacencyConfig cfg;
  bool text = false;
  bool boolean_only = false;
  int threads = 0;
};

struct GenQueriesArgs {
  std::string kg, out, shapes = "1p,2p,3p,2i,2u,pin";
  int count = 50;
  std::uint64_t seed = 2;
};

struct QueryArgs {
  std::string kg, adj, q, provider = "none", cache_dir, evaluate_at = "off";
  int top = 10;
  FusionConfig fusion;
  bool trace = false;
};

struct EvalArgs {
  std::string config, csv_path, details_path;
};

int run_split(const SplitArgs& a) {
  print_header("split", 0.5, 0.9, 0.0001, 64, 200, 50);
  KnowledgeGraph kg = load_triples(a.kg);
  SplitResult split = split_edges(kg, a.keep, a.seed);
  save_triples(split.train.triples(), kg.vocab(), a.out);
  if (!a.removed.empty()) save_triples(split.removed, kg.vocab(), a.removed);
  std::fprintf(stderr, "kept %zu of %zu triples (removed %zu)\n", split.train.triples().size(),
               kg.triples().size(), split.removed.size());
  return 0;
}

int run_train(const TrainArgs& a) {
  print_header("train", 0.5, 0.9, 0.0001, a.cfg.dim, a.cfg.epochs, 50);
  KnowledgeGraph kg = load_triples(a.kg);
  TrainResult result = train(init_model(kg.vocab(), a.cfg), kg, a.cfg);
  save_model(result.model, a.out);
  if (!result.loss_history.empty())
    std::fprintf(stderr, "final epoch loss %.6f\n", result.loss_history.back());
  return 0;
}

int run_build_adj(const BuildAdjArgs& a) {
  print_header("build-adj", 0.5, 0.9, a.cfg.delta, 64, 200, a.cfg.top_k);
  KnowledgeGraph kg = load_triples(a.kg);
  fs::create_directories(a.out);
  std::vector<SparseRelationMatrix> built(kg.num_relations());
  if (a.boolean_only) {
    for (std::size_t r = 0; r < kg.num_relations(); ++r)
      built[r] = boolean_matrix(kg, static_cast<RelationId>(r));
  } else {
    if (a.model.empty()) throw std::runtime_error("build-adj needs --model unless --boolean");
    ComplExModel model = load_model(a.model);
    parallel_for(kg.num_relations(), a.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r)
        built[r] = build_matrix(model, kg, static_cast<RelationId>(r), a.cfg);
    });
  }
  for (std::size_t r = 0; r < built.size(); ++r) {
    std::string name = kg.vocab().relation_name(static_cast<RelationId>(r));
    std::string path = (fs::path(a.out) / ("r" + std::to_string(r) + ".adj")).string();
    if (a.text)
      save_matrix_text(built[r], name, path);
    else
      save_matrix_binary(built[r], name, path);
  }
  std::fprintf(stderr, "wrote %zu matrices to %s\n", built.size(), a.out.c_str());
  return 0;
}

int run_gen_queries(const GenQueriesArgs& a) {
  print_header("gen-queries", 0.5, 0.9, 0.0001, 64, 200, 50);
  KnowledgeGraph kg = load_triples(a.kg);
  std::vector<WorkloadRecord> records;
  for (QueryShape shape : parse_shapes(a.shapes)) {
    for (int q = 0; q < a.count; ++q) {
      std::uint64_t seed =
          mix_seed(mix_seed(a.seed, static_cast<std::uint64_t>(shape)), static_cast<std::uint64_t>(q));
      SampledQuery sampled = sample_query(kg, shape, seed);
      WorkloadRecord rec;
      rec.query = render_query(sampled.tree, kg.vocab());
      for (EntityId e : sampled.gold) rec.gold_names.push_back(kg.vocab().entity_name(e));
      records.push_back(std::move(rec));
    }
  }
  save_workload(records, a.out);
  std::fprintf(stderr, "wrote %zu queries to %s\n", records.size(), a.out.c_str());
  return 0;
}

int run_query(const QueryArgs& a) {
  print_header("query", a.fusion.theta, a.fusion.alpha, 0.0001, 64, 200, a.top);
  KnowledgeGraph kg = load_triples(a.kg);
  QueryNode tree = parse_query(a.q, kg.vocab());
  MatrixMap matrices = load_adjacency_dir(a.adj, kg.vocab());

  ProviderHandle handle;
  std::unique_ptr<LlmHook> hook;
  if (a.provider != "none") {
    handle = make_provider(a.provider, a.cache_dir);
    std::unordered_map<RelationId, QuestionTemplate> templates;
    std::vector<std::string> texts;
    for (std::size_t r = 0; r < kg.num_relations(); ++r) {
      QuestionTemplate t = fallback_question(static_cast<RelationId>(r), kg.vocab());
      texts.push_back(t.text);
      templates.emplace(static_cast<RelationId>(r), std::move(t));
    }
    if (handle.mock != nullptr) handle.mock->set_question_templates(texts);
    FusionConfig fc = a.fusion;
    fc.evaluate_at = a.evaluate_at == "all" ? EvaluateAt::All
                                            : (a.evaluate_at == "final" ? EvaluateAt::Final
                                                                        : EvaluateAt::Off);
    hook = std::make_unique<LlmHook>(handle.provider.get(), std::move(templates), fc, kg.vocab());
  }

  NodeHook node_hook = hook ? hook->as_node_hook() : NodeHook{};
  ExecutionTrace trace;
  FuzzyVector result = execute(tree, kg.num_entities(), matrices,
                               hook ? &node_hook : nullptr, a.trace ? &trace : nullptr);
  if (a.trace) std::fputs(format_trace(trace, kg.vocab()).c_str(), stderr);
  for (const auto& [name, score] : top_k(result, static_cast<std::size_t>(a.top), kg.vocab()))
    std::printf("%s\t%.6f\n", name.c_str(), score);
  return 0;
}

int run_eval(const EvalArgs& a) {
  ExperimentSpec spec = load_experiment_spec(a.config);
  print_header("eval", spec.theta, spec.alpha, spec.delta, spec.dim, spec.epochs, spec.top_k);
  EvalReport report = run_experiment(spec);
  std::fputs(report.table().c_str(), stdout);
  if (a.csv_path.empty()) {
    std::fputs(report.csv().c_str(), stdout);
  } else {
    std::ofstream out(a.csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + a.csv_path);
    out << report.csv();
  }
  if (!a.details_path.empty()) {
    std::ofstream out(a.details_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + a.details_path);
    for (const QueryDetail& d : report.details) {
      out << shape_name(d.shape) << '\t' << d.query << '\t';
      for (std::size_t i = 0; i < d.ranked.size(); ++i)
        out << (i ? "," : "") << d.ranked[i];
      out << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logical query answering over knowledge graphs"};
  app.require_subcommand(1);

  SplitArgs sa;
  CLI::App* cmd_split = app.add_subcommand("split", "Partition a triple file into train/removed");
  cmd_split->add_option("--kg", sa.kg, "Triple TSV file")->required();
  cmd_split->add_option("--keep", sa.keep, "Fraction of triples to keep, in (0,1]")
      ->capture_default_str();
  cmd_split->add_option("--seed", sa.seed, "Split seed")->capture_default_str();
  cmd_split->add_option("--out", sa.out, "Output path for the kept triples")->required();
  cmd_split->add_option("--removed", sa.removed, "Output path for the removed triples");

  TrainArgs ta;
  CLI::App* cmd_train = app.add_subcommand("train", "Train embeddings on a triple file");
  cmd_train->add_option("--kg", ta.kg, "Triple TSV file")->required();
  cmd_train->add_option("--dim", ta.cfg.dim, "Embedding dimension")->capture_default_str();
  cmd_train->add_option("--epochs", ta.cfg.epochs, "Training epochs")->capture_default_str();
  cmd_train->add_option("--lr", ta.cfg.learning_rate, "Learning rate")->capture_default_str();
  cmd_train->add_option("--l2", ta.cfg.l2, "L2 coefficient")->capture_default_str();
  cmd_train->add_option("--batch", ta.cfg.batch_size, "Mini-batch size")->capture_default_str();
  cmd_train->add_option("--seed", ta.cfg.seed, "Init/shuffle seed")->capture_default_str();
  cmd_train->add_option("--out", ta.out, "Model checkpoint path")->required();

  BuildAdjArgs ba;
  CLI::App* cmd_adj = app.add_subcommand("build-adj", "Calibrate per-relation adjacency matrices");
  cmd_adj->add_option("--kg", ba.kg, "Triple TSV file (the train split)")->required();
  cmd_adj->add_option("--model", ba.model, "Model checkpoint from `train`");
  cmd_adj->add_option("--out", ba.out, "Output directory (one r<id>.adj per relation)")->required();
  cmd_adj->add_option("--delta", ba.cfg.delta, "Ceiling margin for unobserved edges")
      ->capture_default_str();
  cmd_adj->add_option("--top-k", ba.cfg.top_k, "Kept unobserved entries per row")
      ->capture_default_str();
  cmd_adj->add_option("--floor", ba.cfg.floor, "Minimum kept value")->capture_default_str();
  cmd_adj->add_flag("--text", ba.text, "Write the text format instead of binary");
  cmd_adj->add_flag("--boolean", ba.boolean_only, "Observed edges only, no model needed");
  cmd_adj->add_option("--threads", ba.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  GenQueriesArgs ga;
  CLI::App* cmd_gen = app.add_subcommand("gen-queries", "Sample a query workload from a graph");
  cmd_gen->add_option("--kg", ga.kg, "Triple TSV file (the full graph)")->required();
  cmd_gen->add_option("--shapes", ga.shapes, "Comma-separated shapes")->capture_default_str();
  cmd_gen->add_option("--count", ga.count, "Queries per shape")->capture_default_str();
  cmd_gen->add_option("--seed", ga.seed, "Sampling seed")->capture_default_str();
  cmd_gen->add_option("--out", ga.out, "Workload TSV path")->required();

  QueryArgs qa;
  CLI::App* cmd_query = app.add_subcommand("query", "Answer one query against built matrices");
  cmd_query->add_option("--kg", qa.kg, "Triple TSV file")->required();
  cmd_query->add_option("--adj", qa.adj, "Directory of .adj matrices")->required();
  cmd_query->add_option("--q", qa.q, "Query, e.g. '(p r1 \"a\")'")->required();
  cmd_query->add_option("--top", qa.top, "Answers to print")->capture_default_str();
  cmd_query->add_option("--provider", qa.provider,
                        "none | mock:<fixture-path> | garbage | http")
      ->capture_default_str();
  cmd_query->add_option("--cache-dir", qa.cache_dir, "Provider response cache directory");
  cmd_query->add_option("--theta", qa.fusion.theta, "Likelihood-ratio cutoff")
      ->capture_default_str();
  cmd_query->add_option("--alpha", qa.fusion.alpha, "Provider fusion weight")
      ->capture_default_str();
  cmd_query->add_option("--tau", qa.fusion.frontier_tau, "Frontier membership bar")
      ->capture_default_str();
  cmd_query->add_option("--cap", qa.fusion.frontier_cap, "Frontier size cap")
      ->capture_default_str();
  cmd_query->add_option("--samples", qa.fusion.samples, "Provider draws per question")
      ->capture_default_str();
  cmd_query->add_option("--evaluate", qa.evaluate_at, "Answer re-ranking: off | final | all")
      ->capture_default_str()
      ->check(CLI::IsMember({"off", "final", "all"}));
  cmd_query->add_flag("--trace", qa.trace, "Per-node top-10 trace to standard error");

  EvalArgs ea;
  CLI::App* cmd_eval = app.add_subcommand("eval", "Run an experiment from a config file");
  cmd_eval->add_option("--config", ea.config, "Flat key = value config file")->required();
  cmd_eval->add_option("--csv", ea.csv_path, "Write CSV here instead of standard output");
  cmd_eval->add_option("--details", ea.details_path, "Per-query detail TSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message to stderr
    return 1;
  }

  try {
    if (cmd_split->parsed()) return run_split(sa);
    if (cmd_train->parsed()) return run_train(ta);
    if (cmd_adj->parsed()) return run_build_adj(ba);
    if (cmd_gen->parsed()) return run_gen_queries(ga);
    if (cmd_query->parsed()) return run_query(qa);
    if (cmd_eval->parsed()) return run_eval(ea);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
