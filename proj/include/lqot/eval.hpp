#pragma once

// End-to-end experiment runner and metrics.
//
// Pipeline of run_experiment():
//   load triples -> split edges -> (train embeddings -> calibrate matrices,
//   or take the boolean adjacency) -> sample queries per shape on the FULL
//   graph (gold answers come from the full graph; the engine only sees the
//   train split) -> answer each query in the requested mode -> Hit@{1,3,10}.
//
// Modes:
//   kg_only   fuzzy engine alone; no provider is ever constructed
//   llm_only  one prompt per whole query (wrapping its rendered text);
//             ranking is the parsed payload order
//   combined  fuzzy engine with the provider hook at projection nodes
//
// A query scores Hit@k = 1 when any of its top-k ranked entities is gold.
// Reported rates are exact fractions printed to 3 decimals. Reports are
// byte-identical across runs and platforms for a fixed spec and a
// deterministic provider; wall_seconds is the only field allowed to differ.
//
// Config files are flat "key = value" lines ('#' comments). Keys:
//   triples_path shapes per_shape_count keep_fraction mode provider
//   matrices theta alpha delta top_k floor dim epochs learning_rate l2
//   batch_size frontier_cap frontier_tau samples evaluate_at seed_split
//   seed_queries seed_train threads cache_dir
// `shapes` is comma-separated ("1p,2p,3p,2i,2u,pin"); `provider` is one of
// none | mock:<fixture-path> | garbage | http; `matrices` is trained |
// boolean; `evaluate_at` is off | final | all.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lqot/fuzzy.hpp"
#include "lqot/kg.hpp"
#include "lqot/query.hpp"

namespace lqot {

// 1 when any of ranked[0 .. k) is in gold (sorted), else 0. `ranked` must
// not contain duplicates.
int hit_at_k(std::span<const EntityId> ranked, const std::vector<EntityId>& gold, int k);

// Literal enumeration oracle for execute(): every existential variable
// (one per projection with a non-anchor child) ranges over all entities,
// and the best assignment's product is the score of `target`. Kept free of
// the engine's lazy evaluation tricks on purpose. Guarded to at most 3
// existential variables and 12 entities.
double brute_force_fuzzy(const QueryNode& tree, std::size_t n, const MatrixMap& matrices,
                         EntityId target);

enum class EvalMode { KgOnly, LlmOnly, Combined };
enum class MatrixKind { Trained, Boolean };

struct ExperimentSpec {
  std::string triples_path;
  std::vector<QueryShape> shapes{std::begin(kAllShapes), std::end(kAllShapes)};
  int per_shape_count = 50;
  double keep_fraction = 1.0;
  EvalMode mode = EvalMode::KgOnly;
  std::string provider = "none";  // none | mock:<path> | garbage | http
  MatrixKind matrices = MatrixKind::Trained;

  // calibration
  double theta = 0.5;
  double alpha = 0.9;
  double delta = 0.0001;
  int top_k = 50;
  double floor = 1e-4;

  // embedding training
  int dim = 64;
  int epochs = 200;
  double learning_rate = 0.05;
  double l2 = 1e-5;
  int batch_size = 512;

  // provider fusion
  int frontier_cap = 10;
  double frontier_tau = 0.5;
  int samples = 3;
  std::string evaluate_at = "off";  // off | final | all

  std::uint64_t seed_split = 1;
  std::uint64_t seed_queries = 2;
  std::uint64_t seed_train = 3;

  int threads = 0;           // 0 = hardware concurrency
  std::string cache_dir;     // empty = no response cache
};

ExperimentSpec load_experiment_spec(const std::string& path);
ExperimentSpec spec_from_kv(const std::map<std::string, std::string>& kv);

struct ShapeMetrics {
  int queries = 0;
  int hits1 = 0, hits3 = 0, hits10 = 0;
  friend bool operator==(const ShapeMetrics&, const ShapeMetrics&) = default;
};

struct QueryDetail {
  QueryShape shape;
  std::string query;             // rendered tree
  std::vector<EntityId> ranked;  // top 10
  std::vector<EntityId> gold;
  friend bool operator==(const QueryDetail&, const QueryDetail&) = default;
};

struct EvalReport {
  std::vector<std::pair<QueryShape, ShapeMetrics>> per_shape;
  ShapeMetrics overall;
  std::vector<QueryDetail> details;  // per query, sampling order
  ExperimentSpec spec;
  double wall_seconds = 0.0;

  // Human table with the config echo; CSV rows "shape,k,hits,total,rate".
  std::string table() const;
  std::string csv() const;
};

EvalReport run_experiment(const ExperimentSpec& spec);

}  // namespace lqot
