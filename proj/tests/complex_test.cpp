#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lqot/complex_model.hpp"
#include "lqot/kg.hpp"
#include "lqot/util.hpp"

using namespace lqot;
namespace fs = std::filesystem;

namespace {

Vocab small_vocab(int entities, int relations) {
  Vocab v;
  for (int i = 0; i < entities; ++i) v.add_entity("e" + std::to_string(i));
  for (int i = 0; i < relations; ++i) v.add_relation("r" + std::to_string(i));
  return v;
}

KnowledgeGraph chain_graph(int entities, int relations) {
  Vocab v = small_vocab(entities, relations);
  std::vector<Triple> triples;
  for (int r = 0; r < relations; ++r)
    for (int i = 0; i + 1 < entities; ++i)
      triples.push_back({static_cast<EntityId>(i), static_cast<RelationId>(r),
                         static_cast<EntityId>(i + 1)});
  return KnowledgeGraph(v, triples);
}

}  // namespace

TEST_CASE("init_model shapes, bounds and determinism") {
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.seed = 5;
  Vocab v = small_vocab(4, 3);
  ComplExModel m = init_model(v, cfg);
  CHECK(m.num_entities == 4);
  CHECK(m.num_relations == 3);
  CHECK(m.dim == 8);
  CHECK(m.ent_re.size() == 32);
  CHECK(m.ent_im.size() == 32);
  CHECK(m.rel_re.size() == 48);  // reciprocal block doubles the rows
  CHECK(m.rel_im.size() == 48);
  double bound = 0.5 / std::sqrt(8.0);
  for (double x : m.ent_re) {
    CHECK(x >= -bound);
    CHECK(x < bound);
  }
  ComplExModel m2 = init_model(v, cfg);
  CHECK(m2.ent_re == m.ent_re);
  CHECK(m2.rel_im == m.rel_im);
  cfg.seed = 6;
  ComplExModel m3 = init_model(v, cfg);
  CHECK(m3.ent_re != m.ent_re);
}

TEST_CASE("score of a hand-built dim-1 model") {
  // h = i, w = 1, t = i: h * w * conj(t) = i * (-i) = 1, so Re = 1.
  ComplExModel m;
  m.num_entities = 2;
  m.num_relations = 1;
  m.dim = 1;
  m.ent_re = {0.0, 0.0};
  m.ent_im = {1.0, 1.0};
  m.rel_re = {1.0, 0.0};
  m.rel_im = {0.0, 0.0};
  CHECK(score(m, 0, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  // h = 1, w = i, t = 1: Re(i) = 0.
  m.ent_re = {1.0, 1.0};
  m.ent_im = {0.0, 0.0};
  m.rel_re = {0.0, 0.0};
  m.rel_im = {1.0, 0.0};
  CHECK(score(m, 0, 0, 1) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("score_all_tails matches score element by element") {
  TrainConfig cfg;
  cfg.dim = 6;
  cfg.seed = 11;
  Vocab v = small_vocab(7, 2);
  ComplExModel m = init_model(v, cfg);
  for (RelationId r = 0; r < 4; ++r) {  // includes the reciprocal block
    std::vector<double> all = score_all_tails(m, 3, r);
    REQUIRE(all.size() == 7);
    for (EntityId t = 0; t < 7; ++t) CHECK(all[t] == score(m, 3, r, t));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  TrainConfig cfg;
  cfg.dim = 2;
  cfg.seed = 3;
  Vocab v = small_vocab(3, 2);
  ComplExModel m = init_model(v, cfg);
  std::vector<Triple> batch = {{0, 0, 1}, {1, 1, 2}, {2, 0, 0}};
  const double l2 = 1e-3;

  Gradients g;
  batch_loss_and_grad(m, batch, l2, &g);

  const double h = 1e-5;
  auto check_block = [&](std::vector<double>& params, const std::vector<double>& grad) {
    REQUIRE(grad.size() == params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      double saved = params[i];
      params[i] = saved + h;
      double up = batch_loss_and_grad(m, batch, l2, nullptr);
      params[i] = saved - h;
      double down = batch_loss_and_grad(m, batch, l2, nullptr);
      params[i] = saved;
      double fd = (up - down) / (2 * h);
      double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
      CHECK(std::abs(fd - grad[i]) / scale <= 1e-4);
    }
  };
  check_block(m.ent_re, g.ent_re);
  check_block(m.ent_im, g.ent_im);
  check_block(m.rel_re, g.rel_re);
  check_block(m.rel_im, g.rel_im);
}

TEST_CASE("l2 penalty contributes exactly l2 * sum of squares") {
  TrainConfig cfg;
  cfg.dim = 3;
  cfg.seed = 9;
  Vocab v = small_vocab(4, 1);
  ComplExModel m = init_model(v, cfg);
  std::vector<Triple> batch = {{0, 0, 1}};
  double without = batch_loss_and_grad(m, batch, 0.0, nullptr);
  double with = batch_loss_and_grad(m, batch, 0.5, nullptr);
  double sum_sq = 0.0;
  for (const auto* block : {&m.ent_re, &m.ent_im, &m.rel_re, &m.rel_im})
    for (double x : *block) sum_sq += x * x;
  CHECK(with - without == doctest::Approx(0.5 * sum_sq).epsilon(1e-12));
}

TEST_CASE("training drives the loss near zero on a small graph") {
  KnowledgeGraph kg = chain_graph(12, 2);
  TrainConfig cfg;
  cfg.dim = 12;
  cfg.epochs = 200;
  cfg.learning_rate = 0.1;
  cfg.batch_size = 8;
  cfg.seed = 4;
  TrainResult result = train(init_model(kg.vocab(), cfg), kg, cfg);
  REQUIRE(result.loss_history.size() == 200);
  CHECK(result.loss_history.front() > 4.0);  // ~2 ln 12 at uniform softmax
  CHECK(result.loss_history.back() < 0.1);
  for (double loss : result.loss_history) CHECK(std::isfinite(loss));
}

TEST_CASE("training separates observed tails from the rest") {
  KnowledgeGraph kg = chain_graph(10, 1);
  TrainConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 150;
  cfg.learning_rate = 0.1;
  cfg.batch_size = 16;
  cfg.seed = 2;
  TrainResult result = train(init_model(kg.vocab(), cfg), kg, cfg);
  // (3, r0, 4) is observed; its score should beat every non-successor tail.
  std::vector<double> all = score_all_tails(result.model, 3, 0);
  for (EntityId t = 0; t < 10; ++t)
    if (t != 4) CHECK(all[4] > all[t]);
}

TEST_CASE("train is deterministic in the seed") {
  KnowledgeGraph kg = chain_graph(8, 2);
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 5;
  cfg.seed = 13;
  TrainResult a = train(init_model(kg.vocab(), cfg), kg, cfg);
  TrainResult b = train(init_model(kg.vocab(), cfg), kg, cfg);
  CHECK(a.model.ent_re == b.model.ent_re);
  CHECK(a.model.rel_im == b.model.rel_im);
  CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("zero epochs returns the init unchanged") {
  KnowledgeGraph kg = chain_graph(5, 1);
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 0;
  cfg.seed = 1;
  ComplExModel init = init_model(kg.vocab(), cfg);
  TrainResult result = train(init, kg, cfg);
  CHECK(result.model.ent_re == init.ent_re);
  CHECK(result.loss_history.empty());
}

TEST_CASE("checkpoint round-trips bit for bit") {
  KnowledgeGraph kg = chain_graph(6, 2);
  TrainConfig cfg;
  cfg.dim = 5;
  cfg.epochs = 3;
  cfg.seed = 21;
  ComplExModel m = train(init_model(kg.vocab(), cfg), kg, cfg).model;

  fs::path dir = fs::temp_directory_path() / "lqot_complex_test";
  fs::create_directories(dir);
  fs::path p = dir / "model.bin";
  save_model(m, p.string());
  ComplExModel loaded = load_model(p.string());
  CHECK(loaded.num_entities == m.num_entities);
  CHECK(loaded.num_relations == m.num_relations);
  CHECK(loaded.dim == m.dim);
  CHECK(loaded.seed == m.seed);
  CHECK(loaded.ent_re == m.ent_re);
  CHECK(loaded.ent_im == m.ent_im);
  CHECK(loaded.rel_re == m.rel_re);
  CHECK(loaded.rel_im == m.rel_im);
}

TEST_CASE("load_model rejects junk") {
  fs::path dir = fs::temp_directory_path() / "lqot_complex_test";
  fs::create_directories(dir);
  fs::path p = dir / "junk.bin";
  {
    std::ofstream out(p, std::ios::binary);
    out << "not a checkpoint at all";
  }
  CHECK_THROWS(load_model(p.string()));
  CHECK_THROWS(load_model((dir / "missing.bin").string()));
}
