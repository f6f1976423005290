#pragma once

// Complex-valued bilinear embedding model over the triple store.
//
// An entity e is a vector in C^dim stored as parallel real/imaginary arrays;
// a relation r has two rows: index r for the forward direction and index
// r + num_relations for the reciprocal one (used only to pose head
// prediction as tail prediction during training).
//
// score(h, r, t) = Re( sum_d  E[h]_d * W[r]_d * conj(E[t]_d) )
//
// Training minimizes, per triple (h, r, t), the cross-entropy of a full
// softmax over all tails plus the same term for (t, r + |R|, h), with an L2
// penalty on every parameter, by plain mini-batch gradient descent. No
// adaptive optimizer: runs are reproducible from the seed alone.
//
// Checkpoint layout (little-endian binary):
//   magic "LQCX" | version u8 = 1 | num_entities u32 | num_relations u32 |
//   dim u32 | seed u64 | ent_re f64[E*d] | ent_im f64[E*d] |
//   rel_re f64[2R*d] | rel_im f64[2R*d]
// Arrays are row-major with row = entity or relation id.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lqot/kg.hpp"

namespace lqot {

struct TrainConfig {
  int dim = 64;
  int epochs = 200;
  double learning_rate = 0.05;
  double l2 = 1e-5;
  int batch_size = 512;
  std::uint64_t seed = 0;
};

struct ComplExModel {
  std::int32_t num_entities = 0;
  std::int32_t num_relations = 0;  // forward relations; parameter rows are doubled
  std::int32_t dim = 0;
  std::uint64_t seed = 0;

  std::vector<double> ent_re, ent_im;  // num_entities x dim
  std::vector<double> rel_re, rel_im;  // 2 * num_relations x dim

  const double* ent_re_row(EntityId e) const { return ent_re.data() + static_cast<std::size_t>(e) * dim; }
  const double* ent_im_row(EntityId e) const { return ent_im.data() + static_cast<std::size_t>(e) * dim; }
  const double* rel_re_row(RelationId r) const { return rel_re.data() + static_cast<std::size_t>(r) * dim; }
  const double* rel_im_row(RelationId r) const { return rel_im.data() + static_cast<std::size_t>(r) * dim; }
};

// Fresh model with every coordinate uniform in [-0.5/sqrt(dim), 0.5/sqrt(dim)),
// drawn from the deterministic generator seeded with cfg.seed. Generation
// order (ent_re, ent_im, rel_re, rel_im, row-major) is part of the contract.
ComplExModel init_model(const Vocab& vocab, const TrainConfig& cfg);

// r may address the reciprocal block, i.e. 0 <= r < 2 * num_relations.
double score(const ComplExModel& m, EntityId h, RelationId r, EntityId t);

// Element j equals score(m, h, r, j) exactly (same arithmetic path).
std::vector<double> score_all_tails(const ComplExModel& m, EntityId h, RelationId r);

struct Gradients {
  std::vector<double> ent_re, ent_im, rel_re, rel_im;
};

// Loss of one batch: mean over triples of the two cross-entropy terms plus
// l2 * sum of squared parameters. When grad is non-null it is resized,
// zeroed and filled with the analytic gradient. Exposed so the gradient can
// be verified against finite differences.
double batch_loss_and_grad(const ComplExModel& m, std::span<const Triple> batch, double l2,
                           Gradients* grad);

struct TrainResult {
  ComplExModel model;
  std::vector<double> loss_history;  // one entry per epoch
};

// cfg.epochs == 0 returns the model unchanged with an empty history. Throws
// on a non-finite batch loss, naming epoch and batch.
TrainResult train(ComplExModel model, const KnowledgeGraph& kg, const TrainConfig& cfg);

void save_model(const ComplExModel& m, const std::string& path);
ComplExModel load_model(const std::string& path);

}  // namespace lqot
