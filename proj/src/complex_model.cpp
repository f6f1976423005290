#include "lqot/complex_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "lqot/util.hpp"

namespace lqot {

namespace {

constexpr char kMagic[4] = {'L', 'Q', 'C', 'X'};
constexpr std::uint8_t kVersion = 1;

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw std::runtime_error("load_model: truncated file");
}

// scores -> softmax probabilities, max-subtracted for stability.
// Returns log(sum(exp(s - max))) + max for the cross-entropy term.
double softmax_inplace(std::vector<double>& s) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : s) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : s) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : s) v /= sum;
  return std::log(sum) + mx;
}

// Adds the gradient of -log softmax(scores)[target] for the tail-prediction
// task with head row `h` and relation row `r`, scaled by `w`.
double accumulate_example(const ComplExModel& m, EntityId h, RelationId r, EntityId target,
                          double w, Gradients* grad) {
  const int d = m.dim;
  const double* hr = m.ent_re_row(h);
  const double* hi = m.ent_im_row(h);
  const double* wr = m.rel_re_row(r);
  const double* wi = m.rel_im_row(r);

  std::vector<double> u_re(static_cast<std::size_t>(d)), u_im(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    u_re[static_cast<std::size_t>(k)] = hr[k] * wr[k] - hi[k] * wi[k];
    u_im[static_cast<std::size_t>(k)] = hr[k] * wi[k] + hi[k] * wr[k];
  }

  std::vector<double> p(static_cast<std::size_t>(m.num_entities), 0.0);
  for (std::int32_t j = 0; j < m.num_entities; ++j) {
    const double* tr = m.ent_re_row(j);
    const double* ti = m.ent_im_row(j);
    double s = 0.0;
    for (int k = 0; k < d; ++k)
      s += u_re[static_cast<std::size_t>(k)] * tr[k] + u_im[static_cast<std::size_t>(k)] * ti[k];
    p[static_cast<std::size_t>(j)] = s;
  }
  double target_score = p[static_cast<std::size_t>(target)];
  double lse = softmax_inplace(p);
  double loss = w * (lse - target_score);

  if (grad != nullptr) {
    // d loss / d u accumulated over all tails: sum_j (p_j - [j==target]) * E[j].
    std::vector<double> gu_re(static_cast<std::size_t>(d), 0.0),
        gu_im(static_cast<std::size_t>(d), 0.0);
    for (std::int32_t j = 0; j < m.num_entities; ++j) {
      double c = p[static_cast<std::size_t>(j)] - (j == target ? 1.0 : 0.0);
      const double* tr = m.ent_re_row(j);
      const double* ti = m.ent_im_row(j);
      double* ger = grad->ent_re.data() + static_cast<std::size_t>(j) * d;
      double* gei = grad->ent_im.data() + static_cast<std::size_t>(j) * d;
      double cw = c * w;
      for (int k = 0; k < d; ++k) {
        std::size_t kk = static_cast<std::size_t>(k);
        gu_re[kk] += c * tr[k];
        gu_im[kk] += c * ti[k];
        // tail side: d s_j / d E[j] = u
        ger[k] += cw * u_re[kk];
        gei[k] += cw * u_im[kk];
      }
    }
    double* ghr = grad->ent_re.data() + static_cast<std::size_t>(h) * d;
    double* ghi = grad->ent_im.data() + static_cast<std::size_t>(h) * d;
    double* gwr = grad->rel_re.data() + static_cast<std::size_t>(r) * d;
    double* gwi = grad->rel_im.data() + static_cast<std::size_t>(r) * d;
    for (int k = 0; k < d; ++k) {
      std::size_t kk = static_cast<std::size_t>(k);
      ghr[k] += w * (gu_re[kk] * wr[k] + gu_im[kk] * wi[k]);
      ghi[k] += w * (-gu_re[kk] * wi[k] + gu_im[kk] * wr[k]);
      gwr[k] += w * (gu_re[kk] * hr[k] + gu_im[kk] * hi[k]);
      gwi[k] += w * (-gu_re[kk] * hi[k] + gu_im[kk] * hr[k]);
    }
  }
  return loss;
}

}  // namespace

ComplExModel init_model(const Vocab& vocab, const TrainConfig& cfg) {
  if (cfg.dim <= 0) throw std::invalid_argument("init_model: dim must be positive");
  if (vocab.num_entities() == 0 || vocab.num_relations() == 0)
    throw std::invalid_argument("init_model: vocab must be non-empty");

  ComplExModel m;
  m.num_entities = static_cast<std::int32_t>(vocab.num_entities());
  m.num_relations = static_cast<std::int32_t>(vocab.num_relations());
  m.dim = cfg.dim;
  m.seed = cfg.seed;

  std::size_t ent_n = vocab.num_entities() * static_cast<std::size_t>(cfg.dim);
  std::size_t rel_n = 2 * vocab.num_relations() * static_cast<std::size_t>(cfg.dim);
  m.ent_re.resize(ent_n);
  m.ent_im.resize(ent_n);
  m.rel_re.resize(rel_n);
  m.rel_im.resize(rel_n);

  double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  Rng rng(cfg.seed);
  auto fill = [&](std::vector<double>& v) {
    for (double& x : v) x = (rng.next_double() - 0.5) * scale;
  };
  fill(m.ent_re);
  fill(m.ent_im);
  fill(m.rel_re);
  fill(m.rel_im);
  return m;
}

double score(const ComplExModel& m, EntityId h, RelationId r, EntityId t) {
  const double* hr = m.ent_re_row(h);
  const double* hi = m.ent_im_row(h);
  const double* wr = m.rel_re_row(r);
  const double* wi = m.rel_im_row(r);
  const double* tr = m.ent_re_row(t);
  const double* ti = m.ent_im_row(t);
  double s = 0.0;
  for (int k = 0; k < m.dim; ++k) {
    double u_re = hr[k] * wr[k] - hi[k] * wi[k];
    double u_im = hr[k] * wi[k] + hi[k] * wr[k];
    s += u_re * tr[k] + u_im * ti[k];
  }
  return s;
}

std::vector<double> score_all_tails(const ComplExModel& m, EntityId h, RelationId r) {
  const double* hr = m.ent_re_row(h);
  const double* hi = m.ent_im_row(h);
  const double* wr = m.rel_re_row(r);
  const double* wi = m.rel_im_row(r);
  const int d = m.dim;

  std::vector<double> out(static_cast<std::size_t>(m.num_entities));
  for (std::int32_t j = 0; j < m.num_entities; ++j) {
    const double* tr = m.ent_re_row(j);
    const double* ti = m.ent_im_row(j);
    double s = 0.0;
    // Same per-dimension expression as score(): element j must equal it
    // bit for bit.
    for (int k = 0; k < d; ++k) {
      double u_re = hr[k] * wr[k] - hi[k] * wi[k];
      double u_im = hr[k] * wi[k] + hi[k] * wr[k];
      s += u_re * tr[k] + u_im * ti[k];
    }
    out[static_cast<std::size_t>(j)] = s;
  }
  return out;
}

double batch_loss_and_grad(const ComplExModel& m, std::span<const Triple> batch, double l2,
                           Gradients* grad) {
  if (batch.empty()) throw std::invalid_argument("batch_loss_and_grad: empty batch");
  if (grad != nullptr) {
    grad->ent_re.assign(m.ent_re.size(), 0.0);
    grad->ent_im.assign(m.ent_im.size(), 0.0);
    grad->rel_re.assign(m.rel_re.size(), 0.0);
    grad->rel_im.assign(m.rel_im.size(), 0.0);
  }

  double w = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Triple& t : batch) {
    loss += accumulate_example(m, t.head, t.relation, t.tail, w, grad);
    loss += accumulate_example(m, t.tail, t.relation + m.num_relations, t.head, w, grad);
  }

  double sq = 0.0;
  auto l2_term = [&](const std::vector<double>& params, std::vector<double>* g) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      sq += params[i] * params[i];
      if (g != nullptr) (*g)[i] += 2.0 * l2 * params[i];
    }
  };
  l2_term(m.ent_re, grad ? &grad->ent_re : nullptr);
  l2_term(m.ent_im, grad ? &grad->ent_im : nullptr);
  l2_term(m.rel_re, grad ? &grad->rel_re : nullptr);
  l2_term(m.rel_im, grad ? &grad->rel_im : nullptr);
  return loss + l2 * sq;
}

TrainResult train(ComplExModel model, const KnowledgeGraph& kg, const TrainConfig& cfg) {
  if (cfg.batch_size <= 0) throw std::invalid_argument("train: batch_size must be positive");
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");

  TrainResult result;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

  const auto& triples = kg.triples();
  std::vector<std::size_t> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Rng rng(cfg.seed);
  Gradients grad;
  std::vector<Triple> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(triples[order[i]]);

      double loss = batch_loss_and_grad(model, batch, cfg.l2, &grad);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batches) +
                                 " (reduce learning_rate)");
      epoch_loss += loss;
      ++batches;

      double lr = cfg.learning_rate;
      for (std::size_t i = 0; i < model.ent_re.size(); ++i) model.ent_re[i] -= lr * grad.ent_re[i];
      for (std::size_t i = 0; i < model.ent_im.size(); ++i) model.ent_im[i] -= lr * grad.ent_im[i];
      for (std::size_t i = 0; i < model.rel_re.size(); ++i) model.rel_re[i] -= lr * grad.rel_re[i];
      for (std::size_t i = 0; i < model.rel_im.size(); ++i) model.rel_im[i] -= lr * grad.rel_im[i];
    }
    result.loss_history.push_back(batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0);
  }
  result.model = std::move(model);
  return result;
}

void save_model(const ComplExModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path + " for writing");
  write_bytes(out, kMagic, 4);
  write_bytes(out, &kVersion, 1);
  std::uint32_t e = static_cast<std::uint32_t>(m.num_entities);
  std::uint32_t r = static_cast<std::uint32_t>(m.num_relations);
  std::uint32_t d = static_cast<std::uint32_t>(m.dim);
  write_bytes(out, &e, 4);
  write_bytes(out, &r, 4);
  write_bytes(out, &d, 4);
  write_bytes(out, &m.seed, 8);
  auto arr = [&](const std::vector<double>& v) {
    write_bytes(out, v.data(), v.size() * sizeof(double));
  };
  arr(m.ent_re);
  arr(m.ent_im);
  arr(m.rel_re);
  arr(m.rel_im);
  if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

ComplExModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  char magic[4];
  read_bytes(in, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_model: " + path + " is not a model checkpoint");
  std::uint8_t version = 0;
  read_bytes(in, &version, 1);
  if (version != kVersion)
    throw std::runtime_error("load_model: unsupported checkpoint version " +
                             std::to_string(version));
  std::uint32_t e = 0, r = 0, d = 0;
  read_bytes(in, &e, 4);
  read_bytes(in, &r, 4);
  read_bytes(in, &d, 4);

  ComplExModel m;
  m.num_entities = static_cast<std::int32_t>(e);
  m.num_relations = static_cast<std::int32_t>(r);
  m.dim = static_cast<std::int32_t>(d);
  read_bytes(in, &m.seed, 8);

  std::size_t ent_n = static_cast<std::size_t>(e) * d;
  std::size_t rel_n = 2 * static_cast<std::size_t>(r) * d;
  auto arr = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    read_bytes(in, v.data(), n * sizeof(double));
  };
  arr(m.ent_re, ent_n);
  arr(m.ent_im, ent_n);
  arr(m.rel_re, rel_n);
  arr(m.rel_im, rel_n);
  for (const auto* v : {&m.ent_re, &m.ent_im, &m.rel_re, &m.rel_im})
    for (double x : *v)
      if (!std::isfinite(x)) throw std::runtime_error("load_model: non-finite parameter");
  return m;
}

}  // namespace lqot
