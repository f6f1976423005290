#pragma once

// Bridge between the fuzzy engine and a text answer source.
//
// Flow at a projection node (LlmHook):
//   1. select_frontier: strongest entities of the child vector (score >=
//      frontier_tau, at most frontier_cap, top-1 fallback when none clear
//      the bar).
//   2. make_projection_prompt: the relation's question template with the
//      frontier entities joined by " or ", wrapped in the few-shot prompt.
//   3. n samples from the provider, each parsed by parse_answer_payload
//      (first JSON object with an answer list; unknown names dropped).
//   4. estimate_confidence: p(e) = fraction of samples containing e.
//   5. likelihood_filter: keep e with p(e) / max p >= theta.
//   6. optional evaluate_answers re-ranking (off by default).
//   7. fuse: Project nodes get out[e] = max(t[e], alpha * p(e)).
//      For NegProject the answers are r-successors and must end up
//      excluded, so the fuse happens on the pre-negation side, which on the
//      post-negation vector is out[e] = min(t[e], 1 - alpha * p(e)).
//
// Any provider failure or empty retained set leaves the vector unchanged
// (bit for bit), so a broken or useless provider degrades to graph-only
// behavior exactly.
//
// Mock fixture file (TSV): key, then one or more comma-separated answer
// groups; group i serves sample i (the last group repeats for later
// samples). A key is matched as the whole prompt, the 16-hex fnv1a64 of the
// prompt, or the question extracted from the final 'Q: "..."' line. When
// question templates are registered, an or-joined question falls back to
// the union of its per-entity fixture answers, mirroring the projection
// semantics. Unmatched prompts get a fixed unparseable reply.

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lqot/fuzzy.hpp"
#include "lqot/kg.hpp"

namespace lqot {

class AnswerProvider {
 public:
  virtual ~AnswerProvider() = default;

  // Raw model reply for one prompt. Throws on failure.
  virtual std::string ask(const std::string& prompt) = 0;

  // n independent samples. Providers without real sampling repeat ask().
  virtual std::vector<std::string> ask_samples(const std::string& prompt, int n);

  virtual bool supports_sampling() const { return false; }
};

class MockProvider : public AnswerProvider {
 public:
  MockProvider() = default;
  explicit MockProvider(const std::string& fixture_path);

  // samples[i] answers the i-th draw; the last group repeats.
  void add_fixture(const std::string& key, std::vector<std::vector<std::string>> samples);

  // Enables or-join decomposition. Each template contains "entity1" once.
  void set_question_templates(std::vector<std::string> templates);

  std::string ask(const std::string& prompt) override;
  std::vector<std::string> ask_samples(const std::string& prompt, int n) override;
  bool supports_sampling() const override { return true; }

  // {"answer entity": ["a", "b"]}
  static std::string format_payload(std::span<const std::string> names);

 private:
  std::optional<std::vector<std::string>> lookup(const std::string& prompt, std::size_t sample) const;

  std::unordered_map<std::string, std::vector<std::vector<std::string>>> fixtures_;
  std::vector<std::string> templates_;
};

// Deterministic nonsense: junk prose, malformed JSON, well-formed JSON with
// wrong keys or unknown entities. Exercises every degradation path.
class GarbageProvider : public AnswerProvider {
 public:
  std::string ask(const std::string& prompt) override;
  bool supports_sampling() const override { return true; }
};

// Chat-completion endpoint speaking the usual JSON shape. Configuration
// comes from the constructor or, via from_env(), the LQOT_LLM_URL,
// LQOT_LLM_TOKEN and LQOT_LLM_MODEL environment variables. Each request is
// tried up to 3 times before the error propagates.
class HttpChatProvider : public AnswerProvider {
 public:
  HttpChatProvider(std::string base_url, std::string token, std::string model,
                   bool debug = false);
  static std::unique_ptr<HttpChatProvider> from_env();

  std::string ask(const std::string& prompt) override;

 private:
  std::string base_url_;
  std::string token_;
  std::string model_;
  bool debug_;
};

// Disk cache keyed by prompt hash (per sample index). Replays are served
// without touching the inner provider; concurrent writers may race, the
// last write wins.
class CachingProvider : public AnswerProvider {
 public:
  CachingProvider(std::shared_ptr<AnswerProvider> inner, std::string cache_dir);

  std::string ask(const std::string& prompt) override;
  std::vector<std::string> ask_samples(const std::string& prompt, int n) override;
  bool supports_sampling() const override { return inner_->supports_sampling(); }

 private:
  std::optional<std::string> read_entry(const std::string& key) const;
  void write_entry(const std::string& key, const std::string& value) const;

  std::shared_ptr<AnswerProvider> inner_;
  std::string cache_dir_;
};

struct ProviderHandle {
  std::shared_ptr<AnswerProvider> provider;
  MockProvider* mock = nullptr;  // non-null when the inner provider is the mock
};

// descriptor is mock:<fixture-path> | garbage | http. A non-empty cache_dir
// wraps the provider in a CachingProvider. Throws on "none" or anything
// unknown.
ProviderHandle make_provider(const std::string& descriptor, const std::string& cache_dir);

struct AnswerSet {
  enum class Provenance { Llm, Kg, Fused };
  struct Item {
    EntityId id;
    std::string name;
    double confidence;  // expected in [0, 1]; the filter tolerates any positive scale
  };
  std::vector<Item> items;  // unique ids, sorted by (confidence desc, id asc)
  Provenance provenance = Provenance::Llm;
};

enum class EvaluateAt { Off, Final, All };

struct FusionConfig {
  double theta = 0.5;        // likelihood-ratio cutoff
  double alpha = 0.9;        // weight of provider confidence when fusing
  int frontier_cap = 10;     // max entities named in one question
  double frontier_tau = 0.5; // membership bar for the frontier
  int samples = 3;           // provider draws per question
  EvaluateAt evaluate_at = EvaluateAt::Off;
};

struct QuestionTemplate {
  RelationId relation = -1;
  std::string text;  // contains "entity1" exactly once
};

// Case-insensitive, whitespace-normalized name lookup. On collisions the
// smallest entity id wins.
class NameResolver {
 public:
  explicit NameResolver(const Vocab& vocab);
  std::optional<EntityId> resolve(const std::string& name) const;

 private:
  std::unordered_map<std::string, EntityId> ids_;
};

// Asks the provider to rewrite `relation`, illustrated by (head, tail) name
// pairs, into a question about entity1. Falls back to the stored relation
// question table and finally to "What is <relation> of entity1?" when the
// reply has no single line containing the placeholder exactly once.
QuestionTemplate atom_to_question(RelationId relation,
                                  std::span<const std::pair<std::string, std::string>> pairs,
                                  AnswerProvider* provider, const Vocab& vocab);

// Fallback-only variant, no provider round-trip.
QuestionTemplate fallback_question(RelationId relation, const Vocab& vocab);

// Substitutes the or-joined entity names into the template.
std::string instantiate_question(const QuestionTemplate& tmpl,
                                 std::span<const std::string> entities);

// instantiate_question wrapped in the few-shot projection prompt.
std::string make_projection_prompt(const QuestionTemplate& tmpl,
                                   std::span<const std::string> entities);

// Wraps an arbitrary question text in the projection prompt.
std::string wrap_projection_question(const std::string& question);

struct ParsedPayload {
  std::vector<EntityId> ids;  // payload order, deduplicated
  int unknown_names = 0;
};

// Scans `raw` for the first well-formed JSON object carrying an answer list
// under "answer entity" (or "answer"), resolving names case-insensitively.
// Never throws on malformed input: garbage parses as an empty id list.
ParsedPayload parse_answer_payload(const std::string& raw, const NameResolver& resolver,
                                   const Vocab& vocab);

// p(e) = |samples containing e| / |samples|.
AnswerSet estimate_confidence(std::span<const std::vector<EntityId>> samples, const Vocab& vocab);

// Keeps items with confidence / max confidence >= theta. Invariant under
// positive rescaling of all confidences.
AnswerSet likelihood_filter(const AnswerSet& answers, double theta);

// out[e] = max(t[e], alpha * p(e)) for every retained item.
FuzzyVector fuse_into_fuzzy(FuzzyVector t, const AnswerSet& retained, double alpha);

// Pre-negation fuse seen from the negated side: out[e] = min(t[e],
// 1 - alpha * p(e)). Raising the belief that an edge exists lowers the
// belief in its negation by the same amount.
FuzzyVector fuse_into_fuzzy_complement(FuzzyVector t, const AnswerSet& retained, double alpha);

// Entities allowed to appear in a question, by (score desc, id asc):
// all with t >= tau, capped at frontier_cap, top-1 when none qualify.
std::vector<std::string> select_frontier(const FuzzyVector& t, const FusionConfig& cfg,
                                         const Vocab& vocab);

// Optional re-ranking: asks the provider to replace/re-rank the candidates
// (at most 10 used); rank r maps to confidence (11 - r) / 10. On any
// failure the candidates pass through with uniform confidence 1.
AnswerSet evaluate_answers(const std::string& question, std::span<const std::string> candidates,
                           AnswerProvider* provider, const NameResolver& resolver,
                           const Vocab& vocab);

// The execute() hook implementing the flow described at the top.
class LlmHook {
 public:
  LlmHook(AnswerProvider* provider, std::unordered_map<RelationId, QuestionTemplate> templates,
          FusionConfig cfg, const Vocab& vocab);

  FuzzyVector operator()(const NodeContext& ctx, FuzzyVector t) const;
  NodeHook as_node_hook() const;

  int provider_failures() const { return provider_failures_.load(); }
  int unknown_names() const { return unknown_names_.load(); }

 private:
  AnswerProvider* provider_;
  std::unordered_map<RelationId, QuestionTemplate> templates_;
  FusionConfig cfg_;
  const Vocab* vocab_;
  NameResolver resolver_;
  mutable std::atomic<int> provider_failures_{0};
  mutable std::atomic<int> unknown_names_{0};
};

}  // namespace lqot
