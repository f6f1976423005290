#include "lqot/llm.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "lqot/prompts.hpp"
#include "lqot/util.hpp"

namespace lqot {

namespace {

using nlohmann::json;

constexpr const char* kPlaceholder = "entity1";
constexpr const char* kMockMissReply = "I don't know.";

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = s.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

// Replaces exactly the first occurrence; throws when the slot is missing.
std::string substitute(std::string_view tmpl, std::string_view slot, std::string_view value) {
  std::size_t pos = tmpl.find(slot);
  if (pos == std::string_view::npos)
    throw std::invalid_argument("substitute: template lacks slot " + std::string(slot));
  std::string out(tmpl.substr(0, pos));
  out += value;
  out += tmpl.substr(pos + slot.size());
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

// The projection prompt ends with:  Q: "<question>"\n\nA:
// Recovers <question>; empty when the prompt has another shape.
std::string extract_wrapped_question(const std::string& prompt) {
  const std::string tail = "\"\n\nA: ";
  if (prompt.size() < tail.size() || prompt.compare(prompt.size() - tail.size(), tail.size(), tail) != 0)
    return "";
  std::size_t end = prompt.size() - tail.size();
  const std::string open = "Q: \"";
  std::size_t start = prompt.rfind(open, end);
  if (start == std::string::npos) return "";
  start += open.size();
  if (start > end) return "";
  return prompt.substr(start, end - start);
}

}  // namespace

std::vector<std::string> AnswerProvider::ask_samples(const std::string& prompt, int n) {
  if (n <= 0) throw std::invalid_argument("ask_samples: n must be positive");
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(ask(prompt));
  return out;
}

MockProvider::MockProvider(const std::string& fixture_path) {
  std::ifstream in(fixture_path, std::ios::binary);
  if (!in) throw std::runtime_error("MockProvider: cannot open " + fixture_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields = split(line, '\t');
    if (fields.size() < 2)
      throw std::runtime_error("MockProvider: " + fixture_path + ":" + std::to_string(line_no) +
                               ": expected key<TAB>answers");
    std::vector<std::vector<std::string>> samples;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      std::vector<std::string> names;
      for (const std::string& name : split(fields[f], ','))
        if (!name.empty()) names.push_back(name);
      samples.push_back(std::move(names));
    }
    fixtures_[fields[0]] = std::move(samples);
  }
}

void MockProvider::add_fixture(const std::string& key,
                               std::vector<std::vector<std::string>> samples) {
  if (samples.empty()) throw std::invalid_argument("add_fixture: need at least one sample group");
  fixtures_[key] = std::move(samples);
}

void MockProvider::set_question_templates(std::vector<std::string> templates) {
  for (const std::string& t : templates)
    if (count_occurrences(t, kPlaceholder) != 1)
      throw std::invalid_argument("set_question_templates: template must contain '" +
                                  std::string(kPlaceholder) + "' exactly once: " + t);
  templates_ = std::move(templates);
}

std::optional<std::vector<std::string>> MockProvider::lookup(const std::string& prompt,
                                                             std::size_t sample) const {
  auto pick = [&](const std::vector<std::vector<std::string>>& groups) {
    return groups[std::min(sample, groups.size() - 1)];
  };

  if (auto it = fixtures_.find(prompt); it != fixtures_.end()) return pick(it->second);
  if (auto it = fixtures_.find(hash_hex(fnv1a64(prompt))); it != fixtures_.end())
    return pick(it->second);

  std::string question = extract_wrapped_question(prompt);
  if (question.empty()) return std::nullopt;
  if (auto it = fixtures_.find(question); it != fixtures_.end()) return pick(it->second);

  // Or-joined question: answer with the union of the per-entity fixtures.
  for (const std::string& tmpl : templates_) {
    std::size_t slot = tmpl.find(kPlaceholder);
    std::string prefix = tmpl.substr(0, slot);
    std::string suffix = tmpl.substr(slot + std::string_view(kPlaceholder).size());
    if (question.size() < prefix.size() + suffix.size()) continue;
    if (question.compare(0, prefix.size(), prefix) != 0) continue;
    if (question.compare(question.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    std::string middle = question.substr(prefix.size(), question.size() - prefix.size() - suffix.size());

    std::vector<std::string> answers;
    bool any = false;
    std::size_t begin = 0;
    const std::string sep = " or ";
    for (;;) {
      std::size_t hit = middle.find(sep, begin);
      std::string name = middle.substr(begin, hit == std::string::npos ? std::string::npos
                                                                       : hit - begin);
      auto it = fixtures_.find(prefix + name + suffix);
      if (it != fixtures_.end()) {
        any = true;
        for (const std::string& a : pick(it->second))
          if (std::find(answers.begin(), answers.end(), a) == answers.end()) answers.push_back(a);
      }
      if (hit == std::string::npos) break;
      begin = hit + sep.size();
    }
    if (any) return answers;
  }
  return std::nullopt;
}

std::string MockProvider::ask(const std::string& prompt) {
  auto names = lookup(prompt, 0);
  if (!names) return kMockMissReply;
  return format_payload(*names);
}

std::vector<std::string> MockProvider::ask_samples(const std::string& prompt, int n) {
  if (n <= 0) throw std::invalid_argument("ask_samples: n must be positive");
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto names = lookup(prompt, static_cast<std::size_t>(i));
    out.push_back(names ? format_payload(*names) : kMockMissReply);
  }
  return out;
}

std::string MockProvider::format_payload(std::span<const std::string> names) {
  json arr = json::array();
  for (const std::string& n : names) arr.push_back(n);
  json obj;
  obj["answer entity"] = std::move(arr);
  return obj.dump();
}

std::string GarbageProvider::ask(const std::string& prompt) {
  // Four failure modes, chosen by prompt hash; all of them parse to an
  // empty entity list, which is what makes the degradation contract exact.
  switch (fnv1a64(prompt) % 4) {
    case 0: return "I cannot answer that.";
    case 1: return "{\"wrong key\": [\"nothing\", 42]}";
    case 2: return "Sure! Here you go: {\"answer entity\": \"not a list\"} {also broken";
    default: return "{\"answer entity\": [\"__no_such_entity__\"]} trailing prose";
  }
}

HttpChatProvider::HttpChatProvider(std::string base_url, std::string token, std::string model,
                                   bool debug)
    : base_url_(std::move(base_url)), token_(std::move(token)), model_(std::move(model)),
      debug_(debug) {
  if (base_url_.empty()) throw std::invalid_argument("HttpChatProvider: empty base url");
}

std::unique_ptr<HttpChatProvider> HttpChatProvider::from_env() {
  const char* url = std::getenv("LQOT_LLM_URL");
  if (url == nullptr || *url == '\0')
    throw std::runtime_error("HttpChatProvider: LQOT_LLM_URL is not set");
  const char* token = std::getenv("LQOT_LLM_TOKEN");
  const char* model = std::getenv("LQOT_LLM_MODEL");
  const char* debug = std::getenv("LQOT_LLM_DEBUG");
  return std::make_unique<HttpChatProvider>(url, token ? token : "", model ? model : "",
                                            debug != nullptr && *debug != '\0');
}

std::string HttpChatProvider::ask(const std::string& prompt) {
  // Split "<scheme>://<host>[:port]<path>"; the path defaults to the usual
  // chat-completions route.
  std::string base = base_url_;
  std::string path = "/v1/chat/completions";
  std::size_t scheme = base.find("://");
  std::size_t path_start = scheme == std::string::npos ? base.find('/')
                                                       : base.find('/', scheme + 3);
  if (path_start != std::string::npos) {
    path = base.substr(path_start);
    base = base.substr(0, path_start);
  }

  json body;
  body["model"] = model_;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 1; attempt <= 3; ++attempt) {
    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    if (debug_) std::fprintf(stderr, "[llm] POST %s%s body=%s\n", base.c_str(), path.c_str(), payload.c_str());
    httplib::Result res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    if (debug_) std::fprintf(stderr, "[llm] response=%s\n", res->body.c_str());
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty()) {
      last_error = "malformed completion payload";
      continue;
    }
    const json& choice = reply["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string())
      return choice["message"]["content"].get<std::string>();
    if (choice.contains("text") && choice["text"].is_string())
      return choice["text"].get<std::string>();
    last_error = "completion without content";
  }
  throw std::runtime_error("HttpChatProvider: request failed after 3 attempts (" + last_error + ")");
}

CachingProvider::CachingProvider(std::shared_ptr<AnswerProvider> inner, std::string cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
  if (!inner_) throw std::invalid_argument("CachingProvider: null inner provider");
  std::filesystem::create_directories(cache_dir_);
}

std::optional<std::string> CachingProvider::read_entry(const std::string& key) const {
  std::ifstream in(std::filesystem::path(cache_dir_) / (key + ".txt"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void CachingProvider::write_entry(const std::string& key, const std::string& value) const {
  namespace fs = std::filesystem;
  fs::path final_path = fs::path(cache_dir_) / (key + ".txt");
  fs::path tmp_path = fs::path(cache_dir_) / (key + ".tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary);
    out << value;
  }
  std::error_code ec;
  fs::rename(tmp_path, final_path, ec);  // racing writers: last rename wins
}

std::string CachingProvider::ask(const std::string& prompt) {
  std::string key = hash_hex(fnv1a64(prompt)) + "-0";
  if (auto hit = read_entry(key)) return *hit;
  std::string value = inner_->ask(prompt);
  write_entry(key, value);
  return value;
}

std::vector<std::string> CachingProvider::ask_samples(const std::string& prompt, int n) {
  if (n <= 0) throw std::invalid_argument("ask_samples: n must be positive");
  std::string base = hash_hex(fnv1a64(prompt));
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  bool all_hit = true;
  for (int i = 0; i < n && all_hit; ++i) {
    if (auto hit = read_entry(base + "-" + std::to_string(i)))
      out.push_back(*hit);
    else
      all_hit = false;
  }
  if (all_hit) return out;
  out = inner_->ask_samples(prompt, n);
  for (int i = 0; i < n; ++i) write_entry(base + "-" + std::to_string(i), out[static_cast<std::size_t>(i)]);
  return out;
}

ProviderHandle make_provider(const std::string& descriptor, const std::string& cache_dir) {
  ProviderHandle handle;
  std::shared_ptr<AnswerProvider> inner;
  if (descriptor.rfind("mock:", 0) == 0) {
    auto mock = std::make_shared<MockProvider>(descriptor.substr(5));
    handle.mock = mock.get();
    inner = std::move(mock);
  } else if (descriptor == "garbage") {
    inner = std::make_shared<GarbageProvider>();
  } else if (descriptor == "http") {
    inner = HttpChatProvider::from_env();
  } else {
    throw std::runtime_error("make_provider: unknown descriptor '" + descriptor +
                             "' (mock:<fixture-path> | garbage | http)");
  }
  handle.provider =
      cache_dir.empty() ? inner : std::make_shared<CachingProvider>(inner, cache_dir);
  return handle;
}

NameResolver::NameResolver(const Vocab& vocab) {
  for (std::size_t i = 0; i < vocab.num_entities(); ++i) {
    std::string key = to_lower(normalize_whitespace(vocab.entity_name(static_cast<EntityId>(i))));
    ids_.emplace(key, static_cast<EntityId>(i));  // first (smallest) id wins
  }
}

std::optional<EntityId> NameResolver::resolve(const std::string& name) const {
  auto it = ids_.find(to_lower(normalize_whitespace(name)));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

QuestionTemplate fallback_question(RelationId relation, const Vocab& vocab) {
  const std::string& name = vocab.relation_name(relation);
  for (const auto& [rel, question] : prompts::kRelationQuestionExamples)
    if (name == rel) return QuestionTemplate{relation, question};
  return QuestionTemplate{relation, "What is " + name + " of entity1?"};
}

QuestionTemplate atom_to_question(RelationId relation,
                                  std::span<const std::pair<std::string, std::string>> pairs,
                                  AnswerProvider* provider, const Vocab& vocab) {
  if (provider == nullptr || pairs.empty()) return fallback_question(relation, vocab);

  std::string pair_text;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0) pair_text += ", ";
    pair_text += "(" + pairs[i].first + ", " + pairs[i].second + ")";
  }
  std::string prompt = substitute(prompts::kAtomPredicateToQuestion, "{text_A}", pair_text);
  prompt = substitute(prompt, "{text_B}", vocab.relation_name(relation));

  std::string reply;
  try {
    reply = provider->ask(prompt);
  } catch (const std::exception&) {
    return fallback_question(relation, vocab);
  }

  std::istringstream lines(reply);
  std::string line;
  while (std::getline(lines, line)) {
    std::string candidate(trim(line));
    if (candidate.size() >= 2 && candidate.front() == '"' && candidate.back() == '"')
      candidate = candidate.substr(1, candidate.size() - 2);
    if (count_occurrences(candidate, kPlaceholder) == 1)
      return QuestionTemplate{relation, candidate};
  }
  return fallback_question(relation, vocab);
}

std::string instantiate_question(const QuestionTemplate& tmpl,
                                 std::span<const std::string> entities) {
  if (entities.empty()) throw std::invalid_argument("instantiate_question: no entities");
  if (count_occurrences(tmpl.text, kPlaceholder) != 1)
    throw std::invalid_argument("instantiate_question: template must contain '" +
                                std::string(kPlaceholder) + "' exactly once: " + tmpl.text);
  return substitute(tmpl.text, kPlaceholder, join(entities, " or "));
}

std::string wrap_projection_question(const std::string& question) {
  return substitute(prompts::kProjectionTransformation, "{text_A}", question);
}

std::string make_projection_prompt(const QuestionTemplate& tmpl,
                                   std::span<const std::string> entities) {
  return wrap_projection_question(instantiate_question(tmpl, entities));
}

namespace {

// Candidate JSON object slices of raw: for each '{', the matching balanced
// close brace (string-aware). Malformed regions simply yield no candidate.
std::optional<std::string> balanced_object(const std::string& raw, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}') {
      if (--depth == 0) return raw.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

std::optional<std::vector<std::string>> answer_list(const json& obj) {
  for (const char* key : {"answer entity", "answer"}) {
    if (!obj.contains(key)) continue;
    const json& value = obj[key];
    std::vector<std::string> names;
    if (value.is_array()) {
      for (const json& v : value)
        if (v.is_string()) names.push_back(v.get<std::string>());
      return names;
    }
    if (value.is_string()) return std::vector<std::string>{value.get<std::string>()};
  }
  return std::nullopt;
}

}  // namespace

ParsedPayload parse_answer_payload(const std::string& raw, const NameResolver& resolver,
                                   const Vocab& vocab) {
  (void)vocab;
  ParsedPayload out;
  for (std::size_t pos = raw.find('{'); pos != std::string::npos; pos = raw.find('{', pos + 1)) {
    auto slice = balanced_object(raw, pos);
    if (!slice) continue;
    json obj = json::parse(*slice, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) continue;
    auto names = answer_list(obj);
    if (!names) continue;

    for (const std::string& name : *names) {
      auto id = resolver.resolve(name);
      if (!id) {
        ++out.unknown_names;
        continue;
      }
      if (std::find(out.ids.begin(), out.ids.end(), *id) == out.ids.end()) out.ids.push_back(*id);
    }
    return out;
  }
  return out;  // nothing parseable: empty list
}

AnswerSet estimate_confidence(std::span<const std::vector<EntityId>> samples, const Vocab& vocab) {
  if (samples.empty()) throw std::invalid_argument("estimate_confidence: need at least 1 sample");
  std::unordered_map<EntityId, int> counts;
  for (const auto& sample : samples)
    for (EntityId e : sample) ++counts[e];

  AnswerSet out;
  out.provenance = AnswerSet::Provenance::Llm;
  double n = static_cast<double>(samples.size());
  for (const auto& [id, count] : counts)
    out.items.push_back({id, vocab.entity_name(id), static_cast<double>(count) / n});
  std::sort(out.items.begin(), out.items.end(), [](const auto& a, const auto& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.id < b.id;
  });
  return out;
}

AnswerSet likelihood_filter(const AnswerSet& answers, double theta) {
  AnswerSet out;
  out.provenance = answers.provenance;
  if (answers.items.empty()) return out;
  double p_max = 0.0;
  for (const auto& item : answers.items) p_max = std::max(p_max, item.confidence);
  if (p_max <= 0.0) return out;
  for (const auto& item : answers.items)
    if (item.confidence / p_max >= theta) out.items.push_back(item);
  return out;
}

FuzzyVector fuse_into_fuzzy(FuzzyVector t, const AnswerSet& retained, double alpha) {
  for (const auto& item : retained.items) {
    std::size_t e = static_cast<std::size_t>(item.id);
    if (e >= t.size()) throw std::out_of_range("fuse_into_fuzzy: entity id out of range");
    t[e] = std::max(t[e], alpha * item.confidence);
  }
  return t;
}

FuzzyVector fuse_into_fuzzy_complement(FuzzyVector t, const AnswerSet& retained, double alpha) {
  for (const auto& item : retained.items) {
    std::size_t e = static_cast<std::size_t>(item.id);
    if (e >= t.size()) throw std::out_of_range("fuse_into_fuzzy_complement: entity id out of range");
    t[e] = std::min(t[e], 1.0 - alpha * item.confidence);
  }
  return t;
}

std::vector<std::string> select_frontier(const FuzzyVector& t, const FusionConfig& cfg,
                                         const Vocab& vocab) {
  if (t.empty()) throw std::invalid_argument("select_frontier: empty vector");
  std::size_t qualified = 0;
  for (double v : t)
    if (v >= cfg.frontier_tau) ++qualified;
  std::size_t k = qualified == 0
                      ? 1  // never ask an empty question; take the best guess
                      : std::min(qualified, static_cast<std::size_t>(cfg.frontier_cap));
  std::vector<std::string> names;
  for (const ScoredEntity& e : top_k_ids(t, k)) names.push_back(vocab.entity_name(e.id));
  return names;
}

AnswerSet evaluate_answers(const std::string& question, std::span<const std::string> candidates,
                           AnswerProvider* provider, const NameResolver& resolver,
                           const Vocab& vocab) {
  if (candidates.empty()) throw std::invalid_argument("evaluate_answers: no candidates");

  auto passthrough = [&]() {
    AnswerSet out;
    out.provenance = AnswerSet::Provenance::Llm;
    for (const std::string& name : candidates) {
      auto id = resolver.resolve(name);
      if (id) out.items.push_back({*id, vocab.entity_name(*id), 1.0});
    }
    return out;
  };
  if (provider == nullptr) return passthrough();

  std::string prompt = substitute(prompts::kAnswerEvaluation, "{text_A}", question);
  prompt = substitute(prompt, "{text_B}", join(candidates, ", "));

  ParsedPayload parsed;
  try {
    parsed = parse_answer_payload(provider->ask(prompt), resolver, vocab);
  } catch (const std::exception&) {
    return passthrough();
  }
  if (parsed.ids.empty()) return passthrough();

  AnswerSet out;
  out.provenance = AnswerSet::Provenance::Llm;
  std::size_t used = std::min<std::size_t>(parsed.ids.size(), 10);
  for (std::size_t rank = 0; rank < used; ++rank) {
    EntityId id = parsed.ids[rank];
    out.items.push_back({id, vocab.entity_name(id), (10.0 - static_cast<double>(rank)) / 10.0});
  }
  return out;
}

LlmHook::LlmHook(AnswerProvider* provider,
                 std::unordered_map<RelationId, QuestionTemplate> templates, FusionConfig cfg,
                 const Vocab& vocab)
    : provider_(provider), templates_(std::move(templates)), cfg_(cfg), vocab_(&vocab),
      resolver_(vocab) {
  if (provider_ == nullptr) throw std::invalid_argument("LlmHook: null provider");
}

FuzzyVector LlmHook::operator()(const NodeContext& ctx, FuzzyVector t) const {
  if (ctx.kind != NodeKind::Project && ctx.kind != NodeKind::NegProject) return t;
  if (ctx.child == nullptr) return t;

  auto it = templates_.find(ctx.relation);
  QuestionTemplate tmpl =
      it != templates_.end() ? it->second : fallback_question(ctx.relation, *vocab_);

  std::vector<std::string> frontier = select_frontier(*ctx.child, cfg_, *vocab_);
  std::string prompt = make_projection_prompt(tmpl, frontier);

  std::vector<std::string> replies;
  try {
    replies = provider_->ask_samples(prompt, cfg_.samples);
  } catch (const std::exception&) {
    provider_failures_.fetch_add(1);
    return t;  // graph-only result, untouched
  }

  std::vector<std::vector<EntityId>> parsed;
  parsed.reserve(replies.size());
  for (const std::string& reply : replies) {
    ParsedPayload payload = parse_answer_payload(reply, resolver_, *vocab_);
    unknown_names_.fetch_add(payload.unknown_names);
    parsed.push_back(std::move(payload.ids));
  }

  AnswerSet retained = likelihood_filter(estimate_confidence(parsed, *vocab_), cfg_.theta);
  if (retained.items.empty()) return t;

  bool evaluate = cfg_.evaluate_at == EvaluateAt::All ||
                  (cfg_.evaluate_at == EvaluateAt::Final && ctx.is_root);
  if (evaluate) {
    std::vector<std::string> names;
    for (const auto& item : retained.items) names.push_back(item.name);
    retained = evaluate_answers(instantiate_question(tmpl, frontier), names, provider_,
                                resolver_, *vocab_);
    if (retained.items.empty()) return t;
  }

  return ctx.kind == NodeKind::Project ? fuse_into_fuzzy(std::move(t), retained, cfg_.alpha)
                                       : fuse_into_fuzzy_complement(std::move(t), retained, cfg_.alpha);
}

NodeHook LlmHook::as_node_hook() const {
  return [this](const NodeContext& ctx, FuzzyVector t) { return (*this)(ctx, std::move(t)); };
}

}  // namespace lqot
