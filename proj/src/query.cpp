#include "lqot/query.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "lqot/util.hpp"

namespace lqot {

QueryNode QueryNode::anchor(EntityId e) {
  QueryNode n;
  n.kind = NodeKind::Anchor;
  n.entity = e;
  return n;
}

QueryNode QueryNode::project(RelationId r, QueryNode child) {
  QueryNode n;
  n.kind = NodeKind::Project;
  n.relation = r;
  n.children.push_back(std::move(child));
  return n;
}

QueryNode QueryNode::neg_project(RelationId r, QueryNode child) {
  QueryNode n;
  n.kind = NodeKind::NegProject;
  n.relation = r;
  n.children.push_back(std::move(child));
  return n;
}

QueryNode QueryNode::intersect(std::vector<QueryNode> children) {
  QueryNode n;
  n.kind = NodeKind::Intersect;
  n.children = std::move(children);
  return n;
}

QueryNode QueryNode::set_union(std::vector<QueryNode> children) {
  QueryNode n;
  n.kind = NodeKind::Union;
  n.children = std::move(children);
  return n;
}

QueryNode QueryNode::complement(QueryNode child) {
  QueryNode n;
  n.kind = NodeKind::Complement;
  n.children.push_back(std::move(child));
  return n;
}

namespace {

struct Token {
  enum Kind { LParen, RParen, Quoted, Bare, End } kind;
  std::string text;
  std::size_t position;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Token::End, "", start};
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      return {Token::LParen, "(", start};
    }
    if (c == ')') {
      ++pos_;
      return {Token::RParen, ")", start};
    }
    if (c == '"') {
      ++pos_;
      std::string text;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        if (src_[pos_] == '\\') {
          ++pos_;
          if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\\'))
            throw QueryParseError("invalid escape in quoted name", pos_);
        }
        text.push_back(src_[pos_++]);
      }
      if (pos_ >= src_.size()) throw QueryParseError("unterminated quoted name", start);
      ++pos_;  // closing quote
      return {Token::Quoted, std::move(text), start};
    }
    std::string text;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
           src_[pos_] != '(' && src_[pos_] != ')' && src_[pos_] != '"') {
      text.push_back(src_[pos_++]);
    }
    return {Token::Bare, std::move(text), start};
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view src, const Vocab& vocab) : lexer_(src), vocab_(vocab) { advance(); }

  QueryNode parse() {
    QueryNode tree = node();
    if (current_.kind != Token::End)
      throw QueryParseError("trailing input after query", current_.position);
    return tree;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  QueryNode node() {
    if (current_.kind == Token::Quoted) {
      auto id = vocab_.entity_id(current_.text);
      if (!id)
        throw QueryParseError("unknown entity '" + current_.text + "'", current_.position);
      advance();
      return QueryNode::anchor(*id);
    }
    if (current_.kind != Token::LParen)
      throw QueryParseError("expected '(' or quoted entity", current_.position);
    advance();
    if (current_.kind != Token::Bare)
      throw QueryParseError("expected operator p, np, n, i or u", current_.position);
    std::string op = current_.text;
    std::size_t op_pos = current_.position;
    advance();

    QueryNode result;
    if (op == "p" || op == "np") {
      RelationId r = relation();
      QueryNode child = node();
      result = op == "p" ? QueryNode::project(r, std::move(child))
                         : QueryNode::neg_project(r, std::move(child));
    } else if (op == "n") {
      result = QueryNode::complement(node());
    } else if (op == "i" || op == "u") {
      std::vector<QueryNode> children;
      while (current_.kind == Token::LParen || current_.kind == Token::Quoted)
        children.push_back(node());
      if (children.size() < 2)
        throw QueryParseError("operator '" + op + "' needs at least 2 arguments", op_pos);
      result = op == "i" ? QueryNode::intersect(std::move(children))
                         : QueryNode::set_union(std::move(children));
    } else {
      throw QueryParseError("unknown operator '" + op + "'", op_pos);
    }

    if (current_.kind != Token::RParen)
      throw QueryParseError("expected ')'", current_.position);
    advance();
    return result;
  }

  RelationId relation() {
    if (current_.kind != Token::Bare && current_.kind != Token::Quoted)
      throw QueryParseError("expected relation name", current_.position);
    auto id = vocab_.relation_id(current_.text);
    if (!id)
      throw QueryParseError("unknown relation '" + current_.text + "'", current_.position);
    advance();
    return *id;
  }

  Lexer lexer_;
  const Vocab& vocab_;
  Token current_;
};

std::string quote_name(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

bool needs_quoting(const std::string& name) {
  if (name.empty()) return true;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '"' ||
        c == '\\')
      return true;
  }
  return false;
}

void render_node(const QueryNode& n, const Vocab& vocab, std::string& out) {
  switch (n.kind) {
    case NodeKind::Anchor:
      out += quote_name(vocab.entity_name(n.entity));
      return;
    case NodeKind::Project:
    case NodeKind::NegProject: {
      out += n.kind == NodeKind::Project ? "(p " : "(np ";
      const std::string& rel = vocab.relation_name(n.relation);
      out += needs_quoting(rel) ? quote_name(rel) : rel;
      out += ' ';
      render_node(n.children[0], vocab, out);
      out += ')';
      return;
    }
    case NodeKind::Complement:
      out += "(n ";
      render_node(n.children[0], vocab, out);
      out += ')';
      return;
    case NodeKind::Intersect:
    case NodeKind::Union:
      out += n.kind == NodeKind::Intersect ? "(i" : "(u";
      for (const QueryNode& c : n.children) {
        out += ' ';
        render_node(c, vocab, out);
      }
      out += ')';
      return;
  }
}

void validate_node(const QueryNode& n, const Vocab& vocab) {
  switch (n.kind) {
    case NodeKind::Anchor:
      if (!n.children.empty()) throw std::invalid_argument("anchor must be a leaf");
      if (n.entity < 0 || static_cast<std::size_t>(n.entity) >= vocab.num_entities())
        throw std::invalid_argument("anchor entity id out of range");
      return;
    case NodeKind::Project:
    case NodeKind::NegProject:
      if (n.children.size() != 1) throw std::invalid_argument("projection must have one child");
      if (n.relation < 0 || static_cast<std::size_t>(n.relation) >= vocab.num_relations())
        throw std::invalid_argument("projection relation id out of range");
      break;
    case NodeKind::Complement:
      if (n.children.size() != 1) throw std::invalid_argument("complement must have one child");
      break;
    case NodeKind::Intersect:
    case NodeKind::Union:
      if (n.children.size() < 2)
        throw std::invalid_argument("intersection and union need at least 2 children");
      break;
  }
  for (const QueryNode& c : n.children) validate_node(c, vocab);
}

// Mask-based set evaluation, one bit per entity.
std::vector<char> traverse_mask(const KnowledgeGraph& kg, const QueryNode& n) {
  std::size_t size = kg.num_entities();
  std::vector<char> mask(size, 0);
  switch (n.kind) {
    case NodeKind::Anchor:
      mask[static_cast<std::size_t>(n.entity)] = 1;
      return mask;
    case NodeKind::Project:
    case NodeKind::NegProject: {
      std::vector<char> child = traverse_mask(kg, n.children[0]);
      for (std::size_t i = 0; i < size; ++i) {
        if (!child[i]) continue;
        for (EntityId t : kg.neighbors(static_cast<EntityId>(i), n.relation))
          mask[static_cast<std::size_t>(t)] = 1;
      }
      if (n.kind == NodeKind::NegProject)
        for (auto& b : mask) b = static_cast<char>(!b);
      return mask;
    }
    case NodeKind::Complement: {
      mask = traverse_mask(kg, n.children[0]);
      for (auto& b : mask) b = static_cast<char>(!b);
      return mask;
    }
    case NodeKind::Intersect: {
      mask = traverse_mask(kg, n.children[0]);
      for (std::size_t c = 1; c < n.children.size(); ++c) {
        std::vector<char> other = traverse_mask(kg, n.children[c]);
        for (std::size_t i = 0; i < size; ++i) mask[i] = static_cast<char>(mask[i] && other[i]);
      }
      return mask;
    }
    case NodeKind::Union: {
      mask = traverse_mask(kg, n.children[0]);
      for (std::size_t c = 1; c < n.children.size(); ++c) {
        std::vector<char> other = traverse_mask(kg, n.children[c]);
        for (std::size_t i = 0; i < size; ++i) mask[i] = static_cast<char>(mask[i] || other[i]);
      }
      return mask;
    }
  }
  return mask;
}

}  // namespace

QueryNode parse_query(std::string_view text, const Vocab& vocab) {
  Parser parser(text, vocab);
  QueryNode tree = parser.parse();
  validate_query(tree, vocab);
  return tree;
}

std::string render_query(const QueryNode& tree, const Vocab& vocab) {
  std::string out;
  render_node(tree, vocab, out);
  return out;
}

void validate_query(const QueryNode& tree, const Vocab& vocab) { validate_node(tree, vocab); }

std::vector<EntityId> traverse_answers(const KnowledgeGraph& kg, const QueryNode& tree) {
  validate_query(tree, kg.vocab());
  std::vector<char> mask = traverse_mask(kg, tree);
  std::vector<EntityId> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(static_cast<EntityId>(i));
  return out;
}

const char* shape_name(QueryShape s) {
  switch (s) {
    case QueryShape::OneP: return "1p";
    case QueryShape::TwoP: return "2p";
    case QueryShape::ThreeP: return "3p";
    case QueryShape::TwoI: return "2i";
    case QueryShape::TwoU: return "2u";
    case QueryShape::Pin: return "pin";
  }
  return "?";
}

QueryShape parse_shape(std::string_view name) {
  for (QueryShape s : kAllShapes)
    if (name == shape_name(s)) return s;
  throw std::invalid_argument("unknown query shape '" + std::string(name) + "'");
}

namespace {

// Uniform triple; the graph is guaranteed non-empty by construction.
const Triple& random_triple(const KnowledgeGraph& kg, Rng& rng) {
  return kg.triples()[static_cast<std::size_t>(rng.next_index(kg.triples().size()))];
}

// Extends a walk from `from` by one edge; returns false when `from` has no
// outgoing edges at all.
bool random_step(const KnowledgeGraph& kg, Rng& rng, EntityId from, RelationId& r_out,
                 EntityId& to_out) {
  // Collect (relation, tail) options lazily; desk-scale graphs keep this cheap.
  std::vector<std::pair<RelationId, EntityId>> options;
  for (std::size_t r = 0; r < kg.num_relations(); ++r) {
    for (EntityId t : kg.neighbors(from, static_cast<RelationId>(r)))
      options.emplace_back(static_cast<RelationId>(r), t);
  }
  if (options.empty()) return false;
  auto [r, t] = options[static_cast<std::size_t>(rng.next_index(options.size()))];
  r_out = r;
  to_out = t;
  return true;
}

QueryNode build_candidate(const KnowledgeGraph& kg, QueryShape shape, Rng& rng, bool& ok) {
  ok = true;
  switch (shape) {
    case QueryShape::OneP: {
      const Triple& t = random_triple(kg, rng);
      return QueryNode::project(t.relation, QueryNode::anchor(t.head));
    }
    case QueryShape::TwoP:
    case QueryShape::ThreeP: {
      int hops = shape == QueryShape::TwoP ? 2 : 3;
      const Triple& first = random_triple(kg, rng);
      QueryNode node = QueryNode::project(first.relation, QueryNode::anchor(first.head));
      EntityId at = first.tail;
      for (int h = 1; h < hops; ++h) {
        RelationId r;
        EntityId next;
        if (!random_step(kg, rng, at, r, next)) {
          ok = false;
          return node;
        }
        node = QueryNode::project(r, std::move(node));
        at = next;
      }
      return node;
    }
    case QueryShape::TwoI: {
      // Partner search instead of rejection: independent draws would almost
      // never share a tail on sparse graphs.
      const Triple& a = random_triple(kg, rng);
      std::vector<const Triple*> partners;
      for (const Triple& b : kg.triples())
        if (b.tail == a.tail && !(b.head == a.head && b.relation == a.relation))
          partners.push_back(&b);
      if (partners.empty()) {
        ok = false;
        return QueryNode::anchor(0);
      }
      const Triple& b = *partners[static_cast<std::size_t>(rng.next_index(partners.size()))];
      return QueryNode::intersect(
          {QueryNode::project(a.relation, QueryNode::anchor(a.head)),
           QueryNode::project(b.relation, QueryNode::anchor(b.head))});
    }
    case QueryShape::TwoU: {
      const Triple& a = random_triple(kg, rng);
      const Triple& b = random_triple(kg, rng);
      if (a.head == b.head && a.relation == b.relation) {
        ok = false;
        return QueryNode::anchor(0);
      }
      return QueryNode::set_union(
          {QueryNode::project(a.relation, QueryNode::anchor(a.head)),
           QueryNode::project(b.relation, QueryNode::anchor(b.head))});
    }
    case QueryShape::Pin: {
      // Positive 2-hop chain intersected with an edge negation.
      const Triple& first = random_triple(kg, rng);
      RelationId r2;
      EntityId end;
      if (!random_step(kg, rng, first.tail, r2, end)) {
        ok = false;
        return QueryNode::anchor(0);
      }
      const Triple& neg = random_triple(kg, rng);
      QueryNode chain = QueryNode::project(
          r2, QueryNode::project(first.relation, QueryNode::anchor(first.head)));
      QueryNode negated = QueryNode::neg_project(neg.relation, QueryNode::anchor(neg.head));
      return QueryNode::intersect({std::move(chain), std::move(negated)});
    }
  }
  ok = false;
  return QueryNode::anchor(0);
}

}  // namespace

SampledQuery sample_query(const KnowledgeGraph& kg, QueryShape shape, std::uint64_t seed,
                          int max_retries) {
  Rng rng(seed);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    bool ok = false;
    QueryNode tree = build_candidate(kg, shape, rng, ok);
    if (!ok) continue;
    std::vector<EntityId> gold = traverse_answers(kg, tree);
    if (gold.empty()) continue;
    return SampledQuery{std::move(tree), std::move(gold)};
  }
  throw std::runtime_error(std::string("sample_query: no satisfiable '") + shape_name(shape) +
                           "' query found after " + std::to_string(max_retries) + " attempts");
}

std::vector<WorkloadRecord> load_workload(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_workload: cannot open " + path);
  std::vector<WorkloadRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 3)
      throw std::runtime_error("load_workload: " + path + ":" + std::to_string(line_no) +
                               ": expected 3 tab-separated fields");
    WorkloadRecord rec;
    rec.query = fields[0];
    rec.question = fields[1];
    for (const std::string& name : split(fields[2], ','))
      if (!name.empty()) rec.gold_names.push_back(name);
    records.push_back(std::move(rec));
  }
  return records;
}

void save_workload(const std::vector<WorkloadRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_workload: cannot open " + path + " for writing");
  for (const WorkloadRecord& rec : records) {
    out << rec.query << '\t' << rec.question << '\t';
    for (std::size_t i = 0; i < rec.gold_names.size(); ++i) {
      if (i > 0) out << ',';
      out << rec.gold_names[i];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_workload: write failed for " + path);
}

}  // namespace lqot
