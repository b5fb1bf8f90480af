#include "sciflow/mermaid.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

#include "sciflow/error.hpp"

namespace sciflow {

std::string_view to_string(ShapeHint s) noexcept {
  switch (s) {
    case ShapeHint::rect: return "rect";
    case ShapeHint::rounded: return "rounded";
    case ShapeHint::diamond: return "diamond";
    case ShapeHint::none: return "none";
  }
  return "none";
}

std::string_view to_string(EdgeStyle s) noexcept { return s == EdgeStyle::solid ? "solid" : "dashed"; }

std::optional<ShapeHint> parse_shape_hint(std::string_view s) noexcept {
  for (auto h : {ShapeHint::rect, ShapeHint::rounded, ShapeHint::diamond, ShapeHint::none})
    if (to_string(h) == s) return h;
  return std::nullopt;
}

std::optional<EdgeStyle> parse_edge_style(std::string_view s) noexcept {
  if (s == "solid") return EdgeStyle::solid;
  if (s == "dashed") return EdgeStyle::dashed;
  return std::nullopt;
}

NodeType ShapeTypeMap::operator()(ShapeHint s) const noexcept {
  switch (s) {
    case ShapeHint::rect: return rect;
    case ShapeHint::rounded: return rounded;
    case ShapeHint::diamond: return diamond;
    case ShapeHint::none: return none;
  }
  return none;
}

const IrNode* IrGraph::find(std::string_view id) const noexcept {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const IrNode& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

bool operator==(const IrGraph& a, const IrGraph& b) {
  if (a.direction != b.direction || a.edges != b.edges || a.subgraphs != b.subgraphs) return false;
  if (a.nodes.size() != b.nodes.size()) return false;
  auto sorted = [](std::vector<IrNode> v) {
    std::sort(v.begin(), v.end(), [](const IrNode& x, const IrNode& y) { return x.id < y.id; });
    return v;
  };
  return sorted(a.nodes) == sorted(b.nodes);
}

namespace {

constexpr std::array<std::string_view, 9> kUnsupportedKeywords = {
    "classDef", "class", "style", "linkStyle", "click", "direction", "accTitle", "accDescr", "callback"};
constexpr std::array<std::string_view, 10> kOtherDiagrams = {
    "sequenceDiagram", "classDiagram", "stateDiagram", "stateDiagram-v2", "erDiagram",
    "gantt",           "pie",          "journey",      "gitGraph",        "mindmap"};

bool is_id_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_arrow_char(char c) { return c == '-' || c == '=' || c == '.' || c == '<' || c == '>' || c == '~'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  IrGraph run() {
    std::size_t start = 0;
    std::size_t lineno = 0;
    while (start <= text_.size()) {
      auto nl = text_.find('\n', start);
      if (nl == std::string_view::npos) nl = text_.size();
      auto line = text_.substr(start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++lineno;
      parse_line(line, lineno);
      if (nl == text_.size()) break;
      start = nl + 1;
    }
    if (!header_seen_) throw SyntaxError(1, 1, "missing 'flowchart TD' or 'flowchart LR' header");
    if (open_subgraph_)
      throw SyntaxError(subgraph_line_, subgraph_col_,
                        "unclosed subgraph '" + ir_.subgraphs[*open_subgraph_].label + "' (missing 'end')");
    return std::move(ir_);
  }

 private:
  // Per-line cursor.
  std::string_view line_;
  std::size_t pos_ = 0;
  std::size_t lineno_ = 0;

  [[noreturn]] void fail(std::size_t at, const std::string& msg) const { throw SyntaxError(lineno_, at + 1, msg); }
  [[noreturn]] void unsupported(std::size_t at, const std::string& what) const {
    fail(at, "unsupported construct: " + what);
  }

  void skip_ws() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }
  bool at_end() const { return pos_ >= line_.size(); }
  char peek(std::size_t k = 0) const { return pos_ + k < line_.size() ? line_[pos_ + k] : '\0'; }

  std::string_view read_word() {
    const auto b = pos_;
    while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    return line_.substr(b, pos_ - b);
  }

  void parse_line(std::string_view raw, std::size_t lineno) {
    line_ = raw;
    pos_ = 0;
    lineno_ = lineno;
    skip_ws();
    if (at_end() || line_.substr(pos_).starts_with("%%")) return;
    // Statement terminator.
    auto stop = line_.find_last_not_of(" \t");
    if (line_[stop] == ';') {
      line_ = line_.substr(0, stop);
      stop = line_.find_last_not_of(" \t");
      if (stop == std::string_view::npos || stop < pos_) fail(pos_, "empty statement");
    }
    line_ = line_.substr(0, stop + 1);

    const auto word_at = pos_;
    const auto save = pos_;
    const auto word = read_word();

    if (!header_seen_) {
      if (word == "graph") unsupported(word_at, "'graph' header (use 'flowchart')");
      if (std::find(kOtherDiagrams.begin(), kOtherDiagrams.end(), word) != kOtherDiagrams.end())
        unsupported(word_at, std::string(word));
      if (word != "flowchart") fail(word_at, "expected 'flowchart TD' or 'flowchart LR' header");
      skip_ws();
      const auto dir_at = pos_;
      const auto dir = read_word();
      if (dir.empty()) fail(dir_at, "missing flowchart direction (TD or LR)");
      if (dir == "TD") ir_.direction = IrDirection::top_down;
      else if (dir == "LR") ir_.direction = IrDirection::left_right;
      else if (dir == "TB" || dir == "BT" || dir == "RL") unsupported(dir_at, "flowchart direction '" + std::string(dir) + "'");
      else fail(dir_at, "invalid flowchart direction '" + std::string(dir) + "'");
      skip_ws();
      if (!at_end()) fail(pos_, "unexpected text after flowchart header");
      header_seen_ = true;
      return;
    }

    if (word == "flowchart" || word == "graph") fail(word_at, "duplicate diagram header");
    if (word == "subgraph") {
      if (open_subgraph_) unsupported(word_at, "nested subgraph");
      skip_ws();
      const auto label = line_.substr(pos_);
      if (label.empty()) fail(pos_, "subgraph requires a label");
      open_subgraph_ = ir_.subgraphs.size();
      subgraph_line_ = lineno_;
      subgraph_col_ = word_at + 1;
      ir_.subgraphs.push_back(IrSubgraph{std::string(label), {}});
      return;
    }
    if (word == "end") {
      skip_ws();
      if (!at_end()) fail(pos_, "unexpected text after 'end'");
      if (!open_subgraph_) fail(word_at, "'end' without a matching 'subgraph'");
      open_subgraph_.reset();
      return;
    }
    for (auto kw : kUnsupportedKeywords)
      if (word == kw) unsupported(word_at, std::string(kw));

    pos_ = save;
    parse_statement();
  }

  struct Ref {
    std::string id;
    std::optional<std::pair<std::string, ShapeHint>> decl;
    std::size_t col;
  };

  Ref parse_node_ref() {
    Ref ref;
    ref.col = pos_;
    while (!at_end() && is_id_char(peek())) ++pos_;
    if (pos_ == ref.col) {
      if (at_end()) fail(pos_, "expected a node identifier");
      fail(pos_, std::string("expected a node identifier, found '") + peek() + "'");
    }
    ref.id = std::string(line_.substr(ref.col, pos_ - ref.col));

    const char open = peek();
    if (open != '[' && open != '(' && open != '{') {
      if (open == '>') unsupported(pos_, "asymmetric node shape '>'");
      return ref;
    }
    const char second = peek(1);
    if ((open == '[' && (second == '[' || second == '(' || second == '/' || second == '\\')) ||
        (open == '(' && (second == '(' || second == '[')) || (open == '{' && second == '{'))
      unsupported(pos_, std::string("node shape '") + open + second + "'");

    const char close = open == '[' ? ']' : open == '(' ? ')' : '}';
    const ShapeHint shape = open == '[' ? ShapeHint::rect : open == '(' ? ShapeHint::rounded : ShapeHint::diamond;
    const auto open_at = pos_;
    ++pos_;
    std::string label;
    if (peek() == '"') {
      const auto quote_at = pos_;
      ++pos_;
      const auto endq = line_.find('"', pos_);
      if (endq == std::string_view::npos) fail(quote_at, "unterminated quoted label");
      label = std::string(line_.substr(pos_, endq - pos_));
      pos_ = endq + 1;
      if (peek() != close) fail(pos_, std::string("expected '") + close + "' after quoted label");
      ++pos_;
    } else {
      const auto b = pos_;
      while (!at_end() && peek() != close) {
        const char c = peek();
        if (c == '[' || c == ']' || c == '(' || c == ')' || c == '{' || c == '}' || c == '"' || c == '|')
          fail(pos_, std::string("unexpected '") + c + "' in label (quote the label)");
        ++pos_;
      }
      if (at_end()) fail(open_at, std::string("unterminated label, expected '") + close + "'");
      auto raw = line_.substr(b, pos_ - b);
      const auto first = raw.find_first_not_of(" \t");
      const auto last = raw.find_last_not_of(" \t");
      label = first == std::string_view::npos ? std::string() : std::string(raw.substr(first, last - first + 1));
      ++pos_;
    }
    ref.decl = std::make_pair(std::move(label), shape);
    return ref;
  }

  void declare(const Ref& ref) {
    auto it = index_.find(ref.id);
    if (it == index_.end()) {
      IrNode n{ref.id, ref.id, ShapeHint::none};
      if (ref.decl) {
        n.label = ref.decl->first;
        n.shape = ref.decl->second;
        explicit_.insert(ref.id);
      }
      index_[ref.id] = ir_.nodes.size();
      ir_.nodes.push_back(std::move(n));
    } else if (ref.decl) {
      auto& n = ir_.nodes[it->second];
      if (explicit_.count(ref.id)) {
        if (n.label != ref.decl->first || n.shape != ref.decl->second)
          fail(ref.col, "conflicting redeclaration of node '" + ref.id + "'");
      } else {
        n.label = ref.decl->first;
        n.shape = ref.decl->second;
        explicit_.insert(ref.id);
      }
    }
    if (open_subgraph_) {
      auto& members = ir_.subgraphs[*open_subgraph_].members;
      if (std::find(members.begin(), members.end(), ref.id) == members.end()) members.push_back(ref.id);
    }
  }

  std::optional<EdgeStyle> parse_arrow() {
    const auto b = pos_;
    while (!at_end() && is_arrow_char(peek())) ++pos_;
    const auto op = line_.substr(b, pos_ - b);
    if (op.empty()) return std::nullopt;
    std::optional<EdgeStyle> style;
    if (op == "-->") style = EdgeStyle::solid;
    else if (op == "-.->") style = EdgeStyle::dashed;
    else unsupported(b, "edge operator '" + std::string(op) + "'");
    if (peek() == '|') unsupported(pos_, "edge label");
    return style;
  }

  void parse_statement() {
    const Ref src = parse_node_ref();
    skip_ws();
    if (at_end()) {
      declare(src);
      return;
    }
    if (peek() == '&') unsupported(pos_, "'&' node list");
    const auto arrow_at = pos_;
    const auto style = parse_arrow();
    if (!style) fail(pos_, std::string("unexpected '") + peek() + "'");
    skip_ws();
    if (at_end()) fail(arrow_at, "edge is missing its target node");
    const Ref dst = parse_node_ref();
    skip_ws();
    if (!at_end()) {
      if (is_arrow_char(peek())) unsupported(pos_, "edge chain");
      if (peek() == '&') unsupported(pos_, "'&' node list");
      fail(pos_, std::string("unexpected '") + peek() + "' after edge");
    }
    declare(src);
    declare(dst);
    ir_.edges.push_back(IrEdge{src.id, dst.id, *style});
  }

  std::string_view text_;
  IrGraph ir_;
  bool header_seen_ = false;
  std::optional<std::size_t> open_subgraph_;
  std::size_t subgraph_line_ = 0, subgraph_col_ = 0;
  std::map<std::string, std::size_t> index_;
  std::set<std::string> explicit_;
};

bool needs_quotes(std::string_view label) {
  if (label.empty()) return false;
  if (label.front() == ' ' || label.back() == ' ' || label.front() == '\t' || label.back() == '\t') return true;
  return label.find_first_of("[](){}|") != std::string_view::npos;
}

bool expressible_id(std::string_view id) {
  if (id.empty() || !std::all_of(id.begin(), id.end(), is_id_char)) return false;
  if (id == "end" || id == "subgraph" || id == "flowchart" || id == "graph") return false;
  return std::find(kUnsupportedKeywords.begin(), kUnsupportedKeywords.end(), id) == kUnsupportedKeywords.end();
}

std::string declaration(const IrNode& n) {
  if (!expressible_id(n.id)) throw ContractError("node id '" + n.id + "' cannot be expressed in the Mermaid subset");
  if (n.shape == ShapeHint::none) {
    if (n.label != n.id) throw ContractError("bare node '" + n.id + "' must have its id as label");
    return n.id;
  }
  if (n.label.find_first_of("\"\n\r") != std::string::npos)
    throw ContractError("label of node '" + n.id + "' cannot be expressed in the Mermaid subset");
  const char open = n.shape == ShapeHint::rect ? '[' : n.shape == ShapeHint::rounded ? '(' : '{';
  const char close = n.shape == ShapeHint::rect ? ']' : n.shape == ShapeHint::rounded ? ')' : '}';
  std::string out = n.id;
  out += open;
  if (needs_quotes(n.label)) out += '"' + n.label + '"';
  else out += n.label;
  out += close;
  return out;
}

}  // namespace

IrGraph parse_mermaid(std::string_view text) { return Parser(text).run(); }

std::string emit_mermaid(const IrGraph& ir) {
  std::string out = ir.direction == IrDirection::top_down ? "flowchart TD\n" : "flowchart LR\n";
  std::set<std::string> declared;
  auto decl_or_ref = [&](const std::string& id) {
    const IrNode* n = ir.find(id);
    if (!n) throw ContractError("subgraph member '" + id + "' is not a declared node");
    if (declared.insert(id).second) return declaration(*n);
    return id;
  };
  for (const auto& sg : ir.subgraphs) {
    if (sg.label.empty() || sg.label.find_first_of("\n\r") != std::string::npos ||
        std::string_view(" \t").find(sg.label.front()) != std::string_view::npos ||
        std::string_view(" \t;").find(sg.label.back()) != std::string_view::npos)
      throw ContractError("subgraph label '" + sg.label + "' cannot be expressed in the Mermaid subset");
    out += "subgraph " + sg.label + "\n";
    for (const auto& m : sg.members) out += "    " + decl_or_ref(m) + "\n";
    out += "end\n";
  }
  for (const auto& n : ir.nodes)
    if (declared.insert(n.id).second) out += declaration(n) + "\n";
  for (const auto& e : ir.edges) {
    if (!ir.find(e.source) || !ir.find(e.target)) throw ContractError("edge references an undeclared node");
    out += e.source + (e.style == EdgeStyle::solid ? " --> " : " -.-> ") + e.target + "\n";
  }
  return out;
}

}  // namespace sciflow
