#include "srcvul/source_model.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>

#include "srcvul/lexer.hpp"

namespace srcvul {

std::string_view to_string(OccurrenceKind kind) {
  switch (kind) {
    case OccurrenceKind::definition:
      return "definition";
    case OccurrenceKind::use:
      return "use";
    case OccurrenceKind::pointer_assignment:
      return "pointer-assignment";
    case OccurrenceKind::call_argument:
      return "call-argument";
  }
  return "unknown";
}

const FunctionUnit* SourceUnit::function_at(int line) const {
  for (const auto& f : functions) {
    if (line >= f.start_line && line <= f.end_line) return &f;
  }
  return nullptr;
}

const FunctionUnit* SourceUnit::find_function(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

using Tokens = std::vector<Token>;

bool is_open(const Token& t) { return t.is("(") || t.is("[") || t.is("{"); }
bool is_close(const Token& t) { return t.is(")") || t.is("]") || t.is("}"); }

bool is_assignment_op(const Token& t) {
  static const std::unordered_set<std::string_view> ops = {"=",  "+=", "-=", "*=", "/=",  "%=",
                                                           "&=", "|=", "^=", "<<=", ">>="};
  return t.kind == TokenKind::punct && ops.contains(t.text);
}

// Words that take a parenthesized argument without being calls.
bool is_opaque_operator(std::string_view w) {
  return w == "sizeof" || w == "typeof" || w == "__typeof__" || w == "__typeof" || w == "alignof" ||
         w == "_Alignof" || w == "decltype" || w == "offsetof" || w == "__builtin_offsetof";
}

bool is_attribute_word(std::string_view w) {
  return w == "__attribute__" || w == "__declspec" || w == "noexcept" || w == "throw" ||
         w == "decltype" || w == "alignas" || w == "_Alignas" || w == "__asm__" || w == "asm";
}

// Builtin type names: seeing one means the declaration's type is complete
// enough that a following identifier is the declarator, not a typedef name.
bool is_builtin_type(std::string_view w) {
  static const std::unordered_set<std::string_view> b = {
      "void",   "char",     "short",    "int",      "long",    "float",   "double",
      "signed", "unsigned", "bool",     "_Bool",    "wchar_t", "char8_t", "char16_t",
      "char32_t", "auto",   "_Complex"};
  return b.contains(w);
}

// Index of the token closing the group opened at `open`, or `end` when the
// group is unbalanced.
std::size_t match_close(const Tokens& t, std::size_t open, std::size_t end) {
  const std::string_view o = t[open].text;
  const std::string_view c = o == "(" ? ")" : o == "[" ? "]" : "}";
  int depth = 0;
  for (std::size_t i = open; i < end; ++i) {
    if (t[i].text == o) {
      ++depth;
    } else if (t[i].text == c) {
      if (--depth == 0) return i;
    }
  }
  return end;
}

struct FunctionHeader {
  std::string name;
  std::size_t start_idx = 0;
  std::size_t params_open = 0;
  std::size_t params_close = 0;
};

// Decides whether tokens [begin, brace) form a function definition header.
std::optional<FunctionHeader> find_function_header(const Tokens& t, std::size_t begin,
                                                   std::size_t brace) {
  if (begin >= brace) return std::nullopt;
  std::size_t end = brace;
  int depth = 0;
  for (std::size_t i = begin; i < brace; ++i) {
    if (t[i].is("(") || t[i].is("[")) ++depth;
    if (t[i].is(")") || t[i].is("]")) --depth;
    if (depth != 0) continue;
    if (t[i].is("=")) return std::nullopt;  // initializer
    // Constructor initializer list.
    if (t[i].is(":") && i > begin && t[i - 1].is(")")) {
      end = i;
      break;
    }
  }
  std::optional<FunctionHeader> best;
  depth = 0;
  for (std::size_t i = begin; i < end; ++i) {
    if (!t[i].is("(")) continue;
    const std::size_t close = match_close(t, i, end);
    if (close == end) return std::nullopt;
    if (i > begin && t[i - 1].is_identifier() && !is_attribute_word(t[i - 1].text) &&
        !is_keyword(t[i - 1].text)) {
      FunctionHeader h;
      h.name = t[i - 1].text;
      // Qualified names: ns::Class::method, Class::~Class.
      std::size_t k = i - 1;
      if (k >= begin + 1 && t[k - 1].is("~")) {
        h.name = "~" + h.name;
        --k;
      }
      while (k >= begin + 2 && t[k - 1].is("::") && t[k - 2].is_identifier()) {
        h.name = t[k - 2].text + "::" + h.name;
        k -= 2;
      }
      h.start_idx = begin;
      h.params_open = i;
      h.params_close = close;
      best = h;
    }
    i = close;
  }
  return best;
}

class BodyAnalyzer {
 public:
  BodyAnalyzer(const Tokens& t, FunctionUnit& fn, const std::set<std::string>& unit_functions)
      : t_(t), fn_(fn), unit_functions_(unit_functions) {}

  void parse_params(std::size_t open, std::size_t close) {
    std::size_t seg = open + 1;
    int depth = 0;
    for (std::size_t i = open + 1; i <= close; ++i) {
      if (i < close && (is_open(t_[i]))) ++depth;
      if (i < close && (is_close(t_[i]))) --depth;
      if (i == close || (depth == 0 && t_[i].is(","))) {
        parameter(seg, i);
        seg = i + 1;
      }
    }
  }

  void parse_body(std::size_t begin, std::size_t end) {
    // The first pass only learns which names are declared locally, so that
    // uses preceding a declaration in token order are classified correctly.
    collecting_ = true;
    sequence(begin, end);
    collecting_ = false;
    sequence(begin, end);
    std::sort(fn_.variable_occurrences.begin(), fn_.variable_occurrences.end());
    fn_.variable_occurrences.erase(
        std::unique(fn_.variable_occurrences.begin(), fn_.variable_occurrences.end()),
        fn_.variable_occurrences.end());
    std::sort(fn_.dependencies.begin(), fn_.dependencies.end());
    fn_.dependencies.erase(std::unique(fn_.dependencies.begin(), fn_.dependencies.end()),
                           fn_.dependencies.end());
  }

 private:
  struct Frame {
    enum Kind { group, call, opaque } kind = group;
    std::string target;
    bool indirect = false;
    int position = 1;
  };

  // ---- emission -------------------------------------------------------

  void emit(VarOccurrence occ) {
    if (collecting_) return;
    fn_.variable_occurrences.push_back(std::move(occ));
  }

  void emit_simple(const Token& tok, OccurrenceKind kind) {
    VarOccurrence o;
    o.name = tok.text;
    o.line = tok.line;
    o.kind = kind;
    emit(std::move(o));
  }

  void emit_pointer(const Token& tok, const std::string& pointee) {
    VarOccurrence o;
    o.name = tok.text;
    o.line = tok.line;
    o.kind = OccurrenceKind::pointer_assignment;
    o.pointee = pointee;
    emit(std::move(o));
  }

  void depend(int line, const std::string& source, const std::string& target) {
    if (collecting_ || source == target) return;
    fn_.dependencies.push_back({line, source, target});
  }

  void declare(const std::string& name, bool pointer) {
    declared_.insert(name);
    if (pointer) pointers_.insert(name);
  }

  bool is_variable_name(const Token& tok) const {
    if (!tok.is_identifier() || is_keyword(tok.text)) return false;
    if (declared_.contains(tok.text)) return true;
    if (is_macro_like(tok.text)) return false;
    return !unit_functions_.contains(tok.text);
  }

  // ---- parameters ------------------------------------------------------

  void parameter(std::size_t b, std::size_t e) {
    if (b >= e) return;
    // Default arguments are not part of the declarator.
    for (std::size_t i = b; i < e; ++i) {
      if (t_[i].is("=")) {
        e = i;
        break;
      }
    }
    if (e - b == 1) return;  // void, ..., or an unnamed typedef'd parameter
    // Function-pointer parameter: ( * name ) ( ... )
    for (std::size_t i = b; i + 2 < e; ++i) {
      if (t_[i].is("(") && t_[i + 1].is("*")) {
        std::size_t k = i + 1;
        while (k < e && t_[k].is("*")) ++k;
        if (k < e && t_[k].is_identifier()) {
          add_parameter(t_[k], true);
          return;
        }
      }
    }
    bool pointer = false;
    const Token* name = nullptr;
    int depth = 0;
    for (std::size_t i = b; i < e; ++i) {
      if (t_[i].is("[") || t_[i].is("(")) {
        ++depth;
        pointer = true;
      }
      if (t_[i].is("]") || t_[i].is(")")) --depth;
      if (t_[i].is("*") || t_[i].is("&") || t_[i].is("&&")) pointer = true;
      if (depth == 0 && t_[i].is_identifier() && !is_keyword(t_[i].text)) name = &t_[i];
    }
    if (name != nullptr) add_parameter(*name, pointer);
  }

  void add_parameter(const Token& name, bool pointer) {
    fn_.parameters.push_back(name.text);
    declare(name.text, pointer);
    emit_simple(name, OccurrenceKind::definition);
  }

  // ---- statements -------------------------------------------------------

  void sequence(std::size_t b, std::size_t e) {
    std::size_t i = b;
    while (i < e) {
      const std::size_t next = statement(i, e);
      i = next > i ? next : i + 1;
    }
  }

  std::size_t skip_to(std::size_t i, std::size_t e, std::string_view what) const {
    int depth = 0;
    for (; i < e; ++i) {
      if (is_open(t_[i])) ++depth;
      if (is_close(t_[i])) --depth;
      if (depth <= 0 && t_[i].is(what)) return i;
    }
    return e;
  }

  std::size_t statement(std::size_t i, std::size_t e) {
    const Token& tok = t_[i];
    if (tok.is("{") || tok.is("}") || tok.is(";")) return i + 1;
    if (tok.is_identifier()) {
      const std::string& w = tok.text;
      if (w == "if" || w == "while" || w == "switch") {
        if (i + 1 < e && t_[i + 1].is("(")) {
          const std::size_t close = match_close(t_, i + 1, e);
          expression(i + 2, close, nullptr);
          return close + 1;
        }
        return i + 1;
      }
      if (w == "for") return for_statement(i, e);
      if (w == "do" || w == "else" || w == "try") return i + 1;
      if (w == "return" || w == "co_return") {
        const std::size_t end = skip_to(i + 1, e, ";");
        expression(i + 1, end, nullptr);
        return end + 1;
      }
      if (w == "case") return skip_to(i + 1, e, ":") + 1;
      if (w == "default" && i + 1 < e && t_[i + 1].is(":")) return i + 2;
      if (w == "goto" || w == "break" || w == "continue" || w == "typedef" || w == "asm" ||
          w == "__asm__" || w == "static_assert" || w == "_Static_assert") {
        return skip_to(i + 1, e, ";") + 1;
      }
      if (!is_keyword(w) && i + 1 < e && t_[i + 1].is(":")) return i + 2;  // label
      if ((w == "struct" || w == "union" || w == "enum" || w == "class") && i + 1 < e) {
        std::size_t k = i + 1;
        if (k < e && t_[k].is_identifier()) ++k;
        if (k < e && t_[k].is("{")) {  // local type definition
          const std::size_t close = match_close(t_, k, e);
          return skip_to(close, e, ";") + 1;
        }
      }
    }
    const std::size_t end = simple_statement_end(i, e);
    simple_statement(i, end);
    return end < e && t_[end].is(";") ? end + 1 : end;
  }

  // End of an expression or declaration statement starting at `i`. Stops at
  // `;`, at a block brace, or after a call-like header directly followed by
  // another statement (iteration macros such as list_for_each_entry(...)).
  std::size_t simple_statement_end(std::size_t i, std::size_t e) const {
    std::vector<std::size_t> opens;
    for (std::size_t j = i; j < e; ++j) {
      const Token& tok = t_[j];
      if (tok.is("(") || tok.is("[")) {
        opens.push_back(j);
        continue;
      }
      if (tok.is(")") || tok.is("]")) {
        if (opens.empty()) return j;
        const std::size_t open = opens.back();
        opens.pop_back();
        if (opens.empty() && tok.is(")") && open > i && t_[open - 1].is_identifier() &&
            !is_keyword(t_[open - 1].text) && j + 1 < e) {
          const Token& next = t_[j + 1];
          if (next.is("{") || (next.is_identifier() && next.text != "const")) return j + 1;
        }
        continue;
      }
      if (!opens.empty()) continue;
      if (tok.is(";") || tok.is("}")) return j;
      if (tok.is("{")) {
        if (j > i && (t_[j - 1].is("=") || t_[j - 1].is(",") || t_[j - 1].is("return"))) {
          j = match_close(t_, j, e);
          continue;
        }
        return j;
      }
    }
    return e;
  }

  std::size_t for_statement(std::size_t i, std::size_t e) {
    if (i + 1 >= e || !t_[i + 1].is("(")) return i + 1;
    const std::size_t open = i + 1;
    const std::size_t close = match_close(t_, open, e);
    std::vector<std::size_t> semis;
    int depth = 0;
    for (std::size_t k = open + 1; k < close; ++k) {
      if (is_open(t_[k])) ++depth;
      if (is_close(t_[k])) --depth;
      if (depth == 0 && t_[k].is(";")) semis.push_back(k);
    }
    if (semis.size() >= 2) {
      simple_statement(open + 1, semis[0]);
      expression(semis[0] + 1, semis[1], nullptr);
      expression_statement(semis[1] + 1, close);
      return close + 1;
    }
    // Range-based for: decl : range.
    for (std::size_t k = open + 1; k < close; ++k) {
      if (t_[k].is(":")) {
        std::vector<std::string> sources;
        expression(k + 1, close, &sources);
        declaration(open + 1, k, &sources);
        return close + 1;
      }
    }
    expression(open + 1, close, nullptr);
    return close + 1;
  }

  void simple_statement(std::size_t b, std::size_t e) {
    if (b >= e) return;
    if (looks_like_declaration(b, e)) {
      declaration(b, e, nullptr);
    } else {
      expression_statement(b, e);
    }
  }

  // Skips one type name (identifier, qualified name, template arguments)
  // starting at i; returns the index after it.
  std::size_t skip_type_name(std::size_t i, std::size_t e) const {
    if (i < e && t_[i].is("::")) ++i;
    if (i >= e || !t_[i].is_identifier()) return i;
    ++i;
    while (i + 1 < e && t_[i].is("::") && t_[i + 1].is_identifier()) i += 2;
    if (i < e && t_[i].is("<")) {
      int depth = 0;
      for (std::size_t k = i; k < e; ++k) {
        if (t_[k].is("<")) ++depth;
        if (t_[k].is(">")) --depth;
        if (t_[k].is(">>")) depth -= 2;
        if (t_[k].is(";") || t_[k].is("{")) return i;
        if (depth <= 0) return k + 1;
      }
    }
    return i;
  }

  bool looks_like_declaration(std::size_t b, std::size_t e) const {
    std::size_t i = b;
    while (i < e && t_[i].is_identifier() && is_attribute_word(t_[i].text)) {
      if (i + 1 < e && t_[i + 1].is("(")) {
        i = match_close(t_, i + 1, e) + 1;
      } else {
        ++i;
      }
    }
    if (i >= e) return false;
    const Token& first = t_[i];
    if (!first.is_identifier()) return false;
    if (is_type_word(first.text)) return true;
    if (is_keyword(first.text) || declared_.contains(first.text)) return false;
    std::size_t k = skip_type_name(i, e);
    bool stars = false;
    while (k < e && (t_[k].is("*") || t_[k].is("&") || t_[k].is("&&") || t_[k].is("const"))) {
      stars = true;
      ++k;
    }
    if (k >= e || !t_[k].is_identifier() || is_keyword(t_[k].text)) {
      // Function-pointer declarator: T (*name)(...)
      return k + 1 < e && t_[k].is("(") && t_[k + 1].is("*") && !declared_.contains(first.text) &&
             k == i + 1;
    }
    if (k + 1 == e) return true;
    const Token& after = t_[k + 1];
    if (after.is("=") || after.is(";") || after.is(",") || after.is("[") || after.is(":")) return true;
    return after.is("(") && !stars;
  }

  // Declaration statement. `extra_sources` feeds range-for declarations.
  void declaration(std::size_t b, std::size_t e, const std::vector<std::string>* extra_sources) {
    std::size_t i = b;
    bool seen_type = false;
    while (i < e) {
      const Token& tok = t_[i];
      if (tok.is_identifier() && is_attribute_word(tok.text)) {
        i = (i + 1 < e && t_[i + 1].is("(")) ? match_close(t_, i + 1, e) + 1 : i + 1;
        continue;
      }
      if (tok.is("struct") || tok.is("union") || tok.is("enum") || tok.is("class")) {
        ++i;
        if (i < e && t_[i].is_identifier()) ++i;
        if (i < e && t_[i].is("{")) i = match_close(t_, i, e) + 1;
        seen_type = true;
        continue;
      }
      if (tok.is_identifier() && is_type_word(tok.text)) {
        if (is_builtin_type(tok.text)) seen_type = true;
        ++i;
        continue;
      }
      if (!seen_type && (tok.is_identifier() || tok.is("::")) && !is_keyword(tok.text)) {
        i = skip_type_name(i, e);
        seen_type = true;
        continue;
      }
      break;
    }
    std::size_t seg = i;
    int depth = 0;
    for (std::size_t k = i; k <= e; ++k) {
      if (k < e && is_open(t_[k])) ++depth;
      if (k < e && is_close(t_[k])) --depth;
      if (k == e || (depth == 0 && t_[k].is(","))) {
        declarator(seg, k, extra_sources);
        seg = k + 1;
      }
    }
  }

  void declarator(std::size_t b, std::size_t e, const std::vector<std::string>* extra_sources) {
    std::size_t i = b;
    bool pointer = false;
    while (i < e && (t_[i].is("*") || t_[i].is("&") || t_[i].is("&&") || t_[i].is("const") ||
                     t_[i].is("volatile") || t_[i].is("__restrict") || t_[i].is("restrict"))) {
      if (!t_[i].is("const") && !t_[i].is("volatile")) pointer = true;
      ++i;
    }
    const Token* name = nullptr;
    if (i < e && t_[i].is("(")) {
      // Function pointer: (*name)(params)
      const std::size_t close = match_close(t_, i, e);
      for (std::size_t k = i; k < close; ++k) {
        if (t_[k].is_identifier() && !is_keyword(t_[k].text)) {
          name = &t_[k];
          break;
        }
      }
      pointer = true;
      i = close + 1;
      if (i < e && t_[i].is("(")) i = match_close(t_, i, e) + 1;
    } else if (i < e && t_[i].is_identifier() && !is_keyword(t_[i].text)) {
      name = &t_[i];
      ++i;
    }
    if (name == nullptr) {
      expression(b, e, nullptr);
      return;
    }
    while (i < e && t_[i].is("[")) {
      const std::size_t close = match_close(t_, i, e);
      expression(i + 1, close, nullptr);
      pointer = true;
      i = close + 1;
    }
    std::size_t init_b = e;
    std::size_t init_e = e;
    if (i < e && t_[i].is("=")) {
      init_b = i + 1;
    } else if (i < e && (t_[i].is("(") || t_[i].is("{"))) {
      init_b = i + 1;
      init_e = match_close(t_, i, e);
    }
    declare(name->text, pointer);

    std::vector<std::string> sources;
    if (extra_sources != nullptr) sources = *extra_sources;
    if (init_b < init_e) {
      if (pointer) {
        if (auto pointee = pointer_source(init_b, init_e)) {
          emit_pointer(*name, pointee->text);
          emit_simple(*pointee, OccurrenceKind::use);
          return;
        }
      }
      expression(init_b, init_e, &sources);
    }
    emit_simple(*name, OccurrenceKind::definition);
    for (const auto& s : sources) depend(name->line, s, name->text);
  }

  // `&x`, `&x->m`, `&x[i]`, or a lone pointer variable q.
  const Token* pointer_source(std::size_t b, std::size_t e) const {
    if (e - b == 1 && t_[b].is_identifier() && pointers_.contains(t_[b].text)) return &t_[b];
    if (e - b >= 2 && t_[b].is("&") && t_[b + 1].is_identifier() && is_variable_name(t_[b + 1])) {
      for (std::size_t k = b + 2; k < e; ++k) {
        // Only member/index chains keep this a direct address-of.
        if (t_[k].is("(")) return nullptr;
      }
      return &t_[b + 1];
    }
    return nullptr;
  }

  void expression_statement(std::size_t b, std::size_t e) {
    if (b >= e) return;
    std::size_t op = e;
    int depth = 0;
    for (std::size_t k = b; k < e; ++k) {
      if (is_open(t_[k])) ++depth;
      if (is_close(t_[k])) --depth;
      if (depth == 0 && is_assignment_op(t_[k])) {
        op = k;
        break;
      }
    }
    if (op == e) {
      expression(b, e, nullptr);
      return;
    }
    // Left-hand side: find the base variable of x, *x, x->m, x[i], (*x).m
    std::size_t k = b;
    while (k < op && (t_[k].is("*") || t_[k].is("(") || t_[k].is("++") || t_[k].is("--"))) ++k;
    const Token* base = nullptr;
    if (k < op && is_variable_name(t_[k]) && !(k + 1 < op && t_[k + 1].is("("))) base = &t_[k];
    const bool plain = base != nullptr && op - b == 1;

    std::vector<std::string> sources;
    const bool chained = [&] {
      int d = 0;
      for (std::size_t j = op + 1; j < e; ++j) {
        if (is_open(t_[j])) ++d;
        if (is_close(t_[j])) --d;
        if (d == 0 && is_assignment_op(t_[j])) return true;
      }
      return false;
    }();

    if (base == nullptr) {
      expression(b, op, nullptr);
    } else {
      // Index expressions inside the left-hand side are uses.
      for (std::size_t j = k + 1; j < op; ++j) {
        if (t_[j].is("[")) {
          const std::size_t close = match_close(t_, j, op);
          expression(j + 1, close, nullptr);
          j = close;
        }
      }
    }

    const bool simple_assign = t_[op].is("=");
    if (base != nullptr && plain && simple_assign && !chained) {
      if (auto pointee = pointer_source(op + 1, e)) {
        if (pointers_.contains(base->text) || t_[op + 1].is("&") || !declared_.contains(base->text)) {
          emit_pointer(*base, pointee->text);
          emit_simple(*pointee, OccurrenceKind::use);
          return;
        }
      }
    }

    if (chained) {
      expression_statement(op + 1, e);
      collect_names(op + 1, e, sources);
    } else {
      expression(op + 1, e, &sources);
    }
    if (base != nullptr) {
      emit_simple(*base, OccurrenceKind::definition);
      if (!simple_assign) emit_simple(*base, OccurrenceKind::use);
      if (plain) {
        for (const auto& s : sources) depend(base->line, s, base->text);
      }
    }
  }

  void collect_names(std::size_t b, std::size_t e, std::vector<std::string>& out) const {
    for (std::size_t i = b; i < e; ++i) {
      if (i > b && (t_[i - 1].is(".") || t_[i - 1].is("->"))) continue;
      if (i + 1 < e && t_[i + 1].is("(") && !declared_.contains(t_[i].text)) continue;
      if (is_variable_name(t_[i])) out.push_back(t_[i].text);
    }
  }

  // Looks like a cast: the parenthesized group at `open` names a type and is
  // followed by an operand.
  bool is_cast(std::size_t open, std::size_t close, std::size_t e) const {
    if (close + 1 >= e || close == open + 1) return false;
    const Token& next = t_[close + 1];
    const bool operand = next.is_identifier() || next.kind == TokenKind::number ||
                         next.kind == TokenKind::string_literal || next.kind == TokenKind::char_literal ||
                         next.is("(") || next.is("&") || next.is("*") || next.is("-") ||
                         next.is("!") || next.is("~") || next.is("{");
    if (!operand) return false;
    const Token& first = t_[open + 1];
    if (!first.is_identifier()) return false;
    if (is_type_word(first.text)) return true;
    if (is_keyword(first.text) || declared_.contains(first.text)) return false;
    // typedef-name followed only by * / & / const
    std::size_t k = skip_type_name(open + 1, close);
    while (k < close && (t_[k].is("*") || t_[k].is("&") || t_[k].is("const"))) ++k;
    if (k != close) return false;
    // `(x) - y` is ambiguous; a lone identifier only casts before a name or
    // a parenthesized expression.
    if (close == open + 2) return next.is_identifier() || next.is("(") || next.kind == TokenKind::number;
    return true;
  }

  const Frame* effective_call(const std::vector<Frame>& frames) const {
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
      if (it->kind == Frame::call) return &*it;
      if (it->kind == Frame::opaque) return nullptr;
    }
    return nullptr;
  }

  void expression(std::size_t b, std::size_t e, std::vector<std::string>* sources) {
    std::vector<Frame> frames(1);
    for (std::size_t i = b; i < e; ++i) {
      const Token& tok = t_[i];
      const Token* prev = i > b ? &t_[i - 1] : nullptr;
      const Token* next = i + 1 < e ? &t_[i + 1] : nullptr;
      if (tok.is("(")) {
        Frame f;
        if (prev != nullptr && prev->is_identifier()) {
          if (is_opaque_operator(prev->text)) {
            f.kind = Frame::opaque;
          } else if (!is_keyword(prev->text)) {
            f.kind = Frame::call;
            f.target = prev->text;
            const bool member = i >= b + 2 && (t_[i - 2].is(".") || t_[i - 2].is("->"));
            f.indirect = member || declared_.contains(prev->text);
          }
        } else if (prev != nullptr && (prev->is(")") || prev->is("]"))) {
          f.kind = Frame::call;
          f.indirect = true;
          f.target = "<indirect>";
          for (std::size_t k = i; k-- > b;) {
            if (t_[k].is_identifier() && !is_keyword(t_[k].text)) {
              f.target = t_[k].text;
              break;
            }
          }
        } else {
          const std::size_t close = match_close(t_, i, e);
          if (is_cast(i, close, e)) {
            i = close;
            continue;
          }
        }
        frames.push_back(std::move(f));
        continue;
      }
      if (tok.is("[") || tok.is("{")) {
        frames.push_back(Frame{});
        continue;
      }
      if (is_close(tok)) {
        if (frames.size() > 1) frames.pop_back();
        continue;
      }
      if (tok.is(",")) {
        if (frames.back().kind == Frame::call) ++frames.back().position;
        continue;
      }
      if (is_assignment_op(tok) && prev != nullptr && prev->is_identifier() &&
          is_variable_name(*prev) &&
          !(i >= b + 2 && (t_[i - 2].is(".") || t_[i - 2].is("->")))) {
        // Embedded assignment such as if ((n = read(fd)) < 0).
        emit_simple(*prev, OccurrenceKind::definition);
        continue;
      }
      if (!tok.is_identifier() || is_keyword(tok.text)) continue;
      if (prev != nullptr && (prev->is(".") || prev->is("->") || prev->is("::"))) continue;
      if (next != nullptr && next->is("::")) continue;
      if (next != nullptr && next->is("(") && !declared_.contains(tok.text)) continue;
      if (!is_variable_name(tok)) continue;

      if (const Frame* call = effective_call(frames)) {
        VarOccurrence o;
        o.name = tok.text;
        o.line = tok.line;
        o.kind = OccurrenceKind::call_argument;
        o.call_target = call->target;
        o.argument_position = call->position;
        o.indirect = call->indirect;
        emit(std::move(o));
      } else {
        emit_simple(tok, OccurrenceKind::use);
      }
      if ((prev != nullptr && (prev->is("++") || prev->is("--"))) ||
          (next != nullptr && (next->is("++") || next->is("--")))) {
        emit_simple(tok, OccurrenceKind::definition);
      }
      if (sources != nullptr) sources->push_back(tok.text);
    }
  }

  const Tokens& t_;
  FunctionUnit& fn_;
  const std::set<std::string>& unit_functions_;
  std::set<std::string> declared_;
  std::set<std::string> pointers_;
  bool collecting_ = false;
};

void check_definitions_precede_uses(const FunctionUnit& fn, const std::string& path,
                                    Diagnostics& diags) {
  std::map<std::string, int> first_def;
  std::map<std::string, int> first_use;
  for (const auto& o : fn.variable_occurrences) {
    const bool def = o.kind == OccurrenceKind::definition || o.kind == OccurrenceKind::pointer_assignment;
    auto& slot = def ? first_def : first_use;
    auto [it, inserted] = slot.emplace(o.name, o.line);
    if (!inserted) it->second = std::min(it->second, o.line);
  }
  for (const auto& [name, use_line] : first_use) {
    auto d = first_def.find(name);
    if (d != first_def.end() && use_line < d->second) {
      diags.push_back({path, use_line, "'" + name + "' used before its first definition in " + fn.name});
    }
  }
}

}  // namespace

SourceUnit parse_source(std::string_view text, std::string path) {
  const std::string clean = sanitize_utf8(text);
  LexResult lex = tokenize(clean, path);
  const Tokens& t = lex.tokens;

  SourceUnit unit;
  unit.path = std::move(path);
  unit.loc_total = static_cast<int>(lex.code_lines.size());

  struct Pending {
    FunctionHeader header;
    std::size_t body_open;
    std::size_t body_close;  // == t.size() when unbalanced
  };
  std::vector<Pending> found;

  std::size_t decl_start = 0;
  int transparent = 0;  // open namespace / extern "C" blocks
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].is(";")) {
      decl_start = i + 1;
      continue;
    }
    if (t[i].is("}")) {
      if (transparent > 0) {
        --transparent;
      } else {
        unit.diagnostics.push_back({unit.path, t[i].line, "unmatched '}' at file scope"});
      }
      decl_start = i + 1;
      continue;
    }
    if (t[i].is("(") || t[i].is("[")) {
      i = std::min(match_close(t, i, t.size()), t.size() - 1);
      continue;
    }
    if (!t[i].is("{")) continue;

    const bool ns = decl_start < i && (t[decl_start].is("namespace") ||
                                       (t[decl_start].is("extern") && decl_start + 1 < i &&
                                        t[decl_start + 1].kind == TokenKind::string_literal &&
                                        decl_start + 2 == i));
    if (ns) {
      ++transparent;
      decl_start = i + 1;
      continue;
    }
    const std::size_t close = match_close(t, i, t.size());
    if (auto header = find_function_header(t, decl_start, i)) {
      found.push_back({*header, i, close});
      if (close == t.size()) {
        unit.diagnostics.push_back(
            {unit.path, t[i].line, "unbalanced braces: body of '" + header->name + "' never closes"});
        break;
      }
      i = close;
      decl_start = i + 1;
      continue;
    }
    if (close == t.size()) {
      unit.diagnostics.push_back({unit.path, t[i].line, "unbalanced braces at file scope"});
      break;
    }
    i = close;  // struct body or initializer; the declaration runs on to ';'
  }

  std::set<std::string> unit_functions;
  for (const auto& p : found) unit_functions.insert(p.header.name);

  std::map<std::string, int> name_count;
  for (const auto& p : found) {
    FunctionUnit fn;
    fn.name = p.header.name;
    if (name_count[fn.name]++ > 0) fn.name += "@" + std::to_string(t[p.header.start_idx].line);
    fn.start_line = t[p.header.start_idx].line;
    fn.end_line = p.body_close < t.size() ? t[p.body_close].line : t.back().line;
    BodyAnalyzer body(t, fn, unit_functions);
    body.parse_params(p.header.params_open, p.header.params_close);
    body.parse_body(p.body_open + 1, std::min(p.body_close, t.size()));
    check_definitions_precede_uses(fn, unit.path, unit.diagnostics);
    unit.functions.push_back(std::move(fn));
  }
  std::sort(unit.functions.begin(), unit.functions.end(),
            [](const FunctionUnit& a, const FunctionUnit& b) { return a.start_line < b.start_line; });
  return unit;
}

}  // namespace srcvul
