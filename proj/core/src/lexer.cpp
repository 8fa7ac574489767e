#include "srcvul/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <unordered_set>

#include "srcvul/common.hpp"

namespace srcvul {
namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$'; }

// Longest-first so the first hit is the maximal munch.
constexpr std::array<std::string_view, 24> kMultiPunct = {
    "<<=", ">>=", "...", "->*", "->", "++", "--", "<<", ">>", "<=", ">=", "==",
    "!=",  "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "::"};

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> k = {
      "alignas",   "alignof",   "asm",          "auto",        "bool",
      "break",     "case",      "catch",        "char",        "class",
      "const",     "constexpr", "const_cast",   "continue",    "decltype",
      "default",   "delete",    "do",           "double",      "dynamic_cast",
      "else",      "enum",      "explicit",     "extern",      "false",
      "float",     "for",       "friend",       "goto",        "if",
      "inline",    "int",       "long",         "mutable",     "namespace",
      "new",       "noexcept",  "nullptr",      "operator",    "private",
      "protected", "public",    "register",     "reinterpret_cast",
      "restrict",  "return",    "short",        "signed",      "sizeof",
      "static",    "static_assert",             "static_cast", "struct",
      "switch",    "template",  "this",         "throw",       "true",
      "try",       "typedef",   "typeid",       "typename",    "typeof",
      "union",     "unsigned",  "using",        "virtual",     "void",
      "volatile",  "while",     "_Bool",        "_Complex",    "_Atomic",
      "_Noreturn", "_Thread_local",             "_Alignof",    "_Alignas",
      "_Static_assert",         "__attribute__", "__declspec", "__typeof__",
      "__typeof",  "__inline",  "__inline__",   "__restrict",  "__restrict__",
      "__volatile__",           "__asm__",      "__extension__",
      "__always_inline",        "__init",       "__exit",      "__user",
      "__iomem",   "__force",   "__must_check", "__cold",      "__weak",
      "wchar_t",   "char8_t",   "char16_t",     "char32_t",    "thread_local",
      "co_await",  "co_return", "co_yield",     "concept",     "requires",
      "final",     "override"};
  return k;
}

const std::unordered_set<std::string_view>& type_words() {
  static const std::unordered_set<std::string_view> t = {
      "auto",     "bool",       "char",        "class",        "const",
      "constexpr","double",     "enum",        "extern",       "float",
      "inline",   "int",        "long",        "mutable",      "register",
      "restrict", "short",      "signed",      "static",       "struct",
      "typename", "union",      "unsigned",    "void",         "volatile",
      "_Bool",    "_Complex",   "_Atomic",     "_Thread_local","__inline",
      "__inline__","__restrict","__restrict__","wchar_t",      "char8_t",
      "char16_t", "char32_t",   "thread_local","__user",       "__iomem",
      "__always_inline",        "__init",      "__exit",       "__must_check",
      "__cold",   "__weak",     "__extension__"};
  return t;
}

class Lexer {
 public:
  Lexer(std::string_view text, const std::string& path) : s_(text), path_(path) {}

  LexResult run() {
    LexResult out;
    bool line_start = true;
    while (pos_ < s_.size()) {
      const unsigned char c = static_cast<unsigned char>(s_[pos_]);
      if (c == '\0') throw ParseError(path_, line_, "NUL byte in source text");
      if (c == '\n') {
        ++line_;
        ++pos_;
        line_start = true;
        continue;
      }
      if (c == '\\' && peek(1) == '\n') {  // line splice
        pos_ += 2;
        ++line_;
        continue;
      }
      if (c == '\\' && peek(1) == '\r' && peek(2) == '\n') {
        pos_ += 3;
        ++line_;
        continue;
      }
      if (std::isspace(c)) {
        ++pos_;
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        skip_line_comment();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        skip_block_comment();
        continue;
      }
      if (c == '#' && line_start) {
        const int first = line_;
        skip_directive();
        for (int l = first; l <= line_; ++l) out.code_lines.insert(l);
        continue;
      }
      line_start = false;
      const int tok_line = line_;
      Token tok;
      tok.line = tok_line;
      if (ident_start(c)) {
        const std::size_t b = pos_;
        while (pos_ < s_.size() && ident_char(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        tok.text = std::string(s_.substr(b, pos_ - b));
        // Encoding prefixes and raw strings.
        if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'') &&
            (tok.text == "L" || tok.text == "u" || tok.text == "U" || tok.text == "u8" ||
             tok.text == "R" || tok.text == "LR" || tok.text == "uR" || tok.text == "UR" ||
             tok.text == "u8R")) {
          const bool raw = tok.text.back() == 'R' && s_[pos_] == '"';
          tok.text += raw ? read_raw_string() : read_quoted(s_[pos_]);
          tok.kind = tok.text.find('"') != std::string::npos ? TokenKind::string_literal
                                                              : TokenKind::char_literal;
        } else {
          tok.kind = TokenKind::identifier;
        }
      } else if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        tok.kind = TokenKind::number;
        tok.text = read_number();
      } else if (c == '"') {
        tok.kind = TokenKind::string_literal;
        tok.text = read_quoted('"');
      } else if (c == '\'') {
        tok.kind = TokenKind::char_literal;
        tok.text = read_quoted('\'');
      } else if (c >= 0x80) {
        // Stray non-ASCII byte outside a literal: not part of any token.
        ++pos_;
        out.code_lines.insert(tok_line);
        continue;
      } else {
        tok.kind = TokenKind::punct;
        tok.text = read_punct();
      }
      for (int l = tok_line; l <= line_; ++l) out.code_lines.insert(l);
      out.tokens.push_back(std::move(tok));
    }
    out.line_count = line_;
    if (!s_.empty() && s_.back() == '\n') out.line_count = line_ - 1;
    return out;
  }

 private:
  char peek(std::size_t k) const { return pos_ + k < s_.size() ? s_[pos_ + k] : '\0'; }

  void skip_line_comment() {
    while (pos_ < s_.size() && s_[pos_] != '\n') {
      if (s_[pos_] == '\\' && peek(1) == '\n') {
        pos_ += 2;
        ++line_;
        continue;
      }
      ++pos_;
    }
  }

  void skip_block_comment() {
    const int start = line_;
    pos_ += 2;
    while (pos_ < s_.size()) {
      if (s_[pos_] == '*' && peek(1) == '/') {
        pos_ += 2;
        return;
      }
      if (s_[pos_] == '\n') ++line_;
      if (s_[pos_] == '\0') throw ParseError(path_, line_, "NUL byte in source text");
      ++pos_;
    }
    throw ParseError(path_, start, "unterminated block comment");
  }

  void skip_directive() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '\n') return;  // the main loop consumes the newline
      if (c == '\\' && peek(1) == '\n') {
        pos_ += 2;
        ++line_;
        continue;
      }
      if (c == '\\' && peek(1) == '\r' && peek(2) == '\n') {
        pos_ += 3;
        ++line_;
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        skip_block_comment();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        skip_line_comment();
        return;
      }
      if (c == '\0') throw ParseError(path_, line_, "NUL byte in source text");
      ++pos_;
    }
  }

  // Reads a quoted literal starting at the opening quote. An unterminated
  // literal stops at the end of the line.
  std::string read_quoted(char quote) {
    const std::size_t b = pos_;
    ++pos_;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '\\' && pos_ + 1 < s_.size()) {
        if (s_[pos_ + 1] == '\n') ++line_;
        pos_ += 2;
        continue;
      }
      if (c == quote) {
        ++pos_;
        break;
      }
      if (c == '\n') break;
      if (c == '\0') throw ParseError(path_, line_, "NUL byte in source text");
      ++pos_;
    }
    return std::string(s_.substr(b, pos_ - b));
  }

  std::string read_raw_string() {
    const std::size_t b = pos_;
    ++pos_;  // opening quote
    std::string delim;
    while (pos_ < s_.size() && s_[pos_] != '(' && s_[pos_] != '\n' && delim.size() < 16) {
      delim += s_[pos_++];
    }
    const std::string close = ")" + delim + "\"";
    const std::size_t end = s_.find(close, pos_);
    const std::size_t stop = end == std::string_view::npos ? s_.size() : end + close.size();
    line_ += static_cast<int>(std::count(s_.begin() + pos_, s_.begin() + stop, '\n'));
    pos_ = stop;
    return std::string(s_.substr(b, pos_ - b));
  }

  std::string read_number() {
    const std::size_t b = pos_;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if ((c == '+' || c == '-') && pos_ > b &&
          (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E' || s_[pos_ - 1] == 'p' || s_[pos_ - 1] == 'P')) {
        ++pos_;
        continue;
      }
      if (c == '\'' && std::isalnum(static_cast<unsigned char>(peek(1)))) {
        pos_ += 2;
        continue;
      }
      if (ident_char(static_cast<unsigned char>(c)) || c == '.') {
        ++pos_;
        continue;
      }
      break;
    }
    return std::string(s_.substr(b, pos_ - b));
  }

  std::string read_punct() {
    for (std::string_view p : kMultiPunct) {
      if (s_.substr(pos_, p.size()) == p) {
        pos_ += p.size();
        return std::string(p);
      }
    }
    return std::string(1, s_[pos_++]);
  }

  std::string_view s_;
  const std::string& path_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

LexResult tokenize(std::string_view text, const std::string& path) {
  return Lexer(text, path).run();
}

std::string sanitize_utf8(std::string_view text) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      out += static_cast<char>(c);
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    }
    bool ok = len != 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (cc & 0x3F);
      }
    }
    // Reject overlong forms, surrogates and out-of-range code points.
    if (ok) {
      ok = !(len == 2 && cp < 0x80) && !(len == 3 && cp < 0x800) && !(len == 4 && cp < 0x10000) &&
           !(cp >= 0xD800 && cp <= 0xDFFF) && cp <= 0x10FFFF;
    }
    if (ok) {
      out.append(text.substr(i, len));
      i += len;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

bool is_keyword(std::string_view word) { return keywords().contains(word); }

bool is_type_word(std::string_view word) { return type_words().contains(word); }

bool is_macro_like(std::string_view word) {
  bool has_upper = false;
  for (char c : word) {
    if (std::islower(static_cast<unsigned char>(c))) return false;
    if (std::isupper(static_cast<unsigned char>(c))) has_upper = true;
  }
  return has_upper;
}

std::string LineCommentStripper::code_part(std::string_view line) {
  std::string out;
  std::size_t i = 0;
  char quote = 0;
  while (i < line.size()) {
    const char c = line[i];
    const char next = i + 1 < line.size() ? line[i + 1] : '\0';
    if (in_block_) {
      if (c == '*' && next == '/') {
        in_block_ = false;
        i += 2;
        out += ' ';
      } else {
        ++i;
      }
      continue;
    }
    if (quote != 0) {
      out += c;
      if (c == '\\' && i + 1 < line.size()) {
        out += next;
        i += 2;
        continue;
      }
      if (c == quote) quote = 0;
      ++i;
      continue;
    }
    if (c == '/' && next == '/') break;
    if (c == '/' && next == '*') {
      in_block_ = true;
      i += 2;
      continue;
    }
    if (c == '"' || c == '\'') quote = c;
    out += c;
    ++i;
  }
  return out;
}

std::string to_string(const Diagnostic& d) {
  std::string s = d.location;
  if (d.line > 0) s += ":" + std::to_string(d.line);
  if (!s.empty()) s += ": ";
  return s + d.message;
}

std::string to_string(const Criterion& c) { return c.file + ":" + c.function + ":" + c.variable; }

}  // namespace srcvul
