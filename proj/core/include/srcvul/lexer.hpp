#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace srcvul {

enum class TokenKind { identifier, number, string_literal, char_literal, punct };

struct Token {
  TokenKind kind = TokenKind::punct;
  std::string text;
  int line = 0;

  bool is(std::string_view s) const { return text == s; }
  bool is_identifier() const { return kind == TokenKind::identifier; }
};

struct LexResult {
  std::vector<Token> tokens;
  /// Lines holding code: any token or a preprocessor directive.
  std::set<int> code_lines;
  int line_count = 0;
};

/// Tokenizes C/C++ text. Comments are dropped, preprocessor directives are
/// dropped (with their continuation lines), and every token keeps its
/// 1-based line. Throws ParseError for NUL bytes and for a block comment
/// that never terminates.
LexResult tokenize(std::string_view text, const std::string& path = "<input>");

/// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view text);

/// C/C++ reserved words plus a handful of compiler extensions.
bool is_keyword(std::string_view word);

/// Builtin type names, qualifiers and storage classes, i.e. words that can
/// only open a declaration.
bool is_type_word(std::string_view word);

/// True for identifiers spelled like macro constants (GFP_KERNEL, NULL).
bool is_macro_like(std::string_view word);

/// Strips comments from single lines while carrying block-comment state
/// from one line to the next. Used on diff hunks, where lines arrive one at
/// a time.
class LineCommentStripper {
 public:
  /// Returns the code part of `line` with comments removed.
  std::string code_part(std::string_view line);
  bool in_block_comment() const { return in_block_; }

 private:
  bool in_block_ = false;
};

}  // namespace srcvul
