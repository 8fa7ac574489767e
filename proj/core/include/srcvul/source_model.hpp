#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srcvul/common.hpp"

namespace srcvul {

enum class OccurrenceKind { definition, use, pointer_assignment, call_argument };

std::string_view to_string(OccurrenceKind kind);

/// One appearance of a variable inside a function body or parameter list.
///
/// `call_target` is set exactly when kind is call_argument, `pointee` exactly
/// when kind is pointer_assignment. Calls through a function-pointer
/// variable or a struct member are flagged `indirect`; their target is the
/// pointer's (or member's) name.
struct VarOccurrence {
  std::string name;
  int line = 0;
  OccurrenceKind kind = OccurrenceKind::use;
  std::optional<std::string> call_target;
  int argument_position = 0;  // 1-based, call_argument only
  bool indirect = false;
  std::optional<std::string> pointee;

  friend auto operator<=>(const VarOccurrence&, const VarOccurrence&) = default;
  friend bool operator==(const VarOccurrence&, const VarOccurrence&) = default;
};

/// `target` takes a value computed from `source` on `line` (x = f(y) gives
/// y -> x). Assignments through a member or a dereference do not produce
/// dependencies; they count as a definition of the base variable only.
struct DataDependency {
  int line = 0;
  std::string source;
  std::string target;

  friend auto operator<=>(const DataDependency&, const DataDependency&) = default;
  friend bool operator==(const DataDependency&, const DataDependency&) = default;
};

struct FunctionUnit {
  std::string name;
  int start_line = 0;  // first token of the definition, return type included
  int end_line = 0;    // closing brace
  std::vector<std::string> parameters;
  std::vector<VarOccurrence> variable_occurrences;  // sorted, unique
  std::vector<DataDependency> dependencies;         // sorted, unique

  /// Inclusive physical line span.
  int module_size() const { return end_line - start_line + 1; }

  friend bool operator==(const FunctionUnit&, const FunctionUnit&) = default;
};

struct SourceUnit {
  std::string path;
  std::vector<FunctionUnit> functions;  // sorted by start_line, non-overlapping
  int loc_total = 0;                    // non-blank, non-comment lines
  Diagnostics diagnostics;

  /// The function whose [start_line, end_line] contains `line`, if any.
  const FunctionUnit* function_at(int line) const;
  const FunctionUnit* find_function(std::string_view name) const;

  friend bool operator==(const SourceUnit&, const SourceUnit&) = default;
};

/// Parses C-like source into functions and variable occurrences.
///
/// This is a token-level heuristic parser, not a compiler front end:
/// preprocessor directives are dropped so every conditional branch is
/// parsed, struct member accesses are attributed to their base variable,
/// and identifiers spelled like macro constants are ignored unless declared
/// locally. Invalid UTF-8 is replaced before lexing.
///
/// Throws ParseError when the text cannot be tokenized. Unbalanced braces
/// are recovered from and reported in `diagnostics`.
SourceUnit parse_source(std::string_view text, std::string path);

}  // namespace srcvul
