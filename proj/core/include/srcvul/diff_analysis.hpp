#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "srcvul/common.hpp"
#include "srcvul/source_model.hpp"

namespace srcvul {

/// Sidecar metadata that accompanies each diff.
struct CveMeta {
  std::string cve_id = "UNTRACKED";
  std::string description;
  std::string project;
  std::string version;
  std::optional<std::string> commit_ref;
  nlohmann::json extra = nlohmann::json::object();  // unknown fields, kept as-is
};

/// `CVE-YYYY-NNNN...` or the `UNTRACKED` sentinel.
bool is_valid_cve_id(std::string_view id);

/// Parses a sidecar JSON object. Throws DiffError on malformed JSON, a
/// non-string field, or an invalid cve_id.
CveMeta parse_cve_meta(std::string_view json_text);
nlohmann::json to_json(const CveMeta& meta);

enum class LineKind { context, added, deleted };

struct HunkLine {
  LineKind kind = LineKind::context;
  std::string text;  // without the leading marker
  int old_line = 0;  // set for context and deleted lines
  int new_line = 0;  // set for context and added lines
};

struct Hunk {
  int old_start = 0;
  int old_count = 0;
  int new_start = 0;
  int new_count = 0;
  std::string header;
  std::vector<HunkLine> lines;
  bool old_missing_newline = false;  // "\ No newline at end of file"
  bool new_missing_newline = false;
};

struct FileDiff {
  std::string old_path;  // "/dev/null" for created files
  std::string new_path;  // "/dev/null" for deleted files
  std::vector<Hunk> hunks;  // sorted by old_start, non-overlapping
};

struct DiffDocument {
  std::string cve_id = "UNTRACKED";
  std::string description;
  std::string project;
  std::string version;
  std::optional<std::string> commit_ref;
  std::vector<FileDiff> file_diffs;
  std::string patch_text;  // the diff exactly as given
  Diagnostics diagnostics;
};

/// Parses a unified diff. Git extended headers and any preamble text are
/// ignored. Throws DiffError for a hunk header without line numbers, for a
/// hunk whose body does not match its counts, and for overlapping hunks.
/// Binary file sections are skipped with a diagnostic.
DiffDocument parse_unified_diff(std::string_view text, const CveMeta& meta = {});

/// Applies one file's hunks to the old file text. Throws DiffError when a
/// context or deleted line does not match.
std::string apply_file_diff(std::string_view old_text, const FileDiff& diff);

enum class Side { deleted, added };
std::string_view to_string(Side side);
/// Accepts "deleted" / "added"; throws Error otherwise.
Side side_from_string(std::string_view s);

struct VrStmt {
  std::string file;
  int line = 0;  // old-file line for deleted, new-file line for added
  std::string text;

  friend auto operator<=>(const VrStmt&, const VrStmt&) = default;
  friend bool operator==(const VrStmt&, const VrStmt&) = default;
};

struct MovedStmt {
  VrStmt deleted;
  VrStmt added;
  friend bool operator==(const MovedStmt&, const MovedStmt&) = default;
};

/// Vulnerability-related statements. `deleted` and `added` hold every
/// changed code line; a line removed and re-added with the same code
/// (whitespace aside) additionally appears as one pair in `moved`, so
/// count() counts it once.
struct VrStatements {
  std::set<VrStmt> deleted;
  std::set<VrStmt> added;
  std::vector<MovedStmt> moved;

  std::size_t count() const { return deleted.size() + added.size() - moved.size(); }
};

/// Comment-only and blank lines are dropped; block comments spanning hunk
/// lines are tracked per side.
VrStatements extract_vr_stmts(const DiffDocument& doc);

inline constexpr std::string_view kFileScope = "<file-scope>";

struct VrVar {
  std::string file;
  std::string function;
  std::string variable;
  Side origin = Side::deleted;

  friend auto operator<=>(const VrVar&, const VrVar&) = default;
  friend bool operator==(const VrVar&, const VrVar&) = default;
};

struct VrVariables {
  std::set<VrVar> entries;
  Diagnostics diagnostics;
};

/// Parsed source trees keyed by the path used in the diff.
using UnitMap = std::map<std::string, SourceUnit, std::less<>>;

/// Deleted statements resolve against `vulnerable`, added ones against
/// `patched`. Context lines never contribute.
VrVariables extract_vr_vars(const VrStatements& stmts, const UnitMap& vulnerable,
                            const UnitMap& patched);

}  // namespace srcvul
