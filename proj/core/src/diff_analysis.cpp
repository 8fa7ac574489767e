#include "srcvul/diff_analysis.hpp"

#include <algorithm>
#include <charconv>
#include <regex>

#include "srcvul/lexer.hpp"

namespace srcvul {

bool is_valid_cve_id(std::string_view id) {
  static const std::regex re(R"(CVE-\d{4}-\d{4,})");
  return id == "UNTRACKED" || std::regex_match(id.begin(), id.end(), re);
}

CveMeta parse_cve_meta(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DiffError(std::string("metadata is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DiffError("metadata must be a JSON object");
  CveMeta meta;
  auto text_field = [&](const char* key, std::string& out, bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) throw DiffError(std::string("metadata lacks \"") + key + "\"");
      return;
    }
    if (!it->is_string()) throw DiffError(std::string("metadata field \"") + key + "\" must be a string");
    out = it->get<std::string>();
  };
  text_field("cve_id", meta.cve_id, true);
  text_field("description", meta.description, false);
  text_field("project", meta.project, false);
  text_field("version", meta.version, false);
  if (auto it = j.find("commit_ref"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw DiffError("metadata field \"commit_ref\" must be a string");
    meta.commit_ref = it->get<std::string>();
  }
  if (!is_valid_cve_id(meta.cve_id)) throw DiffError("invalid cve_id '" + meta.cve_id + "'");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k != "cve_id" && k != "description" && k != "project" && k != "version" && k != "commit_ref") {
      meta.extra[k] = it.value();
    }
  }
  return meta;
}

nlohmann::json to_json(const CveMeta& meta) {
  nlohmann::json j = meta.extra;
  j["cve_id"] = meta.cve_id;
  j["description"] = meta.description;
  j["project"] = meta.project;
  j["version"] = meta.version;
  if (meta.commit_ref) j["commit_ref"] = *meta.commit_ref;
  return j;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::string header_path(std::string_view rest) {
  const std::size_t tab = rest.find('\t');
  if (tab != std::string_view::npos) rest = rest.substr(0, tab);
  while (!rest.empty() && rest.back() == ' ') rest.remove_suffix(1);
  if (rest.size() >= 2 && rest.front() == '"' && rest.back() == '"') rest = rest.substr(1, rest.size() - 2);
  if (rest != "/dev/null" && (starts_with(rest, "a/") || starts_with(rest, "b/"))) rest.remove_prefix(2);
  return std::string(rest);
}

int to_int(const std::string& s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

Hunk parse_hunk_header(std::string_view line) {
  static const std::regex re(R"(^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@.*$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(line.begin(), line.end(), m, re)) {
    throw DiffError("malformed hunk header '" + std::string(line) + "'");
  }
  Hunk h;
  h.header = std::string(line);
  h.old_start = to_int(m[1].str());
  h.old_count = m[2].matched ? to_int(m[2].str()) : 1;
  h.new_start = to_int(m[3].str());
  h.new_count = m[4].matched ? to_int(m[4].str()) : 1;
  return h;
}

}  // namespace

DiffDocument parse_unified_diff(std::string_view text, const CveMeta& meta) {
  DiffDocument doc;
  doc.cve_id = meta.cve_id;
  doc.description = meta.description;
  doc.project = meta.project;
  doc.version = meta.version;
  doc.commit_ref = meta.commit_ref;
  doc.patch_text = std::string(text);
  if (!is_valid_cve_id(doc.cve_id)) throw DiffError("invalid cve_id '" + doc.cve_id + "'");

  const auto lines = split_lines(text);
  FileDiff* current = nullptr;
  bool skipping_binary = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (starts_with(line, "diff --git ")) {
      current = nullptr;
      skipping_binary = false;
      continue;
    }
    if (starts_with(line, "Binary files ") || line == "GIT binary patch") {
      doc.diagnostics.push_back({"diff", static_cast<int>(i + 1), "binary file section skipped"});
      if (current != nullptr) {
        doc.file_diffs.pop_back();
        current = nullptr;
      }
      skipping_binary = true;
      continue;
    }
    if (skipping_binary) continue;
    if (starts_with(line, "--- ") && i + 1 < lines.size() && starts_with(lines[i + 1], "+++ ")) {
      FileDiff fd;
      fd.old_path = header_path(line.substr(4));
      fd.new_path = header_path(lines[i + 1].substr(4));
      doc.file_diffs.push_back(std::move(fd));
      current = &doc.file_diffs.back();
      ++i;
      continue;
    }
    if (!starts_with(line, "@@")) continue;  // preamble, git extended headers
    if (current == nullptr) throw DiffError("hunk '" + std::string(line) + "' has no file header");

    Hunk h = parse_hunk_header(line);
    int old_left = h.old_count;
    int new_left = h.new_count;
    int old_no = h.old_count == 0 ? h.old_start + 1 : h.old_start;
    int new_no = h.new_count == 0 ? h.new_start + 1 : h.new_start;
    std::size_t j = i + 1;
    while (j < lines.size() && (old_left > 0 || new_left > 0)) {
      const std::string_view body = lines[j];
      const char mark = body.empty() ? ' ' : body[0];
      const std::string content(body.empty() ? body : body.substr(1));
      if (mark == ' ' && old_left > 0 && new_left > 0) {
        h.lines.push_back({LineKind::context, content, old_no++, new_no++});
        --old_left;
        --new_left;
      } else if (mark == '-' && old_left > 0) {
        h.lines.push_back({LineKind::deleted, content, old_no++, 0});
        --old_left;
      } else if (mark == '+' && new_left > 0) {
        h.lines.push_back({LineKind::added, content, 0, new_no++});
        --new_left;
      } else if (mark == '\\') {
        // marker for the preceding line; handled below
      } else {
        break;
      }
      if (j + 1 < lines.size() && starts_with(lines[j + 1], "\\") && !h.lines.empty()) {
        const LineKind k = h.lines.back().kind;
        if (k != LineKind::added) h.old_missing_newline = true;
        if (k != LineKind::deleted) h.new_missing_newline = true;
        ++j;
      }
      ++j;
    }
    if (old_left != 0 || new_left != 0) {
      throw DiffError("malformed hunk '" + h.header + "': body does not match its line counts");
    }
    current->hunks.push_back(std::move(h));
    i = j - 1;
  }

  for (auto& fd : doc.file_diffs) {
    std::stable_sort(fd.hunks.begin(), fd.hunks.end(),
                     [](const Hunk& a, const Hunk& b) { return a.old_start < b.old_start; });
    for (std::size_t k = 1; k < fd.hunks.size(); ++k) {
      const Hunk& a = fd.hunks[k - 1];
      if (a.old_start + a.old_count > fd.hunks[k].old_start + (fd.hunks[k].old_count == 0 ? 1 : 0)) {
        throw DiffError("overlapping hunks '" + a.header + "' and '" + fd.hunks[k].header + "'");
      }
    }
  }
  return doc;
}

std::string apply_file_diff(std::string_view old_text, const FileDiff& diff) {
  std::vector<std::string_view> old_lines;
  bool old_final_newline = true;
  {
    std::size_t pos = 0;
    while (pos < old_text.size()) {
      std::size_t nl = old_text.find('\n', pos);
      if (nl == std::string_view::npos) {
        old_lines.push_back(old_text.substr(pos));
        old_final_newline = false;
        break;
      }
      old_lines.push_back(old_text.substr(pos, nl - pos));
      pos = nl + 1;
    }
  }
  std::vector<std::string> out;
  std::size_t cursor = 0;  // next unread old line, 0-based
  bool final_newline = old_final_newline;
  for (const Hunk& h : diff.hunks) {
    const std::size_t first = h.old_count == 0 ? static_cast<std::size_t>(h.old_start)
                                               : static_cast<std::size_t>(h.old_start - 1);
    if (first < cursor || first > old_lines.size()) {
      throw DiffError("hunk '" + h.header + "' does not fit the old file");
    }
    while (cursor < first) out.emplace_back(old_lines[cursor++]);
    for (const HunkLine& l : h.lines) {
      if (l.kind == LineKind::added) {
        out.push_back(l.text);
        continue;
      }
      if (cursor >= old_lines.size() || old_lines[cursor] != l.text) {
        throw DiffError("hunk '" + h.header + "' does not apply at old line " +
                        std::to_string(cursor + 1));
      }
      if (l.kind == LineKind::context) out.push_back(l.text);
      ++cursor;
    }
    if (cursor == old_lines.size()) final_newline = !h.new_missing_newline;
  }
  while (cursor < old_lines.size()) out.emplace_back(old_lines[cursor++]);

  std::string result;
  for (std::size_t i = 0; i < out.size(); ++i) {
    result += out[i];
    if (i + 1 < out.size() || final_newline) result += '\n';
  }
  return result;
}

std::string_view to_string(Side side) { return side == Side::deleted ? "deleted" : "added"; }

Side side_from_string(std::string_view s) {
  if (s == "deleted") return Side::deleted;
  if (s == "added") return Side::added;
  throw Error("unknown origin '" + std::string(s) + "'");
}

namespace {

std::string normalize_space(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

}  // namespace

VrStatements extract_vr_stmts(const DiffDocument& doc) {
  VrStatements s;
  for (const FileDiff& fd : doc.file_diffs) {
    std::vector<std::pair<VrStmt, std::string>> del;
    std::vector<std::pair<VrStmt, std::string>> add;
    for (const Hunk& h : fd.hunks) {
      LineCommentStripper old_side;
      LineCommentStripper new_side;
      for (const HunkLine& l : h.lines) {
        std::string old_code;
        std::string new_code;
        if (l.kind != LineKind::added) old_code = normalize_space(old_side.code_part(l.text));
        if (l.kind != LineKind::deleted) new_code = normalize_space(new_side.code_part(l.text));
        if (l.kind == LineKind::deleted && !old_code.empty() && fd.old_path != "/dev/null") {
          del.push_back({{fd.old_path, l.old_line, l.text}, old_code});
        } else if (l.kind == LineKind::added && !new_code.empty() && fd.new_path != "/dev/null") {
          add.push_back({{fd.new_path, l.new_line, l.text}, new_code});
        }
      }
    }
    std::vector<bool> paired(add.size(), false);
    for (const auto& [d, code] : del) {
      for (std::size_t k = 0; k < add.size(); ++k) {
        if (!paired[k] && add[k].second == code) {
          paired[k] = true;
          s.moved.push_back({d, add[k].first});
          break;
        }
      }
    }
    for (auto& [d, code] : del) s.deleted.insert(d);
    for (auto& [a, code] : add) s.added.insert(a);
  }
  return s;
}

namespace {

void collect_vars(const std::set<VrStmt>& stmts, Side origin, const UnitMap& units, VrVariables& out) {
  for (const VrStmt& st : stmts) {
    auto u = units.find(st.file);
    if (u == units.end()) {
      out.diagnostics.push_back({st.file, st.line,
                                 std::string("no ") + (origin == Side::deleted ? "vulnerable" : "patched") +
                                     " source for this file"});
      continue;
    }
    const SourceUnit& unit = u->second;
    if (const FunctionUnit* fn = unit.function_at(st.line)) {
      for (const auto& occ : fn->variable_occurrences) {
        if (occ.line == st.line) out.entries.insert({st.file, fn->name, occ.name, origin});
      }
      continue;
    }
    // Outside every function: fall back to the identifiers on the line.
    std::set<std::string> names;
    try {
      const LexResult lex = tokenize(st.text, st.file);
      for (std::size_t i = 0; i < lex.tokens.size(); ++i) {
        const Token& t = lex.tokens[i];
        if (!t.is_identifier() || is_keyword(t.text) || is_macro_like(t.text)) continue;
        if (i + 1 < lex.tokens.size() && lex.tokens[i + 1].is("(")) continue;
        if (i > 0 && (lex.tokens[i - 1].is(".") || lex.tokens[i - 1].is("->"))) continue;
        if (unit.find_function(t.text) != nullptr) continue;
        names.insert(t.text);
      }
    } catch (const ParseError&) {
      // a fragment such as the opening of a block comment
    }
    if (names.empty()) continue;
    out.diagnostics.push_back({st.file, st.line, "changed line lies outside every function"});
    for (const auto& n : names) out.entries.insert({st.file, std::string(kFileScope), n, origin});
  }
}

}  // namespace

VrVariables extract_vr_vars(const VrStatements& stmts, const UnitMap& vulnerable, const UnitMap& patched) {
  VrVariables vars;
  collect_vars(stmts.deleted, Side::deleted, vulnerable, vars);
  collect_vars(stmts.added, Side::added, patched, vars);
  return vars;
}

}  // namespace srcvul
