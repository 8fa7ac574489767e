#pragma once

#include <filesystem>
#include <string>

#include "corpus.hpp"
#include "oracles.hpp"
#include "srcvul/ingest.hpp"
#include "srcvul/source_model.hpp"

namespace testsupport {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(SRCVUL_FIXTURE_DIR) / rel; }

inline std::string fixture_text(const std::string& rel) { return read_file(fixture(rel)); }

inline srcvul::SourceUnit parse_fixture(const std::string& rel, const std::string& path) {
  return srcvul::parse_source(fixture_text(rel), path);
}

/// Database built from the CVE-2019-15214 fixture, optionally restricted to
/// records whose criterion variable is in `only`.
inline srcvul::VulnStore info_fix_db(const std::set<std::string>& only = {}) {
  const auto dir = fixture("cve-2019-15214");
  const auto doc = srcvul::parse_unified_diff(read_file(dir / "diffs/cve-2019-15214.diff"),
                                              srcvul::parse_cve_meta(read_file(dir / "diffs/cve-2019-15214.json")));
  const auto result =
      srcvul::ingest_cve(doc, srcvul::analyze_tree(dir / "vulnerable"), srcvul::analyze_tree(dir / "patched"));
  srcvul::VulnStore store;
  for (const auto& r : result.records) {
    if (only.empty() || only.contains(r.criterion.variable)) store.insert(r);
  }
  return store;
}

/// Lines 707-728 of the 4.14.76 info.c: snd_info_create_entry alone.
inline std::string fig6_snippet() {
  const auto lines = split_lines(read_file(fixture("target-4.14.76/sound/core/info.c")));
  return join_lines(std::vector<std::string>(lines.begin() + 706, lines.begin() + 728));
}

inline const char* const kInfoC = "sound/core/info.c";
inline const char* const kCveDir = "cve-2019-15214";

}  // namespace testsupport
