#pragma once

#include <vector>

#include "srcvul/analysis.hpp"
#include "srcvul/diff_analysis.hpp"
#include "srcvul/vulndb.hpp"

namespace srcvul {

struct IngestResult {
  std::vector<VulnRecord> records;
  std::size_t vr_stmts = 0;
  std::size_t vr_vars = 0;
  Diagnostics diagnostics;
};

/// Turns one vulnerability fix into database records: vr_stmts from the
/// diff, vr_vars resolved in the vulnerable (deleted side) and patched
/// (added side) trees, then one record per variable whose slice yields a
/// valid vector. Every record carries the whole diff as its patch.
IngestResult ingest_cve(const DiffDocument& doc, const AnalyzedTree& vulnerable, const AnalyzedTree& patched,
                        const CategoryTable& table = CategoryTable::standard());

}  // namespace srcvul
