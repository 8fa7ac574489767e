#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "srcvul/common.hpp"
#include "srcvul/diff_analysis.hpp"
#include "srcvul/slicer.hpp"

namespace srcvul {

/// A parsed source tree with its slice profiles after the final pass.
struct AnalyzedTree {
  UnitMap units;  // keyed by path relative to the root, '/'-separated
  ProfileSet profiles;
  CallGraph call_graph;
  std::map<FunctionKey, int> module_sizes;
  Diagnostics diagnostics;

  std::size_t function_count() const;
};

/// C and C++ source and header extensions.
bool is_source_file(const std::filesystem::path& p);

/// Parses every source file under `root` (or `root` itself when it is a
/// file), in parallel, and runs profiling and the final pass. Files that
/// fail to tokenize are skipped with a diagnostic. Throws NotFoundError
/// when root does not exist.
AnalyzedTree analyze_tree(const std::filesystem::path& root);

/// Same pipeline over in-memory files (path → text).
AnalyzedTree analyze_sources(const std::map<std::string, std::string>& files);

/// Complete slice of every profile.
std::map<Criterion, CompleteSlice> slice_all(const AnalyzedTree& tree);

}  // namespace srcvul
