#include "srcvul/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace srcvul {

std::size_t AnalyzedTree::function_count() const {
  std::size_t n = 0;
  for (const auto& [path, unit] : units) n += unit.functions.size();
  return n;
}

bool is_source_file(const std::filesystem::path& p) {
  static const std::set<std::string> exts = {".c",  ".h",   ".cc",  ".cpp", ".cxx", ".c++",
                                             ".hh", ".hpp", ".hxx", ".h++", ".inl", ".ipp"};
  std::string ext = p.extension().string();
  if (ext == ".C" || ext == ".H") return true;
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return exts.contains(ext);
}

namespace {

struct ParseOutcome {
  std::optional<SourceUnit> unit;
  Diagnostic failure;
};

ParseOutcome parse_one(const std::string& path, const std::string& text) {
  try {
    return {parse_source(text, path), {}};
  } catch (const Error& e) {
    return {std::nullopt, {path, 0, std::string("skipped: ") + e.what()}};
  }
}

AnalyzedTree finish(std::vector<std::pair<std::string, ParseOutcome>> parsed, Diagnostics diags) {
  AnalyzedTree tree;
  tree.diagnostics = std::move(diags);
  for (auto& [path, outcome] : parsed) {
    if (!outcome.unit) {
      tree.diagnostics.push_back(std::move(outcome.failure));
      continue;
    }
    SourceUnit& u = *outcome.unit;
    tree.diagnostics.insert(tree.diagnostics.end(), u.diagnostics.begin(), u.diagnostics.end());
    if (u.functions.empty()) tree.diagnostics.push_back({path, 0, "no function definitions found"});
    for (const auto& fn : u.functions) tree.module_sizes[{path, fn.name}] = fn.module_size();
    ProfileSet p = compute_slice_profiles(u);
    tree.profiles.merge(p);
    tree.units.emplace(path, std::move(u));
  }
  std::vector<const SourceUnit*> ptrs;
  for (const auto& [path, u] : tree.units) ptrs.push_back(&u);
  FinalPassResult fp = final_pass(std::move(tree.profiles), ptrs);
  tree.profiles = std::move(fp.profiles);
  tree.call_graph = std::move(fp.call_graph);
  return tree;
}

template <typename Job>
std::vector<std::pair<std::string, ParseOutcome>> run_parallel(const std::vector<std::string>& keys, Job job) {
  std::vector<std::pair<std::string, ParseOutcome>> out(keys.size());
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<void>> running;
  for (std::size_t w = 0; w < workers && w < keys.size(); ++w) {
    running.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < keys.size(); i += workers) out[i] = {keys[i], job(keys[i])};
    }));
  }
  for (auto& f : running) f.get();
  return out;
}

}  // namespace

AnalyzedTree analyze_tree(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::exists(root, ec)) throw NotFoundError("no such file or directory: " + root.string());

  Diagnostics diags;
  std::map<std::string, fs::path> files;
  if (fs::is_regular_file(root)) {
    files.emplace(root.filename().generic_string(), root);
  } else {
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw NotFoundError("cannot read directory " + root.string() + ": " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (ec) {
        diags.push_back({root.string(), 0, "directory walk: " + ec.message()});
        break;
      }
      if (it->is_regular_file() && is_source_file(it->path())) {
        files.emplace(fs::relative(it->path(), root).generic_string(), it->path());
      }
    }
  }
  std::vector<std::string> keys;
  for (const auto& [rel, abs] : files) keys.push_back(rel);
  auto parsed = run_parallel(keys, [&](const std::string& rel) -> ParseOutcome {
    std::ifstream in(files.at(rel), std::ios::binary);
    if (!in) return {std::nullopt, {rel, 0, "skipped: cannot read file"}};
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_one(rel, ss.str());
  });
  return finish(std::move(parsed), std::move(diags));
}

AnalyzedTree analyze_sources(const std::map<std::string, std::string>& files) {
  std::vector<std::string> keys;
  for (const auto& [path, text] : files) keys.push_back(path);
  auto parsed = run_parallel(keys, [&](const std::string& path) { return parse_one(path, files.at(path)); });
  return finish(std::move(parsed), {});
}

std::map<Criterion, CompleteSlice> slice_all(const AnalyzedTree& tree) {
  std::map<Criterion, CompleteSlice> out;
  for (const auto& [key, profile] : tree.profiles) {
    out.emplace(key, compose_complete_slice(key, tree.profiles, tree.call_graph));
  }
  return out;
}

}  // namespace srcvul
