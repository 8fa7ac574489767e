#include "srcvul/detector.hpp"

#include <algorithm>

namespace srcvul {

void DetectorConfig::validate() const {
  if (!(threshold > 0 && threshold <= 1)) throw Error("threshold must lie in (0, 1]");
  if (!(review_band >= 0)) throw Error("review band must be non-negative");
  lsh.validate();
}

std::string_view to_string(MatchStatus s) {
  return s == MatchStatus::vulnerable ? "vulnerable" : "likely-patched";
}

VectorMatcher::VectorMatcher(std::map<std::string, SlicingVector> records, const DetectorConfig& config)
    : records_(std::move(records)), config_(config) {
  config_.validate();
  if (!config_.brute_force && !records_.empty()) index_ = LshIndex::build(records_, config_.lsh);
}

std::vector<std::pair<std::string, double>> VectorMatcher::match(const SlicingVector& probe,
                                                                 std::size_t* examined) const {
  std::vector<std::pair<std::string, double>> out;
  if (probe.is_zero()) return out;
  auto verify = [&](const std::string& id, const SlicingVector& v) {
    const double sim = cosine_similarity(probe, v);
    if (sim >= config_.threshold) out.emplace_back(id, sim);
  };
  if (index_) {
    const auto candidates = index_->candidates(probe);
    if (examined != nullptr) *examined += candidates.size();
    for (const auto* e : candidates) verify(e->first, e->second);
    std::sort(out.begin(), out.end());
  } else {
    if (examined != nullptr) *examined += records_.size();
    for (const auto& [id, v] : records_) verify(id, v);
  }
  return out;
}

std::map<Criterion, TargetSlice> slice_target(const AnalyzedTree& tree) {
  std::map<Criterion, TargetSlice> out;
  for (const auto& [key, profile] : tree.profiles) {
    auto m = tree.module_sizes.find({key.file, key.function});
    if (m == tree.module_sizes.end()) continue;
    out.emplace(key, TargetSlice{compose_complete_slice(key, tree.profiles, tree.call_graph), m->second});
  }
  return out;
}

std::map<Criterion, TargetSlice> slice_target(const std::filesystem::path& root, Diagnostics* diagnostics) {
  AnalyzedTree tree = analyze_tree(root);
  if (diagnostics != nullptr) *diagnostics = tree.diagnostics;
  return slice_target(tree);
}

ScanReport detect_clones(const AnalyzedTree& target, const VulnStore& db, const DetectorConfig& config) {
  config.validate();
  ScanReport report;
  report.config = config;
  report.diagnostics = target.diagnostics;
  report.stats.files_parsed = target.units.size();
  report.stats.functions = target.function_count();

  std::map<std::string, SlicingVector> deleted_side;
  std::map<std::string, std::vector<const VulnRecord*>> added_by_cve;
  for (const auto& [id, r] : db.records()) {
    if (r.origin == Side::deleted) {
      deleted_side.emplace(id, r.vector);
    } else {
      added_by_cve[r.cve_id].push_back(&r);
    }
  }
  if (db.empty()) report.diagnostics.push_back({"database", 0, "database is empty; nothing to match"});

  const auto slices = slice_target(target);
  report.stats.slices = slices.size();
  std::map<Criterion, SlicingVector> vectors;
  for (const auto& [key, ts] : slices) {
    try {
      vectors.emplace(key, encode_vector(compute_metrics(ts.slice, ts.module_size)));
    } catch (const MetricsError& e) {
      report.diagnostics.push_back({key.file, 0, std::string(e.what()) + "; slice skipped"});
    }
  }
  report.stats.vectors = vectors.size();

  const VectorMatcher matcher(std::move(deleted_side), config);
  for (const auto& [key, v] : vectors) {
    for (const auto& [id, sim] : matcher.match(v, &report.stats.candidates_examined)) {
      const VulnRecord& rec = *db.get(id);
      CloneMatch m;
      m.target = key;
      m.target_vector = v;
      m.module_size = slices.at(key).module_size;
      m.record = rec;
      m.similarity = sim;
      m.recommended_patch = rec.patch;
      m.review = sim < config.threshold + config.review_band;
      report.matches.push_back(std::move(m));
    }
  }

  // Patched-clone suppression, per (target file, CVE).
  std::map<std::pair<std::string, std::string>, double> best_vulnerable;
  for (const auto& m : report.matches) {
    auto& b = best_vulnerable[{m.target.file, m.record.cve_id}];
    b = std::max(b, m.similarity);
  }
  for (const auto& [file_cve, best] : best_vulnerable) {
    auto added = added_by_cve.find(file_cve.second);
    if (added == added_by_cve.end()) continue;
    double best_patched = 0;
    for (auto it = vectors.lower_bound({file_cve.first, "", ""}); it != vectors.end() && it->first.file == file_cve.first;
         ++it) {
      for (const VulnRecord* r : added->second) best_patched = std::max(best_patched, cosine_similarity(it->second, r->vector));
    }
    // A tie says nothing: the fix left the slice vectors unchanged.
    if (best_patched > best + 1e-12) {
      for (auto& m : report.matches) {
        if (m.target.file == file_cve.first && m.record.cve_id == file_cve.second) {
          m.status = MatchStatus::likely_patched;
        }
      }
    }
  }

  std::sort(report.matches.begin(), report.matches.end(), [](const CloneMatch& a, const CloneMatch& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.record.record_id != b.record.record_id) return a.record.record_id < b.record.record_id;
    return a.target < b.target;
  });
  report.stats.matches = report.matches.size();
  for (const auto& m : report.matches) {
    (m.status == MatchStatus::vulnerable ? report.stats.vulnerable : report.stats.likely_patched)++;
  }
  return report;
}

ScanReport detect_clones(const std::filesystem::path& target, const VulnStore& db, const DetectorConfig& config) {
  config.validate();
  return detect_clones(analyze_tree(target), db, config);
}

}  // namespace srcvul
