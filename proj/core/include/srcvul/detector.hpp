#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srcvul/analysis.hpp"
#include "srcvul/lsh_index.hpp"
#include "srcvul/metrics.hpp"
#include "srcvul/vulndb.hpp"

namespace srcvul {

struct DetectorConfig {
  double threshold = 0.8;
  LshParams lsh;
  bool brute_force = false;
  double review_band = 0.05;

  /// Throws Error unless 0 < threshold ≤ 1, review_band ≥ 0 and the LSH
  /// parameters are valid.
  void validate() const;
};

enum class MatchStatus { vulnerable, likely_patched };
std::string_view to_string(MatchStatus s);

struct CloneMatch {
  Criterion target;
  SlicingVector target_vector;
  int module_size = 0;
  VulnRecord record;
  double similarity = 0;
  std::string recommended_patch;
  MatchStatus status = MatchStatus::vulnerable;
  bool review = false;  // similarity falls inside the review band
};

struct ScanStats {
  std::size_t files_parsed = 0;
  std::size_t functions = 0;
  std::size_t slices = 0;
  std::size_t vectors = 0;
  std::size_t candidates_examined = 0;
  std::size_t matches = 0;
  std::size_t vulnerable = 0;
  std::size_t likely_patched = 0;
};

struct ScanReport {
  std::vector<CloneMatch> matches;  // similarity desc, record_id, target
  ScanStats stats;
  DetectorConfig config;
  Diagnostics diagnostics;

  std::size_t vulnerable_count() const { return stats.vulnerable; }
};

/// Candidate retrieval plus exact-cosine verification over a fixed set of
/// record vectors.
class VectorMatcher {
 public:
  /// Builds the LSH index unless config.brute_force is set. Throws LshError
  /// for a zero record vector.
  VectorMatcher(std::map<std::string, SlicingVector> records, const DetectorConfig& config);

  /// (record id, similarity) for every candidate at or above the
  /// threshold, in record id order. Adds the candidate count to
  /// `examined` when given.
  std::vector<std::pair<std::string, double>> match(const SlicingVector& probe,
                                                    std::size_t* examined = nullptr) const;

  bool empty() const { return records_.empty(); }

 private:
  std::map<std::string, SlicingVector> records_;
  DetectorConfig config_;
  std::optional<LshIndex> index_;
};

struct TargetSlice {
  CompleteSlice slice;
  int module_size = 0;
};

/// Slices every variable of every function in the tree.
std::map<Criterion, TargetSlice> slice_target(const AnalyzedTree& tree);
/// Throws NotFoundError when root does not exist.
std::map<Criterion, TargetSlice> slice_target(const std::filesystem::path& root, Diagnostics* diagnostics = nullptr);

/// Matches every target slice vector against the deleted-side records of
/// the database. Candidates come from the LSH index (or every record in
/// brute-force mode) and are kept when the exact cosine reaches the
/// threshold. Added-side records are evidence only: when some slice of a
/// target file resembles a CVE's patched code more closely than any slice
/// of that file resembles its vulnerable code, that file's matches for the
/// CVE are reported as likely-patched. Ties keep the vulnerable status.
ScanReport detect_clones(const AnalyzedTree& target, const VulnStore& db, const DetectorConfig& config);
ScanReport detect_clones(const std::filesystem::path& target, const VulnStore& db, const DetectorConfig& config);

/// Context block followed by the stored patch, verbatim.
std::string recommend_patch(const CloneMatch& m);

std::string render_text(const ScanReport& r, bool with_patches = true);
nlohmann::json to_json(const ScanReport& r);

}  // namespace srcvul
