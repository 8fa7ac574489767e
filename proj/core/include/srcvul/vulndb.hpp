#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "srcvul/common.hpp"
#include "srcvul/diff_analysis.hpp"
#include "srcvul/metrics.hpp"

namespace srcvul {

enum class VulnCategory {
  MemoryManagement,
  ApiMisuse,
  InputHandling,
  AuthorizationFlaw,
  ArithmeticLogic,
  Concurrency,
  Uncategorized
};

std::string_view to_string(VulnCategory c);
/// Throws Error for an unknown label.
VulnCategory category_from_string(std::string_view s);

/// Ordered keyword rules, first hit wins.
class CategoryTable {
 public:
  struct Rule {
    VulnCategory category = VulnCategory::Uncategorized;
    std::vector<std::string> keywords;
  };

  static CategoryTable from_json(const nlohmann::json& j);
  /// Throws Error when the file cannot be read or parsed.
  static CategoryTable load(const std::filesystem::path& path);
  /// The shipped table: $SRCVUL_CATEGORIES, else the source tree's copy,
  /// else the installed copy.
  static const CategoryTable& standard();
  static std::filesystem::path standard_path();

  VulnCategory classify(std::string_view description, std::string_view patch_text) const;
  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;
};

/// categorize() with the standard table.
VulnCategory categorize(std::string_view description, std::string_view patch_text);

struct VulnRecord {
  std::string record_id;
  SlicingVector vector;
  std::string cve_id;
  std::string description;
  std::string project;
  std::string version;
  Criterion criterion;
  std::set<int> slice_lines;
  std::string patch;
  Side origin = Side::deleted;
  VulnCategory category = VulnCategory::Uncategorized;

  friend bool operator==(const VulnRecord&, const VulnRecord&) = default;
};

/// Content-derived id: SHA-256 over vector, cve_id, criterion and origin,
/// truncated to 24 hex digits.
std::string compute_record_id(const VulnRecord& r);

/// One canonical JSON line (no trailing newline); doubles use 17
/// significant digits.
std::string serialize_record(const VulnRecord& r);
/// Throws DbError (line 0) on a schema violation.
VulnRecord parse_record(std::string_view line);

/// In-memory multi-map of records keyed by record_id, loaded from and saved
/// to a JSON-lines file whose first line is the format header.
class VulnStore {
 public:
  /// Fills in record_id, returns it. Inserting an identical record again
  /// is a no-op.
  std::string insert(VulnRecord r);

  const VulnRecord* get(std::string_view id) const;
  std::vector<const VulnRecord*> by_cve(std::string_view cve_id) const;
  /// Records within `tolerance` in every component, nearest (L2) first,
  /// ties by record_id. Throws Error for a negative tolerance.
  std::vector<const VulnRecord*> lookup_by_vector(const SlicingVector& v, double tolerance) const;

  const std::map<std::string, VulnRecord, std::less<>>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::string serialize() const;
  /// Throws DbError naming the offending line.
  static VulnStore parse(std::string_view text);
  /// Writes atomically (temporary file + rename). Throws DbError with the
  /// path on I/O failure.
  void save(const std::filesystem::path& path) const;
  static VulnStore load(const std::filesystem::path& path);

 private:
  std::map<std::string, VulnRecord, std::less<>> records_;
};

}  // namespace srcvul
