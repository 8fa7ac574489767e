#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "srcvul/metrics.hpp"

namespace srcvul {

struct LshParams {
  int planes_per_band = 4;
  int bands = 8;
  std::uint64_t seed = 42;

  static constexpr int max_bits = 256;

  /// Throws LshError unless planes_per_band ≥ 1, bands ≥ 1 and the total
  /// bit count fits in max_bits.
  void validate() const;
  friend bool operator==(const LshParams&, const LshParams&) = default;
};

/// dot(a, b) / (|a| |b|). Throws LshError when either vector is zero.
double cosine_similarity(const SlicingVector& a, const SlicingVector& b);

/// Random-hyperplane LSH over slicing vectors: signature bit i is the sign
/// of the projection on hyperplane i, hyperplanes are standard Gaussian
/// draws from the seed, and a band's bits form its bucket key. Queries
/// return candidates only; callers verify with the exact cosine.
class LshIndex {
 public:
  using Signature = std::bitset<LshParams::max_bits>;

  explicit LshIndex(LshParams params = {});
  LshIndex(const LshIndex& other);
  LshIndex& operator=(const LshIndex& other);
  LshIndex(LshIndex&&) noexcept = default;
  LshIndex& operator=(LshIndex&&) noexcept = default;

  /// Throws LshError for empty input or a zero vector (naming its id).
  static LshIndex build(const std::map<std::string, SlicingVector>& entries, LshParams params = {});

  /// Re-inserting an id replaces its vector.
  void insert(const std::string& id, const SlicingVector& v);

  using Entry = std::map<std::string, SlicingVector>::value_type;

  /// Union of the probe's bucket in every band.
  std::set<std::string> query(const SlicingVector& probe) const;
  /// Same candidates as query(), as pointers into vectors(), in no
  /// particular order. Invalidated by the next insert.
  std::vector<const Entry*> candidates(const SlicingVector& probe) const;

  Signature signature(const SlicingVector& v) const;
  Signature band_key(const Signature& sig, int band) const;

  const LshParams& params() const { return params_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.contains(id); }
  const std::map<std::string, SlicingVector>& vectors() const { return vectors_; }
  /// Number of ids stored in band `band`, summed over its buckets.
  std::size_t band_population(int band) const;
  std::size_t bucket_count(int band) const { return tables_.at(band).size(); }

 private:
  void erase_from_tables(const Entry* entry, const Signature& sig);

  LshParams params_;
  std::vector<std::array<double, 4>> planes_;
  std::vector<std::unordered_map<Signature, std::vector<const Entry*>>> tables_;
  std::map<std::string, SlicingVector> vectors_;
};

}  // namespace srcvul
