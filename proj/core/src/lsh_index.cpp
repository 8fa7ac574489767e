#include "srcvul/lsh_index.hpp"

#include <algorithm>
#include <cmath>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace srcvul {

void LshParams::validate() const {
  if (planes_per_band < 1) throw LshError("hyperplanes per band must be at least 1");
  if (bands < 1) throw LshError("band count must be at least 1");
  if (static_cast<long long>(planes_per_band) * bands > max_bits) {
    throw LshError("bands x hyperplanes must not exceed " + std::to_string(max_bits) + " bits");
  }
}

double cosine_similarity(const SlicingVector& a, const SlicingVector& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    dot += a.dims[i] * b.dims[i];
    na += a.dims[i] * a.dims[i];
    nb += b.dims[i] * b.dims[i];
  }
  if (na == 0 || nb == 0) throw LshError("cosine similarity is undefined for a zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::min(1.0, std::max(-1.0, c));
}

LshIndex::LshIndex(LshParams params) : params_(params) {
  params_.validate();
  // Boost's engines and distributions give the same draws on every
  // platform, which keeps signatures stable across toolchains.
  boost::random::mt19937_64 rng(params_.seed);
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  planes_.resize(static_cast<std::size_t>(params_.bands * params_.planes_per_band));
  for (auto& p : planes_) {
    for (double& x : p) x = gauss(rng);
  }
  tables_.resize(static_cast<std::size_t>(params_.bands));
}

// Buckets point into vectors_, so a copy rehashes its own entries.
LshIndex::LshIndex(const LshIndex& other) : params_(other.params_), planes_(other.planes_) {
  tables_.resize(other.tables_.size());
  for (const auto& [id, v] : other.vectors_) insert(id, v);
}

LshIndex& LshIndex::operator=(const LshIndex& other) {
  if (this != &other) *this = LshIndex(other);
  return *this;
}

LshIndex LshIndex::build(const std::map<std::string, SlicingVector>& entries, LshParams params) {
  if (entries.empty()) throw LshError("cannot build an index from no vectors");
  LshIndex idx(params);
  for (const auto& [id, v] : entries) {
    if (v.is_zero()) throw LshError("record " + id + " has a zero vector");
    idx.insert(id, v);
  }
  return idx;
}

LshIndex::Signature LshIndex::signature(const SlicingVector& v) const {
  Signature sig;
  for (std::size_t i = 0; i < planes_.size(); ++i) {
    double dot = 0;
    for (std::size_t k = 0; k < 4; ++k) dot += planes_[i][k] * v.dims[k];
    sig[i] = dot >= 0;
  }
  return sig;
}

LshIndex::Signature LshIndex::band_key(const Signature& sig, int band) const {
  Signature key;
  const int base = band * params_.planes_per_band;
  for (int i = 0; i < params_.planes_per_band; ++i) key[i] = sig[base + i];
  return key;
}

void LshIndex::erase_from_tables(const Entry* entry, const Signature& sig) {
  for (int b = 0; b < params_.bands; ++b) {
    auto it = tables_[b].find(band_key(sig, b));
    if (it == tables_[b].end()) continue;
    std::erase(it->second, entry);
    if (it->second.empty()) tables_[b].erase(it);
  }
}

void LshIndex::insert(const std::string& id, const SlicingVector& v) {
  if (v.is_zero()) throw LshError("record " + id + " has a zero vector");
  auto [it, fresh] = vectors_.try_emplace(id, v);
  if (!fresh) {
    erase_from_tables(&*it, signature(it->second));
    it->second = v;
  }
  const Signature sig = signature(v);
  for (int b = 0; b < params_.bands; ++b) tables_[b][band_key(sig, b)].push_back(&*it);
}

std::vector<const LshIndex::Entry*> LshIndex::candidates(const SlicingVector& probe) const {
  std::vector<const Entry*> out;
  if (probe.is_zero()) return out;
  const Signature sig = signature(probe);
  for (int b = 0; b < params_.bands; ++b) {
    auto it = tables_[b].find(band_key(sig, b));
    if (it != tables_[b].end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::set<std::string> LshIndex::query(const SlicingVector& probe) const {
  std::set<std::string> out;
  for (const Entry* e : candidates(probe)) out.insert(e->first);
  return out;
}

std::size_t LshIndex::band_population(int band) const {
  std::size_t n = 0;
  for (const auto& [key, ids] : tables_.at(band)) n += ids.size();
  return n;
}

}  // namespace srcvul
