#include "properties.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "corpus.hpp"
#include "oracles.hpp"
#include "srcvul/analysis.hpp"
#include "srcvul/lsh_index.hpp"
#include "srcvul/metrics.hpp"
#include "srcvul/vulndb.hpp"

namespace testsupport {

using namespace srcvul;

namespace {

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

SlicingVector random_vector(Rng& rng) {
  SlicingVector v;
  do {
    for (double& d : v.dims) d = uniform(rng, 0, 4) == 0 ? 0.0 : unit(rng);
  } while (v.is_zero());
  return v;
}

std::string random_text(Rng& rng, int max_len) {
  static const std::vector<std::string> pieces = {"a", "Z", "0", " ", "\"", "\\", "\n", "\t", "\x01", "é", "→", "😀", "{", "}", "/"};
  std::string s;
  for (int k = uniform(rng, 0, max_len); k > 0; --k) s += pieces[uniform(rng, 0, static_cast<int>(pieces.size()) - 1)];
  return s;
}

std::string random_identifier(Rng& rng) {
  std::string s(1, static_cast<char>('a' + uniform(rng, 0, 25)));
  for (int k = uniform(rng, 0, 8); k > 0; --k) s += "abcdefghijklmnopqrstuvwxyz_0123456789"[uniform(rng, 0, 36)];
  return s;
}

std::string describe(const SlicingVector& v) {
  std::ostringstream os;
  os.precision(17);
  os << "<" << v.dims[0] << ", " << v.dims[1] << ", " << v.dims[2] << ", " << v.dims[3] << ">";
  return os.str();
}

}  // namespace

PropertyOutcome run_property(const std::string& name, int cases, const std::function<std::string(int)>& check) {
  PropertyOutcome out{name, 0, 0, {}};
  for (int k = 0; k < cases; ++k) {
    std::string msg;
    try {
      msg = check(k);
    } catch (const std::exception& e) {
      msg = std::string("exception: ") + e.what();
    }
    ++out.cases;
    if (!msg.empty()) {
      if (out.failures++ == 0) out.first_failure = "case " + std::to_string(k) + ": " + msg;
    }
  }
  return out;
}

PropertyOutcome prop_metric_scale_covariance(std::uint64_t seed, int cases) {
  return run_property("metric scale covariance", cases, [seed](int k) -> std::string {
    Rng rng(seed * 1000003 + k);
    const int m = uniform(rng, 1, 200);
    CompleteSlice s;
    s.criterion = {"f.c", "fn", "v"};
    const int start = 100;
    for (int n = uniform(rng, 1, std::min(m, 30)); n > 0; --n) s.lines.insert(start + uniform(rng, 0, m - 1));
    for (int n = uniform(rng, 0, 5); n > 0; --n) s.interprocedural_lines.insert({"g.c", uniform(rng, 1, 500)});
    s.contributing_profiles = uniform(rng, 1, 10);
    for (int n = uniform(rng, 0, 12); n > 0; --n) s.unique_identifiers.insert(random_identifier(rng));

    const SlicingVector once = encode_vector(compute_metrics(s, m));
    const SlicingVector twice = encode_vector(compute_metrics(s, 2 * m));
    const auto oracle = metrics_by_definition(s.contributing_profiles, s.lines, s.interprocedural_lines.size(),
                                              s.unique_identifiers.size(), m);
    for (int d = 0; d < 4; ++d) {
      if (once.dims[d] != oracle[d]) return "dimension " + std::to_string(d) + " differs from the definition: " + describe(once);
      if (twice.dims[d] != once.dims[d] / 2) {
        return "dimension " + std::to_string(d) + " not halved: " + describe(once) + " vs " + describe(twice);
      }
    }
    return {};
  });
}

namespace {

template <typename Check>
std::string over_random_tree(std::uint64_t seed, int k, Check check) {
  const AnalyzedTree tree = analyze_sources({{"gen.c", random_source_file(seed * 7919 + k)}});
  if (tree.profiles.empty()) return "generated file produced no profiles";
  for (const auto& [crit, slice] : slice_all(tree)) {
    std::string msg = check(tree, crit, slice);
    if (!msg.empty()) return to_string(crit) + ": " + msg;
  }
  return {};
}

}  // namespace

PropertyOutcome prop_ss_bound(std::uint64_t seed, int cases) {
  return run_property("SS upper bound", cases, [seed](int k) {
    return over_random_tree(seed, k, [](const AnalyzedTree& tree, const Criterion& c, const CompleteSlice& s) -> std::string {
      const int m = tree.module_sizes.at({c.file, c.function});
      const SliceMetrics sm = compute_metrics(s, m);
      if (sm.ss < 0) return "negative SS";
      if (sm.ss * m > m - 1 + 1e-9) return "SS·m = " + std::to_string(sm.ss * m) + " exceeds m − 1 = " + std::to_string(m - 1);
      return {};
    });
  });
}

PropertyOutcome prop_slice_exclusion(std::uint64_t seed, int cases) {
  return run_property("slice exclusion rule", cases, [seed](int k) {
    return over_random_tree(seed, k, [](const AnalyzedTree& tree, const Criterion& c, const CompleteSlice& s) -> std::string {
      const SliceProfile& p = tree.profiles.at(c);
      if (p.def_lines.empty()) return {};
      const int first_def = *p.def_lines.begin();
      if (!s.lines.empty() && *s.lines.begin() < first_def) {
        return "line " + std::to_string(*s.lines.begin()) + " precedes first def " + std::to_string(first_def);
      }
      return {};
    });
  });
}

PropertyOutcome prop_diff_round_trip(std::uint64_t seed, int cases) {
  return run_property("diff round trip", cases, [seed](int k) -> std::string {
    Rng rng(seed * 31337 + k);
    static const std::vector<std::string> vocab = {"int x = 0;", "x++;", "return x;", "}", "{", "", "\tfoo(a, b);",
                                                   "/* note */", "y = x * 2;", "--x;", "++y;", " leading space"};
    std::vector<std::string> old_lines;
    for (int n = uniform(rng, 0, 60); n > 0; --n) old_lines.push_back(vocab[uniform(rng, 0, static_cast<int>(vocab.size()) - 1)]);
    std::vector<std::string> new_lines = old_lines;
    for (int e = uniform(rng, 0, 6); e > 0; --e) {
      const int op = uniform(rng, 0, 2);
      const auto line = vocab[uniform(rng, 0, static_cast<int>(vocab.size()) - 1)] + std::to_string(uniform(rng, 0, 9));
      if (op == 0 || new_lines.empty()) {
        new_lines.insert(new_lines.begin() + uniform(rng, 0, static_cast<int>(new_lines.size())), line);
      } else if (op == 1) {
        new_lines.erase(new_lines.begin() + uniform(rng, 0, static_cast<int>(new_lines.size()) - 1));
      } else {
        new_lines[uniform(rng, 0, static_cast<int>(new_lines.size()) - 1)] = line;
      }
    }
    const std::string old_text = join_lines(old_lines), new_text = join_lines(new_lines);
    const GeneratedDiff gd = make_unified_diff(old_lines, new_lines, "src/file.c", uniform(rng, 0, 4));
    const DiffDocument doc = parse_unified_diff(gd.text);
    if (gd.hunks == 0) return doc.file_diffs.empty() ? std::string{} : "empty diff produced file diffs";
    if (doc.file_diffs.size() != 1) return "expected one file diff, got " + std::to_string(doc.file_diffs.size());
    if (replay_patch(old_text, gd.text) != new_text) return "oracle replay disagrees with the generator";
    if (apply_file_diff(old_text, doc.file_diffs[0]) != new_text) return "applying parsed hunks does not rebuild the new file";
    std::set<int> deleted, added;
    for (const auto& h : doc.file_diffs[0].hunks) {
      for (const auto& l : h.lines) {
        if (l.kind == LineKind::deleted) deleted.insert(l.old_line);
        if (l.kind == LineKind::added) added.insert(l.new_line);
      }
    }
    if (deleted != gd.deleted_old) return "deleted line numbers differ";
    if (added != gd.added_new) return "added line numbers differ";
    return {};
  });
}

PropertyOutcome prop_db_round_trip(std::uint64_t seed, int cases) {
  return run_property("database round trip", cases, [seed](int k) -> std::string {
    Rng rng(seed * 65537 + k);
    VulnStore store;
    for (int n = uniform(rng, 1, 8); n > 0; --n) {
      VulnRecord r;
      r.vector = random_vector(rng);
      char id[32];
      std::snprintf(id, sizeof id, "CVE-%04d-%05d", uniform(rng, 1999, 2030), uniform(rng, 1000, 99999));
      r.cve_id = uniform(rng, 0, 9) == 0 ? "UNTRACKED" : id;
      r.description = random_text(rng, 40);
      r.project = random_identifier(rng);
      r.version = std::to_string(uniform(rng, 0, 9)) + "." + std::to_string(uniform(rng, 0, 99));
      r.criterion = {random_identifier(rng) + "/" + random_identifier(rng) + ".c", random_identifier(rng), random_identifier(rng)};
      for (int l = uniform(rng, 1, 10); l > 0; --l) r.slice_lines.insert(uniform(rng, 1, 5000));
      if (uniform(rng, 0, 3) != 0) {
        std::vector<std::string> a = {"x", random_text(rng, 10), "y"}, b = {"x", random_text(rng, 10), "z"};
        for (auto& s : a) std::replace(s.begin(), s.end(), '\n', ' ');
        for (auto& s : b) std::replace(s.begin(), s.end(), '\n', ' ');
        r.patch = make_unified_diff(a, b, r.criterion.file).text;
      }
      r.origin = uniform(rng, 0, 1) ? Side::added : Side::deleted;
      r.category = static_cast<VulnCategory>(uniform(rng, 0, 6));
      store.insert(std::move(r));
    }
    const std::string first = store.serialize();
    const VulnStore reloaded = VulnStore::parse(first);
    if (reloaded.records() != store.records()) return "reloaded records differ";
    if (reloaded.serialize() != first) return "second serialization is not byte-identical";
    return {};
  });
}

namespace {

LshParams random_params(Rng& rng) {
  LshParams p;
  p.planes_per_band = uniform(rng, 1, 8);
  p.bands = uniform(rng, 1, LshParams::max_bits / p.planes_per_band > 16 ? 16 : LshParams::max_bits / p.planes_per_band);
  p.seed = rng();
  return p;
}

std::map<std::string, SlicingVector> random_entries(Rng& rng, int max_n) {
  std::map<std::string, SlicingVector> e;
  for (int n = uniform(rng, 1, max_n); n > 0; --n) e["r" + std::to_string(e.size())] = random_vector(rng);
  return e;
}

}  // namespace

PropertyOutcome prop_lsh_determinism(std::uint64_t seed, int cases) {
  return run_property("LSH determinism", cases, [seed](int k) -> std::string {
    Rng rng(seed * 104729 + k);
    const LshParams p = random_params(rng);
    const auto entries = random_entries(rng, 40);
    const LshIndex a = LshIndex::build(entries, p);
    const LshIndex b = LshIndex::build(entries, p);
    std::vector<std::pair<std::string, SlicingVector>> shuffled(entries.begin(), entries.end());
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    LshIndex c(p);
    for (const auto& [id, v] : shuffled) c.insert(id, v);
    for (const auto& [id, v] : entries) {
      if (a.signature(v) != b.signature(v) || a.signature(v) != c.signature(v)) return "signature of " + id + " differs";
    }
    for (int q = 0; q < 5; ++q) {
      const SlicingVector probe = random_vector(rng);
      if (a.query(probe) != b.query(probe) || a.query(probe) != c.query(probe)) return "query results differ";
    }
    for (int band = 0; band < p.bands; ++band) {
      if (a.band_population(band) != entries.size()) return "band " + std::to_string(band) + " does not hold every id once";
    }
    return {};
  });
}

PropertyOutcome prop_lsh_candidate_soundness(std::uint64_t seed, int cases) {
  return run_property("LSH candidate soundness", cases, [seed](int k) -> std::string {
    Rng rng(seed * 1299709 + k);
    const LshParams p = random_params(rng);
    const auto entries = random_entries(rng, 40);
    const LshIndex idx = LshIndex::build(entries, p);
    for (int q = 0; q < 5; ++q) {
      for (const auto& id : idx.query(random_vector(rng))) {
        if (!entries.contains(id)) return "query returned unknown id " + id;
      }
    }
    for (const auto& [id, v] : entries) {
      if (!idx.query(v).contains(id)) return "indexed vector " + id + " does not retrieve itself";
    }
    return {};
  });
}

std::vector<PropertyOutcome> run_core_properties(std::uint64_t seed, int cases) {
  return {prop_metric_scale_covariance(seed, cases), prop_ss_bound(seed, cases),
          prop_slice_exclusion(seed, cases),         prop_diff_round_trip(seed, cases),
          prop_db_round_trip(seed, cases),           prop_lsh_determinism(seed, cases),
          prop_lsh_candidate_soundness(seed, cases)};
}

}  // namespace testsupport
