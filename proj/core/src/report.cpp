#include <cstdio>
#include <sstream>

#include "srcvul/detector.hpp"

namespace srcvul {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::json criterion_json(const Criterion& c) {
  return {{"file", c.file}, {"function", c.function}, {"variable", c.variable}};
}

}  // namespace

std::string recommend_patch(const CloneMatch& m) {
  std::ostringstream os;
  os << "target:     " << to_string(m.target) << "\n";
  os << "cve:        " << m.record.cve_id << "\n";
  os << "similarity: " << fixed(m.similarity, 4) << (m.review ? " (review)" : "") << "\n";
  os << "status:     " << to_string(m.status) << "\n";
  os << "category:   " << to_string(m.record.category) << "\n";
  os << "matched:    " << to_string(m.record.criterion) << " [" << m.record.project;
  if (!m.record.version.empty()) os << " " << m.record.version;
  os << "]\n";
  if (!m.record.description.empty()) os << "summary:    " << m.record.description << "\n";
  if (m.recommended_patch.empty()) {
    os << "patch:      no-patch-available\n";
    return os.str();
  }
  os << "patch:\n" << m.recommended_patch;
  if (m.recommended_patch.back() != '\n') os << "\n";
  return os.str();
}

std::string render_text(const ScanReport& r, bool with_patches) {
  std::ostringstream os;
  const ScanStats& s = r.stats;
  os << "scanned " << s.files_parsed << " files, " << s.functions << " functions, " << s.vectors << " slice vectors\n";
  os << s.matches << " matches (" << s.vulnerable << " vulnerable, " << s.likely_patched << " likely-patched), "
     << s.candidates_examined << " candidates examined, threshold " << fixed(r.config.threshold, 2)
     << (r.config.brute_force ? ", brute force" : "") << "\n";
  for (const auto& m : r.matches) {
    os << "\n";
    if (with_patches) {
      os << recommend_patch(m);
    } else {
      os << to_string(m.status) << "  " << fixed(m.similarity, 4) << "  " << m.record.cve_id << "  "
         << to_string(m.target) << "\n";
    }
  }
  return os.str();
}

nlohmann::json to_json(const ScanReport& r) {
  nlohmann::json matches = nlohmann::json::array();
  for (const auto& m : r.matches) {
    nlohmann::json target = criterion_json(m.target);
    target["module_size"] = m.module_size;
    target["vector"] = m.target_vector.dims;
    matches.push_back({{"target", std::move(target)},
                       {"cve_id", m.record.cve_id},
                       {"record_id", m.record.record_id},
                       {"record_criterion", criterion_json(m.record.criterion)},
                       {"record_vector", m.record.vector.dims},
                       {"category", to_string(m.record.category)},
                       {"similarity", m.similarity},
                       {"status", to_string(m.status)},
                       {"review", m.review},
                       {"patch", m.recommended_patch},
                       {"patch_available", !m.recommended_patch.empty()}});
  }
  const ScanStats& s = r.stats;
  return {{"matches", std::move(matches)},
          {"stats",
           {{"files_parsed", s.files_parsed},
            {"functions", s.functions},
            {"slices", s.slices},
            {"vectors", s.vectors},
            {"candidates_examined", s.candidates_examined},
            {"matches", s.matches},
            {"vulnerable", s.vulnerable},
            {"likely_patched", s.likely_patched}}},
          {"config",
           {{"threshold", r.config.threshold},
            {"review_band", r.config.review_band},
            {"brute_force", r.config.brute_force},
            {"lsh",
             {{"bands", r.config.lsh.bands},
              {"planes", r.config.lsh.planes_per_band},
              {"seed", r.config.lsh.seed}}}}}};
}

}  // namespace srcvul
