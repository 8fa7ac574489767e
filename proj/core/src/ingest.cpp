#include "srcvul/ingest.hpp"

#include "srcvul/metrics.hpp"

namespace srcvul {

IngestResult ingest_cve(const DiffDocument& doc, const AnalyzedTree& vulnerable, const AnalyzedTree& patched,
                        const CategoryTable& table) {
  IngestResult out;
  out.diagnostics = doc.diagnostics;
  const VrStatements stmts = extract_vr_stmts(doc);
  out.vr_stmts = stmts.count();
  VrVariables vars = extract_vr_vars(stmts, vulnerable.units, patched.units);
  out.vr_vars = vars.entries.size();
  out.diagnostics.insert(out.diagnostics.end(), vars.diagnostics.begin(), vars.diagnostics.end());
  const VulnCategory category = table.classify(doc.description, doc.patch_text);

  for (const VrVar& v : vars.entries) {
    const AnalyzedTree& tree = v.origin == Side::deleted ? vulnerable : patched;
    const Criterion crit{v.file, v.function, v.variable};
    if (v.function == kFileScope) {
      out.diagnostics.push_back({v.file, 0, "'" + v.variable + "' lies outside every function; no record"});
      continue;
    }
    auto size = tree.module_sizes.find({v.file, v.function});
    if (size == tree.module_sizes.end() || !tree.profiles.contains(crit)) {
      out.diagnostics.push_back({v.file, 0, "no slice profile for " + to_string(crit)});
      continue;
    }
    try {
      const CompleteSlice slice = compose_complete_slice(crit, tree.profiles, tree.call_graph);
      VulnRecord r;
      r.vector = encode_vector(compute_metrics(slice, size->second));
      r.cve_id = doc.cve_id;
      r.description = doc.description;
      r.project = doc.project;
      r.version = doc.version;
      r.criterion = crit;
      r.slice_lines = slice.lines;
      r.patch = doc.patch_text;
      r.origin = v.origin;
      r.category = category;
      r.record_id = compute_record_id(r);
      out.records.push_back(std::move(r));
    } catch (const MetricsError& e) {
      out.diagnostics.push_back({v.file, 0, std::string(e.what()) + "; no record"});
    }
  }
  return out;
}

}  // namespace srcvul
