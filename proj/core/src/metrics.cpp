#include "srcvul/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace srcvul {

std::string to_string(const SlicingVector& v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "<%.3f, %.3f, %.3f, %.3f>", v.dims[0], v.dims[1], v.dims[2], v.dims[3]);
  return buf;
}

SliceMetrics compute_metrics(const CompleteSlice& slice, int module_size) {
  if (module_size < 1) {
    throw MetricsError("degenerate module (size " + std::to_string(module_size) + ") for " +
                       to_string(slice.criterion));
  }
  if (slice.lines.empty() && slice.interprocedural_lines.empty()) {
    throw MetricsError("empty slice for " + to_string(slice.criterion));
  }
  const double m = module_size;
  SliceMetrics r;
  r.sc = slice.contributing_profiles / m;
  r.sz = static_cast<int>(slice.statement_count());
  r.scvg = r.sz / m;
  r.si = static_cast<double>(slice.unique_identifiers.size()) / m;
  r.ss = slice.lines.empty() ? 0.0 : (*slice.lines.rbegin() - *slice.lines.begin()) / m;
  return r;
}

SlicingVector encode_vector(const SliceMetrics& m) {
  SlicingVector v{{m.sc, m.scvg, m.si, m.ss}};
  for (double d : v.dims) {
    if (!std::isfinite(d) || d < 0) throw MetricsError("invalid metric value in " + to_string(v));
  }
  if (v.is_zero()) throw MetricsError("all-zero slicing vector");
  return v;
}

VectorSet generate_vs_vectors(const std::map<Criterion, CompleteSlice>& slices,
                              const std::map<FunctionKey, int>& module_sizes) {
  VectorSet out;
  for (const auto& [key, slice] : slices) {
    auto m = module_sizes.find(FunctionKey{key.file, key.function});
    if (m == module_sizes.end()) {
      out.diagnostics.push_back({key.file, 0, "no module size for " + to_string(key) + "; slice skipped"});
      continue;
    }
    try {
      out.vectors.emplace(key, encode_vector(compute_metrics(slice, m->second)));
    } catch (const MetricsError& e) {
      out.diagnostics.push_back({key.file, 0, std::string(e.what()) + "; slice skipped"});
    }
  }
  return out;
}

}  // namespace srcvul
