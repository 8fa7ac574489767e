#pragma once

#include <array>
#include <map>
#include <string>

#include "srcvul/common.hpp"
#include "srcvul/slicer.hpp"

namespace srcvul {

struct SliceMetrics {
  double sc = 0;    // contributing profiles / module size
  int sz = 0;       // distinct slice lines, other functions included
  double scvg = 0;  // sz / module size
  double si = 0;    // unique identifiers / module size
  double ss = 0;    // span of the slice inside its own function / module size
};

/// ⟨SC, SCvg, SI, SS⟩ in this order.
struct SlicingVector {
  std::array<double, 4> dims{};

  double sc() const { return dims[0]; }
  double scvg() const { return dims[1]; }
  double si() const { return dims[2]; }
  double ss() const { return dims[3]; }

  bool is_zero() const { return dims[0] == 0 && dims[1] == 0 && dims[2] == 0 && dims[3] == 0; }
  friend bool operator==(const SlicingVector&, const SlicingVector&) = default;
};

std::string to_string(const SlicingVector& v);

/// Throws MetricsError when module_size < 1 or the slice has no lines.
SliceMetrics compute_metrics(const CompleteSlice& slice, int module_size);

/// Throws MetricsError for an all-zero or non-finite tuple.
SlicingVector encode_vector(const SliceMetrics& m);

struct VectorSet {
  std::map<Criterion, SlicingVector> vectors;
  Diagnostics diagnostics;
};

/// One vector per slice whose function has a module size; the rest are
/// reported in diagnostics.
VectorSet generate_vs_vectors(const std::map<Criterion, CompleteSlice>& slices,
                              const std::map<FunctionKey, int>& module_sizes);

}  // namespace srcvul
