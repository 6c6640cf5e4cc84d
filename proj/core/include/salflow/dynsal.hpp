#pragma once

#include "salflow/types.hpp"

#include <vector>

namespace salflow {

/// Dynamic saliency per transition time: the raw flow magnitude and, for
/// previews, its per-frame min-max normalization.
struct DynamicSaliencySequence {
  std::vector<SaliencyMap> raw;
  std::vector<SaliencyMap> normalized;

  int size() const { return static_cast<int>(raw.size()); }
};

/// Pointwise sqrt(u1^2 + u2^2) of every flow frame.
Plane flow_magnitude(const FlowFrame& flow);

DynamicSaliencySequence magnitude(const FlowField& flow);

/// Raw planes of a sequence, convenient for scoring.
std::vector<Plane> raw_planes(const DynamicSaliencySequence& sequence);

}  // namespace salflow
