#include "salflow/dynsal.hpp"

#include <cmath>

namespace salflow {

Plane flow_magnitude(const FlowFrame& flow) {
  Plane out(flow.width(), flow.height());
  const auto u = flow.u1.values();
  const auto v = flow.u2.values();
  auto m = out.values();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::hypot(u[i], v[i]);
  return out;
}

DynamicSaliencySequence magnitude(const FlowField& flow) {
  DynamicSaliencySequence out;
  out.raw.resize(flow.frames.size());
  out.normalized.resize(flow.frames.size());
#pragma omp parallel for schedule(static)
  for (int t = 0; t < flow.time_samples(); ++t) {
    const auto st = static_cast<std::size_t>(t);
    out.raw[st] = {flow_magnitude(flow.frames[st]), Normalization::kRaw};
    out.normalized[st] = to_unit_range(out.raw[st]);
  }
  return out;
}

std::vector<Plane> raw_planes(const DynamicSaliencySequence& sequence) {
  std::vector<Plane> out;
  out.reserve(sequence.raw.size());
  for (const SaliencyMap& m : sequence.raw) out.push_back(m.values);
  return out;
}

}  // namespace salflow
