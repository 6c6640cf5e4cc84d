#include "salflow/types.hpp"

#include <algorithm>
#include <cmath>

namespace salflow {

int channel_count(Layout layout) {
  switch (layout) {
    case Layout::kGray: return 1;
    case Layout::kGraySaliency: return 2;
    case Layout::kColor: return 3;
    case Layout::kColorSaliency: return 4;
  }
  return 0;
}

bool has_saliency(Layout layout) {
  return layout == Layout::kGraySaliency || layout == Layout::kColorSaliency;
}

Layout image_layout(Layout layout) {
  switch (layout) {
    case Layout::kGraySaliency: return Layout::kGray;
    case Layout::kColorSaliency: return Layout::kColor;
    default: return layout;
  }
}

Layout with_saliency(Layout layout) {
  switch (layout) {
    case Layout::kGray: return Layout::kGraySaliency;
    case Layout::kColor: return Layout::kColorSaliency;
    default: return layout;
  }
}

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::kGray: return "gray";
    case Layout::kGraySaliency: return "gray+saliency";
    case Layout::kColor: return "color";
    case Layout::kColorSaliency: return "color+saliency";
  }
  return "?";
}

Layout parse_layout(std::string_view text) {
  if (text == "gray") return Layout::kGray;
  if (text == "gray+saliency") return Layout::kGraySaliency;
  if (text == "color" || text == "hsv") return Layout::kColor;
  if (text == "color+saliency" || text == "hsv+saliency") return Layout::kColorSaliency;
  throw ValidationError("unknown layout '" + std::string(text) + "'");
}

ComplementedSequence::ComplementedSequence(std::vector<Frame> frames, Layout layout)
    : frames_(std::move(frames)), layout_(layout) {
  if (frames_.size() < 2) throw ValidationError("sequence needs at least two frames");
  const int expected = salflow::channel_count(layout_);
  const int w = frames_.front().width();
  const int h = frames_.front().height();
  if (w < 1 || h < 1) throw ValidationError("empty frame");
  for (std::size_t t = 0; t < frames_.size(); ++t) {
    const Frame& f = frames_[t];
    if (f.channel_count() != expected)
      throw ValidationError("frame " + std::to_string(t) + " has " +
                            std::to_string(f.channel_count()) + " channels, layout " +
                            std::string(to_string(layout_)) + " needs " +
                            std::to_string(expected));
    for (const Plane& p : f.channels)
      if (p.width() != w || p.height() != h)
        throw ValidationError("frame " + std::to_string(t) + " dimension mismatch");
  }
}

FlowField FlowField::zeros(int width, int height, int samples) {
  FlowField flow;
  flow.frames.assign(static_cast<std::size_t>(samples),
                     FlowFrame{Plane(width, height), Plane(width, height)});
  return flow;
}

Plane normalize_unit_range(const Plane& plane) {
  if (plane.empty()) return plane;
  const auto [lo, hi] = std::minmax_element(plane.values().begin(), plane.values().end());
  const double min = *lo;
  const double range = *hi - min;
  Plane out(plane.width(), plane.height());
  if (!(range > 0.0)) return out;
  auto src = plane.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - min) / range;
  return out;
}

SaliencyMap to_unit_range(const SaliencyMap& map) {
  if (map.state == Normalization::kUnitRange) return map;
  return {normalize_unit_range(map.values), Normalization::kUnitRange};
}

SaliencyMap to_z_scored(const SaliencyMap& map) {
  auto v = map.values.values();
  if (v.empty()) throw NumericalError("NSS undefined: empty saliency map");
  // Exact test first: the rounded mean of a constant map can leave a tiny
  // nonzero variance.
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); }))
    throw NumericalError("NSS undefined: saliency map is constant");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw NumericalError("NSS undefined: saliency map has zero standard deviation");
  SaliencyMap out{Plane(map.values.width(), map.values.height()), Normalization::kZScored};
  auto dst = out.values.values();
  for (std::size_t i = 0; i < v.size(); ++i) dst[i] = (v[i] - mean) / sd;
  return out;
}

Plane gray_of(const Frame& frame, int image_channels) {
  if (image_channels < 1 || image_channels > frame.channel_count())
    throw ValidationError("invalid image channel count");
  if (image_channels == 1) return frame.channels.front();
  Plane out(frame.width(), frame.height());
  auto dst = out.values();
  for (int c = 0; c < image_channels; ++c) {
    auto src = frame.channels[static_cast<std::size_t>(c)].values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  for (double& x : dst) x /= static_cast<double>(image_channels);
  return out;
}

}  // namespace salflow
