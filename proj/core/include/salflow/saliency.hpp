#pragma once

#include "salflow/types.hpp"

#include <string>
#include <vector>

namespace salflow {

/// Source of the static (per-frame) saliency channel.
struct SaliencyProvider {
  enum class Kind { kSpectralResidual, kExternalFiles };

  Kind kind = Kind::kSpectralResidual;
  /// Gaussian post-smoothing, in pixels of the working resolution.
  double smoothing_sigma = 3.0;
  /// The spectral residual is computed on frames resized to this width
  /// (frames that are already narrower are used as-is).
  int working_width = 64;
  /// Frame pattern whose sidecars hold the maps (external provider only).
  std::string external_pattern;
};

SaliencyProvider::Kind parse_provider_kind(const std::string& text);

/// Spectral-residual saliency of one frame's image channels: log-amplitude
/// residual against its 3x3 local mean, inverse transform with the original
/// phase, squared magnitude, Gaussian smoothing, bicubic resize back, then
/// min-max normalized. Frames without contrast give an all-zero map.
SaliencyMap spectral_residual_saliency(const Frame& frame, int image_channels,
                                       const SaliencyProvider& provider);

/// Dispatches on the provider. For external files the map of frame `index` is
/// read from the sidecar of `format_index(provider.external_pattern, index)`.
SaliencyMap compute_static_saliency(const Frame& frame, int image_channels,
                                    const SaliencyProvider& provider, int index);

/// One unit-range map per frame of a gray or color sequence.
std::vector<SaliencyMap> compute_sequence_saliency(const ComplementedSequence& sequence,
                                                   const SaliencyProvider& provider);

/// Appends one saliency channel per frame (maps are min-max normalized first):
/// gray -> gray+saliency, color -> color+saliency.
ComplementedSequence complement(const ComplementedSequence& sequence,
                                const std::vector<SaliencyMap>& maps);

/// Same image channels with the saliency channel dropped.
ComplementedSequence strip_saliency(const ComplementedSequence& sequence);

}  // namespace salflow
