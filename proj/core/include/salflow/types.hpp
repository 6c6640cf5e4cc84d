#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace salflow {

// Error categories surfaced by the CLI as distinct exit codes.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major plane of doubles.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, double fill = 0.0)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width < 0 || height < 0) throw ValidationError("negative plane dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int x, int y) { return data_[index(x, y)]; }
  double operator()(int x, int y) const { return data_[index(x, y)]; }

  /// Replicate (nearest-edge) boundary access.
  double clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return data_[index(x, y)];
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Plane& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Multi-channel frame; values normalized to [0,1].
struct Frame {
  std::vector<Plane> channels;

  int width() const { return channels.empty() ? 0 : channels.front().width(); }
  int height() const { return channels.empty() ? 0 : channels.front().height(); }
  int channel_count() const { return static_cast<int>(channels.size()); }

  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class Layout { kGray, kGraySaliency, kColor, kColorSaliency };

int channel_count(Layout layout);
bool has_saliency(Layout layout);
/// Layout of the image channels with the saliency channel removed.
Layout image_layout(Layout layout);
Layout with_saliency(Layout layout);
std::string_view to_string(Layout layout);
/// Accepts gray, gray+saliency, color, color+saliency. "hsv" and "hsv+saliency"
/// map onto the color layouts (no colorspace conversion is applied).
Layout parse_layout(std::string_view text);

/// The (virtual) multi-channel movie: T >= 2 frames, saliency is the last channel.
class ComplementedSequence {
 public:
  ComplementedSequence() = default;
  ComplementedSequence(std::vector<Frame> frames, Layout layout);

  const std::vector<Frame>& frames() const { return frames_; }
  const Frame& frame(int t) const { return frames_.at(static_cast<std::size_t>(t)); }
  Layout layout() const { return layout_; }
  int frame_count() const { return static_cast<int>(frames_.size()); }
  int width() const { return frames_.empty() ? 0 : frames_.front().width(); }
  int height() const { return frames_.empty() ? 0 : frames_.front().height(); }
  int channel_count() const { return salflow::channel_count(layout_); }
  /// Index of the saliency channel, or -1.
  int saliency_channel() const { return has_saliency(layout_) ? channel_count() - 1 : -1; }
  int image_channel_count() const {
    return has_saliency(layout_) ? channel_count() - 1 : channel_count();
  }

 private:
  std::vector<Frame> frames_;
  Layout layout_ = Layout::kGray;
};

/// Flow vector field of one time sample, in pixels per frame step.
struct FlowFrame {
  Plane u1;
  Plane u2;

  int width() const { return u1.width(); }
  int height() const { return u1.height(); }
  friend bool operator==(const FlowFrame&, const FlowFrame&) = default;
};

/// One FlowFrame per frame transition t = 0..T-2.
struct FlowField {
  std::vector<FlowFrame> frames;
  /// Optional per-frame validity masks (1 valid, 0 unknown); empty when all valid.
  std::vector<Plane> valid;

  int time_samples() const { return static_cast<int>(frames.size()); }
  int width() const { return frames.empty() ? 0 : frames.front().width(); }
  int height() const { return frames.empty() ? 0 : frames.front().height(); }

  static FlowField zeros(int width, int height, int samples);
};

enum class Normalization { kRaw, kUnitRange, kZScored };

struct SaliencyMap {
  Plane values;
  Normalization state = Normalization::kRaw;
};

/// Min-max normalize to [0,1]; a constant plane maps to all zeros.
Plane normalize_unit_range(const Plane& plane);
SaliencyMap to_unit_range(const SaliencyMap& map);
/// Zero mean, unit population standard deviation. Throws NumericalError when
/// the standard deviation is zero.
SaliencyMap to_z_scored(const SaliencyMap& map);

/// Per-pixel gray value as the mean of the frame's image channels.
Plane gray_of(const Frame& frame, int image_channels);

}  // namespace salflow
