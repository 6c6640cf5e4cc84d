#pragma once

#include "salflow/eval.hpp"
#include "salflow/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace salflow {

struct MovingObject {
  enum class Shape { kSquare, kDisc };

  Shape shape = Shape::kSquare;
  double x = 0.0;  // top-left corner of the bounding box at frame 0
  double y = 0.0;
  int size = 8;
  double vx = 1.0;  // pixels per frame
  double vy = 0.0;
  double level = 0.75;     // mean intensity
  double contrast = 0.5;   // texture amplitude
  double chroma = 0.0;     // independent per-channel texture amplitude (color scenes)
  std::array<double, 3> tint{1.0, 1.0, 1.0};
};

/// Static vertical bar spanning the full frame height.
struct Occluder {
  int x = 0;
  int width = 3;
  double level = 0.2;
  std::array<double, 3> tint{1.0, 1.0, 1.0};
};

struct SceneSpec {
  int width = 64;
  int height = 64;
  int frames = 6;
  std::uint64_t seed = 1;
  bool color = false;
  int texture_cell = 4;            // value-noise lattice spacing in pixels
  double background_level = 0.45;
  double background_contrast = 0.6;
  double background_chroma = 0.0;  // color scenes only
  std::array<double, 3> background_tint{1.0, 1.0, 1.0};
  double noise = 0.0;              // additive Gaussian sigma
  std::vector<double> contrast_schedule;  // per frame, empty = 1
  std::vector<MovingObject> objects;
  std::vector<Occluder> occluders;
  int viewers = 0;                 // planted fixation viewers following object 0
  double fixation_jitter = 1.0;    // pixels, per viewer offset sigma
  double frame_rate = 25.0;

  /// Throws ValidationError (object leaving the frame, bad sizes, ...).
  void validate() const;
};

/// key=value lines; `object` and `occluder` may repeat and take
/// comma-separated `field:value` lists, e.g.
///   object = shape:square, x:4, y:28, size:8, vx:1, vy:0
SceneSpec parse_scene_spec(std::string_view text);
std::string format_scene_spec(const SceneSpec& spec);

struct RenderedScene {
  ComplementedSequence sequence;  // gray or color
  FlowField truth;                // per transition t, defined on frame t
  std::vector<Plane> visible;     // per frame: 0 where an object is hidden by an occluder
  std::vector<Plane> object_mask; // per frame: object support ignoring occluders
  std::vector<Plane> hidden_mask; // per frame: 1 where an object is hidden
  std::vector<std::array<double, 2>> object_center;  // object 0, per frame
  FixationSet fixations;
};

/// Deterministic for a fixed spec (including the seed).
RenderedScene render(const SceneSpec& spec);

/// Frames during which a horizontally moving object's column interval
/// [x + vx t, x + vx t + size) intersects (overlap) or lies inside (hidden)
/// the occluder's [x, x + width).
struct OcclusionFrames {
  std::vector<int> overlap;
  std::vector<int> hidden;
};
OcclusionFrames occlusion_frames(const SceneSpec& spec, const MovingObject& object,
                                 const Occluder& occluder);

/// Textured 24 px square translating (1, 0) px/frame over a 64x64, 6-frame
/// textured background. Color scenes add weak independent chroma textures.
SceneSpec translation_scene(std::uint64_t seed, bool color = false, double chroma = 0.1);

/// Small square (6 px) passing behind a 7 px bar over 20 frames, with
/// planted fixations of 8 viewers following the object center.
SceneSpec occlusion_scene(std::uint64_t seed);

/// Static textured 64x64 scene of `frames` identical frames (no noise).
SceneSpec static_scene(std::uint64_t seed, int frames = 5);

/// Value noise in [0,1] on a lattice of the given spacing, smooth (C1)
/// interpolation; `stream` selects an independent lattice for the same seed.
class ValueNoise {
 public:
  ValueNoise(int width, int height, int cell, std::uint64_t seed, std::uint64_t stream);
  double operator()(double x, double y) const;

 private:
  int cols_;
  int rows_;
  int cell_;
  std::vector<double> lattice_;
};

}  // namespace salflow
