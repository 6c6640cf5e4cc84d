#pragma once

#include "salflow/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace salflow {

struct Fixation {
  int viewer = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double x = 0.0;  // pixels, column
  double y = 0.0;  // pixels, row
};

struct FixationSet {
  std::vector<Fixation> records;
};

/// CSV with header `viewer,start_s,end_s,x,y`. Throws ValidationError with the
/// line number on malformed rows or start >= end.
FixationSet parse_fixations(std::string_view csv);
std::string format_fixations(const FixationSet& set);
FixationSet load_fixations(const std::filesystem::path& path);
void save_fixations(const FixationSet& set, const std::filesystem::path& path);

/// Per-frame boolean raster of fixated pixels.
class FixationMatrix {
 public:
  FixationMatrix() = default;
  FixationMatrix(int width, int height, int frames, double frame_rate);

  int width() const { return width_; }
  int height() const { return height_; }
  int frames() const { return static_cast<int>(marks_.size()); }
  double frame_rate() const { return frame_rate_; }

  bool at(int t, int x, int y) const { return marks_[idx(t)][pix(x, y)] != 0; }
  void mark(int t, int x, int y) { marks_[idx(t)][pix(x, y)] = 1; }
  int count(int t) const;
  /// Fixated pixels of frame t in row-major order.
  std::vector<std::pair<int, int>> positions(int t) const;
  /// Frame t as a 0/1 plane.
  Plane mask(int t) const;

 private:
  std::size_t idx(int t) const { return static_cast<std::size_t>(t); }
  std::size_t pix(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  double frame_rate_ = 25.0;
  std::vector<std::vector<std::uint8_t>> marks_;
};

/// First and last frame covered by [start_s, end_s] at the given rate:
/// floor(start * rate) .. floor(end * rate).
std::pair<int, int> fixation_frame_span(double start_s, double end_s, double frame_rate);

/// Marks every record's pixel on its frame span. Pixel coordinates are
/// floored. Throws ValidationError naming the record index when a record
/// falls outside the frame or the sequence duration.
FixationMatrix rasterize_fixations(const FixationSet& set, double frame_rate, int width,
                                   int height, int frames);

/// Number of thresholds of the ROC sweep.
inline constexpr int kAucThresholds = 100;

/// ROC area with thresholds uniformly spaced over [min, max] of the map,
/// value >= threshold counted positive, (0,0) and (1,1) appended, trapezoidal
/// integration. `fixated` is a 0/1 plane. Throws ValidationError
/// ("undefined classifier") when there are no positives or no negatives.
double auc(const Plane& map, const Plane& fixated);

/// Exact ROC area (ties counted half), the limit of auc() for infinitely many
/// thresholds.
double auc_exact(const Plane& map, const Plane& fixated);

/// Mean z-scored value at the given pixels (population standard deviation).
/// Throws NumericalError ("NSS undefined") for a constant map and
/// ValidationError for an empty position list.
double nss(const Plane& map, const std::vector<std::pair<int, int>>& positions);

/// Angular error in degrees between (u1, u2, 1) and (v1, v2, 1).
double angular_error(double u1, double u2, double v1, double v2);

/// Per-pixel angular error map.
Plane angular_error_map(const FlowFrame& flow, const FlowFrame& truth);

struct AngularErrorReport {
  std::vector<Plane> maps;  // per time sample
  double mean = 0.0;        // over valid pixels of all samples
  std::size_t valid_pixels = 0;
};

/// `valid` holds optional per-sample 0/1 masks; empty means all pixels.
AngularErrorReport average_angular_error(const FlowField& flow, const FlowField& truth,
                                         const std::vector<Plane>& valid = {});

/// Per-frame metric curves of one model.
struct ScoreCurve {
  std::string model;
  std::vector<int> frames;  // scored frame indices
  std::vector<double> auc;  // NaN where skipped
  std::vector<double> nss;  // NaN where skipped
  double mean_auc = 0.0;
  double mean_nss = 0.0;
  int skipped = 0;
};

struct ModelMaps {
  std::string name;
  std::vector<Plane> maps;  // one per frame (transition) index
};

/// Scores every model on the selected frames (all common frames when `frames`
/// is empty). Frames whose mask is degenerate are skipped and counted; a
/// constant map raises the NSS NumericalError. Means are over scored frames
/// (NaN if none).
std::vector<ScoreCurve> score_models(const std::vector<ModelMaps>& models,
                                     const FixationMatrix& fixations,
                                     const std::vector<int>& frames = {});

/// Long-format CSV: model,frame,auc,nss.
std::string format_score_curves(const std::vector<ScoreCurve>& curves);

}  // namespace salflow
