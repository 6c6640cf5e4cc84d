#pragma once

#include "salflow/eval.hpp"
#include "salflow/saliency.hpp"
#include "salflow/solver.hpp"
#include "salflow/synth.hpp"

#include <string>
#include <vector>

namespace salflow::cli {

/// Paired spatio-temporal vs two-frame run on an occluder scene.
struct OcclusionComparison {
  std::vector<int> hidden_frames;  // scored transition indices
  // Mean flow magnitude over object pixels before the occlusion starts.
  double pre_spatiotemporal = 0.0;
  double pre_two_frame = 0.0;
  // Mean flow magnitude over hidden object pixels during the occlusion.
  double occluded_spatiotemporal = 0.0;
  double occluded_two_frame = 0.0;
  // Two-frame windows on the complemented data, reported for reference only.
  double occluded_two_frame_complemented = 0.0;
  ScoreCurve spatiotemporal_scores;
  ScoreCurve two_frame_scores;
  SolveResult spatiotemporal;
  SolveResult two_frame;

  double ratio() const { return occluded_spatiotemporal / pre_spatiotemporal; }
  bool magnitude_holds() const { return ratio() >= 0.25; }
  bool ordering_holds() const { return occluded_spatiotemporal > occluded_two_frame; }
  bool auc_holds() const { return spatiotemporal_scores.mean_auc > two_frame_scores.mean_auc; }
};

/// The spatio-temporal model runs on the saliency-complemented sequence, the
/// baseline on image channels only (a plain two-frame flow).
OcclusionComparison compare_occlusion(const SceneSpec& spec, const SolverConfig& config,
                                      const SaliencyProvider& provider,
                                      bool with_complemented_baseline = true);

std::string format_occlusion_report(const SceneSpec& spec, const SolverConfig& config,
                                    const OcclusionComparison& result);

}  // namespace salflow::cli
