#include "demo.hpp"

#include "salflow/dynsal.hpp"

#include <sstream>

namespace salflow::cli {

namespace {

double masked_mean(const std::vector<SaliencyMap>& maps, const std::vector<Plane>& masks,
                   const std::vector<int>& frames) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int t : frames) {
    const auto st = static_cast<std::size_t>(t);
    const auto m = masks[st].values();
    const auto v = maps[st].values.values();
    for (std::size_t k = 0; k < m.size(); ++k)
      if (m[k] > 0.0) {
        sum += v[k];
        ++count;
      }
  }
  if (count == 0) throw ValidationError("occlusion scene selects no pixels");
  return sum / static_cast<double>(count);
}

}  // namespace

OcclusionComparison compare_occlusion(const SceneSpec& spec, const SolverConfig& config,
                                      const SaliencyProvider& provider,
                                      bool with_complemented_baseline) {
  if (spec.objects.empty() || spec.occluders.empty())
    throw ValidationError("occlusion comparison needs an object and an occluder");
  const RenderedScene scene = render(spec);
  const OcclusionFrames frames = occlusion_frames(spec, spec.objects[0], spec.occluders[0]);
  const ComplementedSequence complemented =
      complement(scene.sequence, compute_sequence_saliency(scene.sequence, provider));

  OcclusionComparison out;
  const int samples = spec.frames - 1;
  for (int t : frames.hidden)
    if (t < samples) out.hidden_frames.push_back(t);
  if (out.hidden_frames.empty() || frames.overlap.empty() || frames.overlap.front() == 0)
    throw ValidationError("occlusion scene needs visible frames before a full occlusion");
  std::vector<int> before;
  for (int t = 0; t < frames.overlap.front(); ++t) before.push_back(t);

  out.spatiotemporal = solve_sequence(complemented, config);
  out.two_frame = two_frame_baseline(strip_saliency(complemented), config);
  const DynamicSaliencySequence st = magnitude(out.spatiotemporal.flow);
  const DynamicSaliencySequence tf = magnitude(out.two_frame.flow);

  out.pre_spatiotemporal = masked_mean(st.raw, scene.object_mask, before);
  out.pre_two_frame = masked_mean(tf.raw, scene.object_mask, before);
  out.occluded_spatiotemporal = masked_mean(st.raw, scene.hidden_mask, out.hidden_frames);
  out.occluded_two_frame = masked_mean(tf.raw, scene.hidden_mask, out.hidden_frames);
  if (with_complemented_baseline) {
    const SolveResult tfc = two_frame_baseline(complemented, config);
    out.occluded_two_frame_complemented =
        masked_mean(magnitude(tfc.flow).raw, scene.hidden_mask, out.hidden_frames);
  }

  const FixationMatrix fixations =
      rasterize_fixations(scene.fixations, spec.frame_rate, spec.width, spec.height, spec.frames);
  const std::vector<ScoreCurve> curves = score_models(
      {{"spatiotemporal", raw_planes(st)}, {"two-frame", raw_planes(tf)}}, fixations,
      out.hidden_frames);
  out.spatiotemporal_scores = curves[0];
  out.two_frame_scores = curves[1];
  return out;
}

std::string format_occlusion_report(const SceneSpec& spec, const SolverConfig& config,
                                    const OcclusionComparison& r) {
  std::ostringstream o;
  o.precision(6);
  o << "# occlusion comparison: spatio-temporal (complemented) vs two-frame (image only)\n";
  o << "seed = " << spec.seed << "\nlambda = " << config.lambda << "\nalpha = " << config.alpha
    << "\nhidden_frames =";
  for (int t : r.hidden_frames) o << ' ' << t;
  o << "\npre_magnitude_spatiotemporal = " << r.pre_spatiotemporal
    << "\npre_magnitude_two_frame = " << r.pre_two_frame
    << "\noccluded_magnitude_spatiotemporal = " << r.occluded_spatiotemporal
    << "\noccluded_magnitude_two_frame = " << r.occluded_two_frame
    << "\noccluded_magnitude_two_frame_complemented = " << r.occluded_two_frame_complemented
    << "\noccluded_to_pre_ratio = " << r.ratio()
    << "\nmean_auc_spatiotemporal = " << r.spatiotemporal_scores.mean_auc
    << "\nmean_auc_two_frame = " << r.two_frame_scores.mean_auc
    << "\nmean_nss_spatiotemporal = " << r.spatiotemporal_scores.mean_nss
    << "\nmean_nss_two_frame = " << r.two_frame_scores.mean_nss << '\n';
  const auto line = [&](bool ok, const char* what) {
    o << "assert " << what << " = " << (ok ? "PASS" : "FAIL") << '\n';
  };
  line(r.magnitude_holds(), "occluded_magnitude >= 0.25 * pre_magnitude");
  line(r.ordering_holds(), "occluded_magnitude spatiotemporal > two_frame");
  line(r.auc_holds(), "occlusion_auc spatiotemporal > two_frame");
  return o.str();
}

}  // namespace salflow::cli
