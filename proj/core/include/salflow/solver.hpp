#pragma once

#include "salflow/types.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace salflow {

/// How the lagged diffusion term enters the fixed-point update.
enum class DiffusionScheme {
  /// Whole divergence evaluated on the previous iterate.
  kExplicit,
  /// Diffusivities and neighbor values from the previous iterate, the center
  /// coefficient of the stencil taken at the new iterate (pointwise solve).
  kCenterImplicit,
};

DiffusionScheme parse_diffusion_scheme(const std::string& text);
std::string to_string(DiffusionScheme scheme);

/// Where the lagged diffusivity of a stencil face comes from.
enum class FaceDiffusivity {
  /// Mean of the two cell-centered values Psi'(|grad3 u|^2).
  kAverage,
  /// Psi' of the gradient evaluated on the face itself (normal component
  /// from the two cells, tangential components averaged).
  kFace,
};

FaceDiffusivity parse_face_diffusivity(const std::string& text);
std::string to_string(FaceDiffusivity mode);

struct SolverConfig {
  double alpha = 40.0;    // regularization weight
  double lambda = 1.0;    // temporal weight inside the space-time gradient
  double tau = 1e-3;      // fixed-point step
  double xi = 0.01;       // contrast weight floor
  double epsilon = 1e-6;  // penalizer smoothing
  double tol = 0.003;     // relative change stopping tolerance
  int levels = 4;
  double scale = 0.5;
  int max_iterations = 500;  // per level
  int median_radius = 2;     // 5x5
  double presmooth_sigma = 1.0;  // 0 disables presmoothing
  int temporal_window = 0;       // frames solved jointly, 0 = whole sequence
  /// Image and saliency channels are multiplied by this before the data term
  /// is formed; the default parameters are calibrated on 8-bit code values.
  double intensity_scale = 255.0;
  DiffusionScheme scheme = DiffusionScheme::kExplicit;
  FaceDiffusivity faces = FaceDiffusivity::kFace;

  /// Throws ValidationError on out-of-range fields.
  void validate() const;
};

/// Guard added to the denominator of the relative change.
inline constexpr double kRelativeChangeGuard = 1e-8;

// Penalizer sqrt(s + eps^2) of a squared gradient norm s, and its derivative.
inline double psi(double s, double epsilon) { return std::sqrt(s + epsilon * epsilon); }
inline double psi_prime(double s, double epsilon) {
  return 0.5 / std::sqrt(s + epsilon * epsilon);
}

/// Per frame, per channel data-term weights.
struct WeightField {
  std::vector<std::vector<Plane>> b;  // [frame][channel]
};

/// Saliency layouts: image channel i gets s / sqrt(|grad f_i|^2 + xi^2) and the
/// saliency channel 1. Layouts without saliency: every channel gets
/// 1 / sqrt(|grad f_i|^2 + xi^2). Gradients are taken of `intensity_scale * f_i`,
/// the multiplying saliency s stays in [0,1].
WeightField compute_weights(const ComplementedSequence& sequence, double xi,
                            double intensity_scale = 1.0);

/// Spatial Gaussian smoothing of every channel of every frame.
ComplementedSequence presmooth(const ComplementedSequence& sequence, double sigma);

/// Level sizes round(scale^(levels-1-k) * size) for k = 0..levels-1, coarsest first.
std::vector<std::pair<int, int>> pyramid_sizes(int width, int height, int levels, double scale);

/// Coarsest-first pyramid built by repeated bicubic resizing. Throws when the
/// coarsest level would be smaller than 8x8.
std::vector<ComplementedSequence> build_pyramid(const ComplementedSequence& sequence,
                                                int levels, double scale);

/// Discretized data of one pyramid level. Time sample t sits at frame t and
/// covers the transition to frame t + 1.
struct LevelData {
  int width = 0;
  int height = 0;
  int samples = 0;
  int channels = 0;
  // [sample][channel]
  std::vector<std::vector<Plane>> fx, fy, ft, weight;
  // Weighted sums over channels, [sample]:
  // a11 = sum B fx^2, a12 = sum B fx fy, a22 = sum B fy^2, b1 = sum B fx ft, b2 = sum B fy ft
  std::vector<Plane> a11, a12, a22, b1, b2;

  /// Recomputes the weighted sums from the per-channel planes.
  void assemble();
};

/// Temporal derivative at sample t: central (f[t+1] - f[t-1]) / 2 when t >= 1
/// and forward f[1] - f[0] at t = 0.
LevelData make_level_data(const ComplementedSequence& level, const SolverConfig& config);

/// Psi'(|grad3 u1|^2 + |grad3 u2|^2) per voxel with grad3 = (dx, dy, lambda dt).
std::vector<Plane> diffusivity(const FlowField& flow, double lambda, double epsilon);

/// Stencil face weights per sample: x[t](x, y) couples (x, y) and (x + 1, y),
/// y[t](x, y) couples (x, y) and (x, y + 1), t[t](x, y) couples samples t and
/// t + 1 and already carries lambda^2. Faces leaving the volume are unused.
struct FaceWeights {
  std::vector<Plane> x, y, t;
};

/// Arithmetic face averages (g_c + g_n) / 2 of cell-centered diffusivities.
FaceWeights average_face_weights(const std::vector<Plane>& g, double lambda);

/// Diffusivities evaluated on the faces from the gradient there.
FaceWeights face_centered_weights(const FlowField& flow, double lambda, double epsilon);

/// Face weights of `flow` as selected by config.faces.
FaceWeights face_weights(const FlowField& flow, const SolverConfig& config);

/// div3(g grad3 u) on the 6-neighbor stencil with the given face weights.
std::vector<Plane> divergence(const std::vector<Plane>& u, const FaceWeights& faces);

/// div3(g grad3 u) on the 6-neighbor stencil, face weights (g_c + g_n) / 2,
/// temporal faces scaled by lambda^2, reflecting (replicate) boundaries.
std::vector<Plane> divergence(const std::vector<Plane>& u, const std::vector<Plane>& g,
                              double lambda);

/// One semi-implicit update of u1 and u2, both reading the previous iterate.
/// Throws NumericalError when the update is not finite.
FlowField fixed_point_sweep(const LevelData& data, const FlowField& flow,
                            const SolverConfig& config);

/// L2 norm of the discretized optimality system residual at `flow`.
double euler_lagrange_residual(const LevelData& data, const FlowField& flow,
                               const SolverConfig& config);

struct LevelLog {
  int window = 0;
  int level = 0;  // 0 = coarsest
  int width = 0;
  int height = 0;
  int iterations = 0;
  double change_u1 = 0.0;
  double change_u2 = 0.0;
  bool converged = false;
};

struct LevelResult {
  FlowField flow;
  LevelLog log;
};

/// Fixed-point iterations until the relative change of both components drops
/// below tol (or max_iterations), then a per-frame median filter.
LevelResult solve_level(const LevelData& data, const FlowField& init, const SolverConfig& config);

/// Bicubic upsampling of every flow frame with values scaled by the size ratio.
FlowField prolong(const FlowField& flow, int width, int height);

struct SolveResult {
  FlowField flow;
  std::vector<LevelLog> log;
};

/// Coarse-to-fine solve over the whole sequence (or temporal windows of it).
SolveResult solve_sequence(const ComplementedSequence& sequence, const SolverConfig& config);

/// Same machinery with independent two-frame windows.
SolveResult two_frame_baseline(const ComplementedSequence& sequence, SolverConfig config);

}  // namespace salflow
