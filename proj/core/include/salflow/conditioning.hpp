#pragma once

#include "salflow/types.hpp"

#include <vector>

namespace salflow {

/// Spatial Jacobian of a frame: per channel the x and y derivative planes, so
/// that at each pixel the rows (dx[i], dy[i]) form a sigma x 2 matrix.
struct JacobianField {
  std::vector<Plane> dx;
  std::vector<Plane> dy;

  int channels() const { return static_cast<int>(dx.size()); }
  int width() const { return dx.empty() ? 0 : dx.front().width(); }
  int height() const { return dx.empty() ? 0 : dx.front().height(); }
};

struct ConditionReport {
  /// Ratio of the larger to the smaller singular value; +inf when rank deficient.
  Plane condition;
  double threshold = 1000.0;
  /// Percentage in [0, 100].
  double fraction_below = 0.0;
};

/// Smaller singular values below this are treated as zero.
inline constexpr double kSingularFloor = 1e-12;

JacobianField jacobian(const Frame& frame);

/// Singular values (largest first) of a sigma x 2 matrix given its Gram entries.
struct SingularPair {
  double max;
  double min;
};
SingularPair singular_values_from_gram(double a, double b, double c);

/// Per-pixel condition numbers; fraction_below is filled for `threshold`.
ConditionReport condition_map(const JacobianField& jac, double threshold = 1000.0);

/// 100 * (#pixels with finite condition number < threshold) / #pixels.
double fraction_below(const ConditionReport& report, double threshold = 1000.0);

}  // namespace salflow
