#pragma once

#include "salflow/types.hpp"

#include <vector>

namespace salflow {

/// Keys cubic convolution kernel (a = -0.5).
double cubic_kernel(double x);

/// One output sample's taps along an axis: source indices (already clamped to
/// the replicate boundary) and normalized weights.
struct ResampleTaps {
  std::vector<int> index;
  std::vector<double> weight;
};

/// Tap table for resizing an axis of length `in` to `out`. Pixel centers are
/// aligned ((i + 0.5) / scale - 0.5); when shrinking the kernel is widened by
/// 1/scale so that the resize also low-passes.
std::vector<ResampleTaps> resample_taps(int in, int out);

/// Separable bicubic resize with replicate boundaries. Returns an exact copy
/// when the dimensions are unchanged.
Plane resample_bicubic(const Plane& plane, int width, int height);

/// Normalized 1-D Gaussian weights for offsets -r..r, r = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian convolution, replicate boundaries.
Plane gaussian_blur(const Plane& plane, double sigma);

/// Square median filter of the given radius (2 = 5x5), replicate boundaries.
Plane median_filter(const Plane& plane, int radius);

/// Central differences in the interior, one-sided at the borders, unit spacing.
Plane derivative_x(const Plane& plane);
Plane derivative_y(const Plane& plane);

/// Box mean filter of the given radius with replicate boundaries.
Plane box_filter(const Plane& plane, int radius);

}  // namespace salflow
