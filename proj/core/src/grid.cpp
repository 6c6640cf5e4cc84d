#include "salflow/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace salflow {

namespace {

int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

}  // namespace

double cubic_kernel(double x) {
  const double ax = std::abs(x);
  const double ax2 = ax * ax;
  const double ax3 = ax2 * ax;
  if (ax <= 1.0) return 1.5 * ax3 - 2.5 * ax2 + 1.0;
  if (ax <= 2.0) return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
  return 0.0;
}

std::vector<ResampleTaps> resample_taps(int in, int out) {
  if (in < 1 || out < 1) throw ValidationError("resample dimensions must be >= 1");
  const double scale = static_cast<double>(out) / static_cast<double>(in);
  const double stretch = scale < 1.0 ? scale : 1.0;
  const double support = 4.0 / stretch;
  const int taps = static_cast<int>(std::ceil(support)) + 2;

  std::vector<ResampleTaps> table(static_cast<std::size_t>(out));
  for (int i = 0; i < out; ++i) {
    const double center = (static_cast<double>(i) + 0.5) / scale - 0.5;
    const int left = static_cast<int>(std::floor(center - support / 2.0));
    ResampleTaps& t = table[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (int k = 0; k < taps; ++k) {
      const int j = left + k;
      const double w = stretch * cubic_kernel(stretch * (center - static_cast<double>(j)));
      if (w == 0.0) continue;
      t.index.push_back(clamp_index(j, in));
      t.weight.push_back(w);
      sum += w;
    }
    for (double& w : t.weight) w /= sum;
  }
  return table;
}

Plane resample_bicubic(const Plane& plane, int width, int height) {
  if (width < 1 || height < 1) throw ValidationError("resample target must be >= 1x1");
  if (plane.width() == width && plane.height() == height) return plane;

  const auto tx = resample_taps(plane.width(), width);
  const auto ty = resample_taps(plane.height(), height);

  Plane rows(width, plane.height());
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < width; ++x) {
      const ResampleTaps& t = tx[static_cast<std::size_t>(x)];
      double acc = 0.0;
      for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * plane(t.index[k], y);
      rows(x, y) = acc;
    }
  }
  Plane out(width, height);
  for (int y = 0; y < height; ++y) {
    const ResampleTaps& t = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * rows(x, t.index[k]);
      out(x, y) = acc;
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

Plane gaussian_blur(const Plane& plane, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = plane.width();
  const int h = plane.height();
  Plane tmp(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i)
        acc += k[static_cast<std::size_t>(i + r)] * plane.clamped(x + i, y);
      tmp(x, y) = acc;
    }
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i)
        acc += k[static_cast<std::size_t>(i + r)] * tmp.clamped(x, y + i);
      out(x, y) = acc;
    }
  return out;
}

Plane median_filter(const Plane& plane, int radius) {
  if (radius < 0) throw ValidationError("median radius must be >= 0");
  if (radius == 0) return plane;
  const int w = plane.width();
  const int h = plane.height();
  const int n = (2 * radius + 1) * (2 * radius + 1);
  std::vector<double> window(static_cast<std::size_t>(n));
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::size_t k = 0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) window[k++] = plane.clamped(x + dx, y + dy);
      auto mid = window.begin() + n / 2;
      std::nth_element(window.begin(), mid, window.end());
      out(x, y) = *mid;
    }
  return out;
}

Plane derivative_x(const Plane& plane) {
  const int w = plane.width();
  const int h = plane.height();
  Plane out(w, h);
  if (w < 2) return out;
  for (int y = 0; y < h; ++y) {
    out(0, y) = plane(1, y) - plane(0, y);
    for (int x = 1; x < w - 1; ++x) out(x, y) = 0.5 * (plane(x + 1, y) - plane(x - 1, y));
    out(w - 1, y) = plane(w - 1, y) - plane(w - 2, y);
  }
  return out;
}

Plane derivative_y(const Plane& plane) {
  const int w = plane.width();
  const int h = plane.height();
  Plane out(w, h);
  if (h < 2) return out;
  for (int x = 0; x < w; ++x) {
    out(x, 0) = plane(x, 1) - plane(x, 0);
    for (int y = 1; y < h - 1; ++y) out(x, y) = 0.5 * (plane(x, y + 1) - plane(x, y - 1));
    out(x, h - 1) = plane(x, h - 1) - plane(x, h - 2);
  }
  return out;
}

Plane box_filter(const Plane& plane, int radius) {
  const int w = plane.width();
  const int h = plane.height();
  const double norm = 1.0 / static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) acc += plane.clamped(x + dx, y + dy);
      out(x, y) = acc * norm;
    }
  return out;
}

}  // namespace salflow
