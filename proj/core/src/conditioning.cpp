#include "salflow/conditioning.hpp"

#include "salflow/grid.hpp"

#include <cmath>
#include <limits>

namespace salflow {

JacobianField jacobian(const Frame& frame) {
  JacobianField jac;
  for (const Plane& p : frame.channels) {
    jac.dx.push_back(derivative_x(p));
    jac.dy.push_back(derivative_y(p));
  }
  return jac;
}

SingularPair singular_values_from_gram(double a, double b, double c) {
  // Eigenvalues of [[a, b], [b, c]]; the smaller one via det / larger to avoid
  // cancellation.
  const double half_trace = 0.5 * (a + c);
  const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  const double lmax = half_trace + disc;
  if (!(lmax > 0.0)) return {0.0, 0.0};
  double lmin = (a * c - b * b) / lmax;
  if (lmin < 0.0) lmin = 0.0;
  return {std::sqrt(lmax), std::sqrt(lmin)};
}

ConditionReport condition_map(const JacobianField& jac, double threshold) {
  const int w = jac.width();
  const int h = jac.height();
  ConditionReport report{Plane(w, h), threshold, 0.0};
  const double inf = std::numeric_limits<double>::infinity();
  const int sigma = jac.channels();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (sigma < 2) {
        report.condition(x, y) = inf;
        continue;
      }
      double a = 0.0, b = 0.0, c = 0.0;
      for (int i = 0; i < sigma; ++i) {
        const double gx = jac.dx[static_cast<std::size_t>(i)](x, y);
        const double gy = jac.dy[static_cast<std::size_t>(i)](x, y);
        a += gx * gx;
        b += gx * gy;
        c += gy * gy;
      }
      const SingularPair s = singular_values_from_gram(a, b, c);
      report.condition(x, y) = s.min < kSingularFloor ? inf : s.max / s.min;
    }
  report.fraction_below = fraction_below(report, threshold);
  return report;
}

double fraction_below(const ConditionReport& report, double threshold) {
  const auto v = report.condition.values();
  if (v.empty()) return 0.0;
  std::size_t count = 0;
  for (double c : v)
    if (std::isfinite(c) && c < threshold) ++count;
  return 100.0 * static_cast<double>(count) / static_cast<double>(v.size());
}

}  // namespace salflow
