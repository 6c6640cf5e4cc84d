#include "oracles.hpp"

#include "salflow/dynsal.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace salflow;

namespace {

FlowField constant_flow(int w, int h, int n, double a, double b) {
  FlowField f;
  for (int t = 0; t < n; ++t) f.frames.push_back({Plane(w, h, a), Plane(w, h, b)});
  return f;
}

}  // namespace

TEST(Dynsal, ZeroFlowGivesZeroMap) {
  const DynamicSaliencySequence d = magnitude(FlowField::zeros(5, 4, 3));
  ASSERT_EQ(d.size(), 3);
  for (int t = 0; t < 3; ++t) {
    for (double v : d.raw[static_cast<std::size_t>(t)].values.values()) EXPECT_EQ(v, 0.0);
    for (double v : d.normalized[static_cast<std::size_t>(t)].values.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Dynsal, ThreeFourFive) {
  const DynamicSaliencySequence d = magnitude(constant_flow(4, 4, 2, 3.0, 4.0));
  for (const SaliencyMap& m : d.raw) {
    EXPECT_EQ(m.state, Normalization::kRaw);
    for (double v : m.values.values()) EXPECT_EQ(v, 5.0);
  }
}

TEST(Dynsal, MatchesLoopOracleAndNormalizedRange) {
  std::mt19937_64 rng(51);
  FlowField f;
  for (int t = 0; t < 3; ++t)
    f.frames.push_back({oracle::random_plane(9, 7, rng, -3, 3), oracle::random_plane(9, 7, rng, -3, 3)});
  const DynamicSaliencySequence d = magnitude(f);
  const std::vector<Plane> raw = raw_planes(d);
  ASSERT_EQ(raw.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    double lo = 1e300, hi = -1e300;
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x) {
        const double a = f.frames[t].u1(x, y), b = f.frames[t].u2(x, y);
        EXPECT_NEAR(raw[t](x, y), std::sqrt(a * a + b * b), 1e-12);
        lo = std::min(lo, raw[t](x, y));
        hi = std::max(hi, raw[t](x, y));
      }
    EXPECT_EQ(d.normalized[t].state, Normalization::kUnitRange);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x) {
        const double v = d.normalized[t].values(x, y);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_NEAR(v, (raw[t](x, y) - lo) / (hi - lo), 1e-12);
      }
  }
}

TEST(Dynsal, RotationInvariant) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  FlowField f{{{oracle::random_plane(8, 8, rng, -2, 2), oracle::random_plane(8, 8, rng, -2, 2)}}, {}};
  FlowField r = f;
  for (std::size_t k = 0; k < f.frames[0].u1.size(); ++k) {
    const double th = angle(rng), a = f.frames[0].u1.values()[k], b = f.frames[0].u2.values()[k];
    r.frames[0].u1.values()[k] = std::cos(th) * a - std::sin(th) * b;
    r.frames[0].u2.values()[k] = std::sin(th) * a + std::cos(th) * b;
  }
  const Plane m = flow_magnitude(f.frames[0]), n = flow_magnitude(r.frames[0]);
  for (std::size_t k = 0; k < m.size(); ++k) EXPECT_NEAR(m.values()[k], n.values()[k], 1e-12);
}
