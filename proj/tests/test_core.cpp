#include "oracles.hpp"

#include "salflow/grid.hpp"
#include "salflow/io.hpp"
#include "salflow/types.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

namespace fs = std::filesystem;
using namespace salflow;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("salflow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Direct summation of the separable kernel using the library's tap positions
// re-derived from the pixel-centre alignment rule.
Plane resample_oracle(const Plane& p, int w, int h) {
  auto taps = [](int in, int out) {
    std::vector<std::vector<std::pair<int, double>>> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(out) / in;
    const double support = scale < 1.0 ? 2.0 / scale : 2.0;
    const double stretch = scale < 1.0 ? scale : 1.0;
    for (int i = 0; i < out; ++i) {
      const double centre = (i + 0.5) / scale - 0.5;
      double sum = 0.0;
      for (int j = static_cast<int>(std::floor(centre - support)); j <= static_cast<int>(std::ceil(centre + support)); ++j) {
        const double d = std::abs((centre - j) * stretch);
        double k = 0.0;
        if (d < 1.0) k = 1.5 * d * d * d - 2.5 * d * d + 1.0;
        else if (d < 2.0) k = -0.5 * d * d * d + 2.5 * d * d - 4.0 * d + 2.0;
        if (k == 0.0) continue;
        t[static_cast<std::size_t>(i)].push_back({std::clamp(j, 0, in - 1), k});
        sum += k;
      }
      for (auto& e : t[static_cast<std::size_t>(i)]) e.second /= sum;
    }
    return t;
  };
  const auto tx = taps(p.width(), w);
  const auto ty = taps(p.height(), h);
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (const auto& [iy, wy] : ty[static_cast<std::size_t>(y)])
        for (const auto& [ix, wx] : tx[static_cast<std::size_t>(x)]) acc += wy * wx * p(ix, iy);
      out(x, y) = acc;
    }
  return out;
}

}  // namespace

TEST(Grid, CubicKernelValues) {
  EXPECT_DOUBLE_EQ(cubic_kernel(0.0), 1.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(1.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(2.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(0.5), 0.5625);
  EXPECT_DOUBLE_EQ(cubic_kernel(-1.5), -0.0625);
}

TEST(Grid, ResampleIdentityIsBitwise) {
  std::mt19937_64 rng(1);
  const Plane p = oracle::random_plane(13, 9, rng);
  EXPECT_EQ(resample_bicubic(p, 13, 9), p);
}

TEST(Grid, ResampleConstantStaysConstant) {
  const Plane p(20, 12, 0.37);
  for (auto [w, h] : {std::pair{10, 6}, {40, 24}, {7, 31}}) {
    const Plane r = resample_bicubic(p, w, h);
    for (double v : r.values()) EXPECT_NEAR(v, 0.37, 1e-12);
  }
}

TEST(Grid, ResampleMatchesDirectSummation) {
  std::mt19937_64 rng(2);
  const Plane p = oracle::random_plane(16, 12, rng);
  for (auto [w, h] : {std::pair{8, 6}, {32, 24}, {11, 17}}) {
    const Plane r = resample_bicubic(p, w, h);
    const Plane o = resample_oracle(p, w, h);
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_NEAR(r.values()[k], o.values()[k], 1e-12);
  }
}

TEST(Grid, RampDownUpRoundTrip) {
  Plane ramp(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) ramp(x, y) = (0.3 * x + 0.2 * y) / 16.0;
  const Plane back = resample_bicubic(resample_bicubic(ramp, 16, 16), 32, 32);
  const Plane oracle_back = resample_oracle(resample_oracle(ramp, 16, 16), 32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) EXPECT_NEAR(back(x, y), oracle_back(x, y), 1e-12);
}

TEST(Grid, UpsamplingReproducesRampsAwayFromBorder) {
  // Unstretched cubic convolution is exact on linear data; pixel centres map
  // as x_in = (x + 0.5) / 2 - 0.5.
  Plane ramp(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) ramp(x, y) = 0.3 * x + 0.2 * y;
  const Plane up = resample_bicubic(ramp, 32, 32);
  for (int y = 4; y < 28; ++y)
    for (int x = 4; x < 28; ++x)
      EXPECT_NEAR(up(x, y), 0.3 * ((x + 0.5) / 2.0 - 0.5) + 0.2 * ((y + 0.5) / 2.0 - 0.5), 1e-12);
}

TEST(Grid, ResampleIsLinear) {
  std::mt19937_64 rng(3);
  const Plane p = oracle::random_plane(15, 10, rng);
  const Plane q = oracle::random_plane(15, 10, rng);
  Plane mix(15, 10);
  for (std::size_t k = 0; k < mix.size(); ++k) mix.values()[k] = 0.7 * p.values()[k] - 1.3 * q.values()[k];
  const Plane a = resample_bicubic(p, 9, 21), b = resample_bicubic(q, 9, 21), m = resample_bicubic(mix, 9, 21);
  for (std::size_t k = 0; k < m.size(); ++k)
    EXPECT_NEAR(m.values()[k], 0.7 * a.values()[k] - 1.3 * b.values()[k], 1e-9);
}

TEST(Grid, GaussianImpulseMatchesDirectConvolution) {
  Plane impulse(21, 21);
  impulse(10, 10) = 1.0;
  const Plane b = gaussian_blur(impulse, 1.0);
  // Kernel truncated at radius ceil(3 sigma) = 3 and renormalized.
  double norm = 0.0;
  for (int i = -3; i <= 3; ++i) norm += std::exp(-0.5 * i * i);
  for (int dy = -3; dy <= 3; ++dy)
    for (int dx = -3; dx <= 3; ++dx)
      EXPECT_NEAR(b(10 + dx, 10 + dy), std::exp(-0.5 * (dx * dx + dy * dy)) / (norm * norm), 1e-12);
  EXPECT_NEAR(b(10, 10), 1.0 / (norm * norm), 1e-12);
  EXPECT_EQ(b(14, 10), 0.0);
}

TEST(Grid, GaussianPreservesConstantAndRamp) {
  const Plane c(12, 12, 0.25);
  const Plane blurred = gaussian_blur(c, 1.0);
  for (double v : blurred.values()) EXPECT_NEAR(v, 0.25, 1e-12);
  Plane ramp(24, 24);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x) ramp(x, y) = 0.01 * x - 0.02 * y + 0.5;
  const Plane r = gaussian_blur(ramp, 1.0);
  for (int y = 3; y < 21; ++y)
    for (int x = 3; x < 21; ++x) EXPECT_NEAR(r(x, y), ramp(x, y), 1e-9);
}

TEST(Grid, DerivativesMatchLoopStencil) {
  std::mt19937_64 rng(4);
  const Plane p = oracle::random_plane(9, 7, rng);
  const Plane gx = derivative_x(p), gy = derivative_y(p);
  const oracle::Volume v = oracle::from_planes({p});
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) {
      EXPECT_EQ(gx(x, y), oracle::dx(v, x, y, 0));
      EXPECT_EQ(gy(x, y), oracle::dy(v, x, y, 0));
    }
}

TEST(Grid, MedianFilterMatchesSortedWindow) {
  std::mt19937_64 rng(5);
  const Plane p = oracle::random_plane(10, 8, rng);
  const Plane m = median_filter(p, 2);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 10; ++x) {
      std::vector<double> win;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) win.push_back(p.clamped(x + dx, y + dy));
      std::sort(win.begin(), win.end());
      EXPECT_EQ(m(x, y), win[12]);
    }
}

TEST(Types, NormalizationIsIdempotent) {
  std::mt19937_64 rng(6);
  const Plane p = oracle::random_plane(8, 8, rng, -3.0, 5.0);
  const Plane a = normalize_unit_range(p);
  const Plane b = normalize_unit_range(a);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a.values()[k], b.values()[k], 1e-15);
  const SaliencyMap z = to_z_scored({p, Normalization::kRaw});
  const SaliencyMap zz = to_z_scored(z);
  double mean = 0.0, var = 0.0;
  for (double v : z.values.values()) mean += v;
  mean /= 64.0;
  for (double v : z.values.values()) var += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.0, 1e-6);
  EXPECT_NEAR(std::sqrt(var / 64.0), 1.0, 1e-6);
  for (std::size_t k = 0; k < z.values.size(); ++k) EXPECT_NEAR(z.values.values()[k], zz.values.values()[k], 1e-12);
}

TEST(Types, SequenceRejectsLayoutMismatch) {
  Frame f{{Plane(4, 4), Plane(4, 4)}};
  EXPECT_THROW(ComplementedSequence({f, f}, Layout::kGray), ValidationError);
  EXPECT_THROW(ComplementedSequence({f}, Layout::kGraySaliency), ValidationError);
  EXPECT_NO_THROW(ComplementedSequence({f, f}, Layout::kGraySaliency));
  EXPECT_EQ(parse_layout("color+saliency"), Layout::kColorSaliency);
  EXPECT_EQ(parse_layout("hsv"), Layout::kColor);
  EXPECT_THROW(parse_layout("rgb"), ValidationError);
}

TEST(Io, MidGrayFramesLoad) {
  const fs::path dir = scratch_dir("midgray");
  const Plane gray(8, 8, 0.5);
  write_raster(dir / "f_0000.png", {gray});
  write_raster(dir / "f_0001.png", {gray});
  const ComplementedSequence s = load_sequence((dir / "f_%04d.png").string(), Layout::kGray);
  EXPECT_EQ(s.frame_count(), 2);
  for (const Frame& f : s.frames())
    for (double v : f.channels[0].values()) EXPECT_NEAR(v, 0.5, 1.0 / 255.0);
}

TEST(Io, EmptyPatternIsAnError) {
  const fs::path dir = scratch_dir("empty");
  try {
    load_sequence((dir / "none_%04d.png").string(), Layout::kGray);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("empty sequence"), std::string::npos);
  }
}

TEST(Io, GapInIndicesIsAnError) {
  const fs::path dir = scratch_dir("gap");
  write_raster(dir / "f_0000.png", {Plane(4, 4, 0.2)});
  write_raster(dir / "f_0002.png", {Plane(4, 4, 0.2)});
  EXPECT_THROW(list_indices((dir / "f_%04d.png").string()), IoError);
}

TEST(Io, ColorSaliencyRoundTripIsBitwise) {
  const fs::path dir = scratch_dir("colorsal");
  std::mt19937_64 rng(7);
  std::vector<Frame> frames;
  for (int t = 0; t < 3; ++t) {
    Frame f;
    for (int c = 0; c < 3; ++c) {
      Plane p(6, 5);
      for (double& v : p.values()) v = static_cast<double>(rng() % 256) / 255.0;
      f.channels.push_back(p);
    }
    Plane s(6, 5);
    for (double& v : s.values()) v = static_cast<double>(rng() % 65536) / 65535.0;
    f.channels.push_back(s);
    frames.push_back(f);
  }
  const ComplementedSequence seq(frames, Layout::kColorSaliency);
  save_sequence(seq, (dir / "c_%04d.png").string());
  const ComplementedSequence back = load_sequence((dir / "c_%04d.png").string(), Layout::kColorSaliency);
  EXPECT_EQ(back.layout(), Layout::kColorSaliency);
  EXPECT_EQ(back.channel_count(), 4);
  ASSERT_EQ(back.frame_count(), 3);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(back.frame(t), seq.frame(t));
}

TEST(Io, FlowRoundTripAndRejectsNan) {
  const fs::path dir = scratch_dir("flow");
  FlowFrame f{Plane(4, 4, 1.0), Plane(4, 4, -2.0)};
  save_flow(f, dir / "a.flo");
  EXPECT_EQ(load_flow(dir / "a.flo"), f);
  f.u2(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(save_flow(f, dir / "b.flo"), ValidationError);
}

TEST(Io, FlowHeaderBytesAndUnknownSentinel) {
  const fs::path dir = scratch_dir("sentinel");
  // Written byte by byte per the public format: "PIEH", w, h, then u,v pairs.
  {
    std::ofstream os(dir / "gt.flo", std::ios::binary);
    os.write("PIEH", 4);
    const std::int32_t w = 2, h = 1;
    os.write(reinterpret_cast<const char*>(&w), 4);
    os.write(reinterpret_cast<const char*>(&h), 4);
    const float data[4] = {0.5f, -1.5f, 1e10f, 1e10f};
    os.write(reinterpret_cast<const char*>(data), sizeof data);
  }
  float tag;
  std::memcpy(&tag, "PIEH", 4);
  EXPECT_EQ(tag, kFlowTag);
  Plane valid;
  const FlowFrame f = load_flow(dir / "gt.flo", &valid);
  EXPECT_EQ(f.u1(0, 0), 0.5);
  EXPECT_EQ(f.u2(0, 0), -1.5);
  EXPECT_EQ(valid(0, 0), 1.0);
  EXPECT_EQ(valid(1, 0), 0.0);
  EXPECT_EQ(f.u1(1, 0), 0.0);
}

TEST(Io, MalformedFlowFiles) {
  const fs::path dir = scratch_dir("badflow");
  write_text(dir / "bad.flo", "XXXXXXXXXXXX");
  EXPECT_THROW(load_flow(dir / "bad.flo"), IoError);
  FlowFrame f{Plane(3, 3, 0.1), Plane(3, 3, 0.2)};
  save_flow(f, dir / "ok.flo");
  fs::resize_file(dir / "ok.flo", fs::file_size(dir / "ok.flo") - 4);
  EXPECT_THROW(load_flow(dir / "ok.flo"), IoError);
}

TEST(Io, MapRoundTrip) {
  const fs::path dir = scratch_dir("map");
  std::mt19937_64 rng(8);
  Plane p = oracle::random_plane(5, 7, rng);
  for (double& v : p.values()) v = static_cast<float>(v);
  save_map(p, dir / "m.salf");
  EXPECT_EQ(load_map(dir / "m.salf"), p);
}
