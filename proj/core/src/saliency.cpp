#include "salflow/saliency.hpp"

#include "salflow/grid.hpp"
#include "salflow/io.hpp"

#include <opencv2/core.hpp>

#include <algorithm>
#include <cmath>
#include <exception>

namespace salflow {

namespace {

// 3x3 mean on the periodic frequency grid.
cv::Mat wrap_box3(const cv::Mat& m) {
  cv::Mat out(m.size(), CV_64F);
  const int h = m.rows;
  const int w = m.cols;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          acc += m.at<double>((y + dy + h) % h, (x + dx + w) % w);
      out.at<double>(y, x) = acc / 9.0;
    }
  return out;
}

}  // namespace

SaliencyProvider::Kind parse_provider_kind(const std::string& text) {
  if (text == "spectral") return SaliencyProvider::Kind::kSpectralResidual;
  if (text == "external") return SaliencyProvider::Kind::kExternalFiles;
  throw ValidationError("unknown saliency provider '" + text + "'");
}

SaliencyMap spectral_residual_saliency(const Frame& frame, int image_channels,
                                       const SaliencyProvider& provider) {
  if (provider.working_width < 1) throw ValidationError("working width must be >= 1");
  const Plane gray = gray_of(frame, image_channels);
  const int w = gray.width();
  const int h = gray.height();

  const auto [lo, hi] = std::minmax_element(gray.values().begin(), gray.values().end());
  if (!(*hi - *lo > 1e-12)) return {Plane(w, h), Normalization::kUnitRange};

  const int ww = std::min(provider.working_width, w);
  const int wh = std::max(1, static_cast<int>(std::lround(static_cast<double>(h) * ww / w)));
  Plane small = resample_bicubic(gray, ww, wh);

  double mean = 0.0;
  for (double v : small.values()) mean += v;
  mean /= static_cast<double>(small.size());

  cv::Mat spatial(wh, ww, CV_64F);
  for (int y = 0; y < wh; ++y)
    for (int x = 0; x < ww; ++x) spatial.at<double>(y, x) = small(x, y) - mean;

  cv::Mat spectrum;
  cv::dft(spatial, spectrum, cv::DFT_COMPLEX_OUTPUT);
  spectrum.at<cv::Vec2d>(0, 0) = cv::Vec2d(0.0, 0.0);

  cv::Mat log_amp(wh, ww, CV_64F);
  cv::Mat phase_re(wh, ww, CV_64F);
  cv::Mat phase_im(wh, ww, CV_64F);
  for (int y = 0; y < wh; ++y)
    for (int x = 0; x < ww; ++x) {
      const cv::Vec2d c = spectrum.at<cv::Vec2d>(y, x);
      const double amp = std::hypot(c[0], c[1]);
      log_amp.at<double>(y, x) = std::log(amp + 1e-12);
      phase_re.at<double>(y, x) = amp > 0.0 ? c[0] / amp : 1.0;
      phase_im.at<double>(y, x) = amp > 0.0 ? c[1] / amp : 0.0;
    }

  // The removed mean leaves no DC amplitude; give that bin the mean log
  // amplitude of its neighbors so the local average scales like the rest.
  if (ww * wh > 1) {
    double acc = 0.0;
    int count = 0;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        acc += log_amp.at<double>((dy + wh) % wh, (dx + ww) % ww);
        ++count;
      }
    log_amp.at<double>(0, 0) = acc / count;
  }
  const cv::Mat local = wrap_box3(log_amp);
  cv::Mat residual_spectrum(wh, ww, CV_64FC2);
  for (int y = 0; y < wh; ++y)
    for (int x = 0; x < ww; ++x) {
      const double r = std::exp(log_amp.at<double>(y, x) - local.at<double>(y, x));
      residual_spectrum.at<cv::Vec2d>(y, x) =
          cv::Vec2d(r * phase_re.at<double>(y, x), r * phase_im.at<double>(y, x));
    }

  residual_spectrum.at<cv::Vec2d>(0, 0) = cv::Vec2d(0.0, 0.0);

  cv::Mat back;
  cv::dft(residual_spectrum, back, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_COMPLEX_OUTPUT);
  Plane energy(ww, wh);
  for (int y = 0; y < wh; ++y)
    for (int x = 0; x < ww; ++x) {
      const cv::Vec2d c = back.at<cv::Vec2d>(y, x);
      energy(x, y) = c[0] * c[0] + c[1] * c[1];
    }

  Plane smoothed = gaussian_blur(energy, provider.smoothing_sigma);
  Plane full = resample_bicubic(smoothed, w, h);
  return {normalize_unit_range(full), Normalization::kUnitRange};
}

SaliencyMap compute_static_saliency(const Frame& frame, int image_channels,
                                    const SaliencyProvider& provider, int index) {
  switch (provider.kind) {
    case SaliencyProvider::Kind::kSpectralResidual:
      return spectral_residual_saliency(frame, image_channels, provider);
    case SaliencyProvider::Kind::kExternalFiles: {
      if (provider.external_pattern.empty())
        throw ValidationError("external saliency provider needs a frame pattern");
      const auto path = saliency_sidecar(format_index(provider.external_pattern, index));
      std::vector<Plane> planes = read_raster(path);
      Frame tmp{std::move(planes)};
      Plane map = tmp.channel_count() == 1 ? tmp.channels.front() : gray_of(tmp, 3);
      if (map.width() != frame.width() || map.height() != frame.height())
        throw ValidationError("saliency map " + path.string() + " does not match frame size");
      return {normalize_unit_range(map), Normalization::kUnitRange};
    }
  }
  throw ValidationError("unknown saliency provider");
}

std::vector<SaliencyMap> compute_sequence_saliency(const ComplementedSequence& sequence,
                                                   const SaliencyProvider& provider) {
  if (has_saliency(sequence.layout()))
    throw ValidationError("sequence already carries a saliency channel");
  std::vector<SaliencyMap> maps(static_cast<std::size_t>(sequence.frame_count()));
  const int images = sequence.image_channel_count();
  std::vector<std::exception_ptr> errors(maps.size());
#pragma omp parallel for schedule(static)
  for (int t = 0; t < sequence.frame_count(); ++t) {
    try {
      maps[static_cast<std::size_t>(t)] =
          compute_static_saliency(sequence.frame(t), images, provider, t);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return maps;
}

ComplementedSequence complement(const ComplementedSequence& sequence,
                                const std::vector<SaliencyMap>& maps) {
  if (has_saliency(sequence.layout()))
    throw ValidationError("sequence already carries a saliency channel");
  if (static_cast<int>(maps.size()) != sequence.frame_count())
    throw ValidationError("complement needs one saliency map per frame (" +
                          std::to_string(sequence.frame_count()) + " frames, " +
                          std::to_string(maps.size()) + " maps)");
  std::vector<Frame> frames = sequence.frames();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const Plane& m = maps[t].values;
    if (m.width() != sequence.width() || m.height() != sequence.height())
      throw ValidationError("saliency map " + std::to_string(t) + " dimension mismatch");
    frames[t].channels.push_back(to_unit_range(maps[t]).values);
  }
  return ComplementedSequence(std::move(frames), with_saliency(sequence.layout()));
}

ComplementedSequence strip_saliency(const ComplementedSequence& sequence) {
  if (!has_saliency(sequence.layout())) return sequence;
  std::vector<Frame> frames = sequence.frames();
  for (Frame& f : frames) f.channels.pop_back();
  return ComplementedSequence(std::move(frames), image_layout(sequence.layout()));
}

}  // namespace salflow
