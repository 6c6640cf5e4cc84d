#include "salflow/io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

namespace fs = std::filesystem;

namespace salflow {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written in host order, which must be little endian");

namespace {

struct IndexPattern {
  std::string prefix;
  std::string suffix;
  int width = 0;  // zero padding, 0 = none
};

IndexPattern parse_pattern(const std::string& pattern) {
  const auto pos = pattern.find('%');
  if (pos == std::string::npos || pattern.find('%', pos + 1) != std::string::npos)
    throw ValidationError("pattern '" + pattern + "' needs exactly one %d field");
  std::size_t i = pos + 1;
  int width = 0;
  while (i < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[i]))) {
    width = width * 10 + (pattern[i] - '0');
    ++i;
  }
  if (i >= pattern.size() || pattern[i] != 'd')
    throw ValidationError("pattern '" + pattern + "' needs a %d or %0Nd field");
  return {pattern.substr(0, pos), pattern.substr(i + 1), width};
}

std::string regex_escape(const std::string& s) {
  static const std::regex special{R"([.^$|()\[\]{}*+?\\])"};
  return std::regex_replace(s, special, R"(\$&)");
}

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is, const fs::path& path) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw IoError("truncated payload in " + path.string());
  return value;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

}  // namespace

std::string format_index(const std::string& pattern, int index) {
  const IndexPattern p = parse_pattern(pattern);
  std::string digits = std::to_string(index);
  if (static_cast<int>(digits.size()) < p.width)
    digits.insert(0, static_cast<std::size_t>(p.width) - digits.size(), '0');
  return p.prefix + digits + p.suffix;
}

fs::path saliency_sidecar(const fs::path& frame_path) {
  fs::path out = frame_path;
  out.replace_filename(frame_path.stem().string() + "_sal" + frame_path.extension().string());
  return out;
}

std::vector<int> list_indices(const std::string& pattern) {
  const IndexPattern p = parse_pattern(pattern);
  const fs::path prefix_path(p.prefix);
  fs::path dir = prefix_path.parent_path();
  const std::string name_prefix = prefix_path.filename().string();
  if (p.suffix.find('/') != std::string::npos)
    throw ValidationError("the index field must be in the file name");
  if (dir.empty()) dir = ".";

  const std::string digits = p.width > 0 ? "(\\d{" + std::to_string(p.width) + "})" : "(\\d+)";
  const std::regex re(regex_escape(name_prefix) + digits + regex_escape(p.suffix));

  std::vector<int> indices;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (std::regex_match(name, m, re)) indices.push_back(std::stoi(m[1].str()));
    }
  }
  if (indices.empty()) throw IoError("empty sequence: nothing matches '" + pattern + "'");
  std::sort(indices.begin(), indices.end());
  for (std::size_t i = 1; i < indices.size(); ++i)
    if (indices[i] != indices[i - 1] + 1)
      throw IoError("missing frame " + std::to_string(indices[i - 1] + 1) + " in '" + pattern +
                    "'");
  return indices;
}

std::vector<Plane> read_raster(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing file " + path.string());
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (img.empty()) throw IoError("cannot decode " + path.string());
  double max_code = 0.0;
  switch (img.depth()) {
    case CV_8U: max_code = 255.0; break;
    case CV_16U: max_code = 65535.0; break;
    default: throw IoError("unsupported raster depth in " + path.string());
  }
  cv::Mat planar;
  img.convertTo(planar, CV_64F);
  std::vector<cv::Mat> split;
  cv::split(planar, split);
  if (split.size() == 4) split.resize(3);  // drop alpha
  if (split.size() == 3) std::swap(split[0], split[2]);  // BGR -> RGB
  if (split.size() != 1 && split.size() != 3)
    throw IoError("unsupported channel count in " + path.string());

  std::vector<Plane> planes;
  for (const cv::Mat& m : split) {
    Plane p(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
      const double* row = m.ptr<double>(y);
      for (int x = 0; x < m.cols; ++x) p(x, y) = row[x] / max_code;
    }
    planes.push_back(std::move(p));
  }
  return planes;
}

void write_raster(const fs::path& path, const std::vector<Plane>& planes, int bit_depth) {
  if (planes.size() != 1 && planes.size() != 3)
    throw ValidationError("rasters are written with 1 or 3 channels");
  if (bit_depth != 8 && bit_depth != 16) throw ValidationError("bit depth must be 8 or 16");
  const double max_code = bit_depth == 8 ? 255.0 : 65535.0;
  const int w = planes.front().width();
  const int h = planes.front().height();
  std::vector<cv::Mat> mats;
  for (const Plane& p : planes) {
    if (p.width() != w || p.height() != h) throw ValidationError("raster plane size mismatch");
    cv::Mat m(h, w, bit_depth == 8 ? CV_8U : CV_16U);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double v = std::clamp(p(x, y), 0.0, 1.0) * max_code;
        const double code = std::round(v);
        if (bit_depth == 8)
          m.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(code);
        else
          m.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(code);
      }
    mats.push_back(std::move(m));
  }
  if (mats.size() == 3) std::swap(mats[0], mats[2]);  // RGB -> BGR
  cv::Mat merged;
  cv::merge(mats, merged);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), merged)) throw IoError("cannot write " + path.string());
}

ComplementedSequence load_sequence(const std::string& pattern, Layout layout) {
  const auto indices = list_indices(pattern);
  std::vector<Frame> frames;
  for (int index : indices) {
    const fs::path path = format_index(pattern, index);
    std::vector<Plane> planes = read_raster(path);
    Frame frame;
    switch (image_layout(layout)) {
      case Layout::kGray:
        if (planes.size() == 1) {
          frame.channels.push_back(std::move(planes.front()));
        } else {
          Frame color{std::move(planes)};
          frame.channels.push_back(gray_of(color, 3));
        }
        break;
      case Layout::kColor:
        if (planes.size() != 3)
          throw ValidationError("color layout needs color rasters: " + path.string());
        frame.channels = std::move(planes);
        break;
      default: break;
    }
    if (has_saliency(layout)) {
      std::vector<Plane> sal = read_raster(saliency_sidecar(path));
      Frame tmp{std::move(sal)};
      Plane s = tmp.channel_count() == 1 ? tmp.channels.front() : gray_of(tmp, 3);
      if (!s.same_shape(frame.channels.front()))
        throw ValidationError("saliency sidecar dimension mismatch for " + path.string());
      frame.channels.push_back(std::move(s));
    }
    if (!frames.empty() && (frame.width() != frames.front().width() ||
                            frame.height() != frames.front().height()))
      throw ValidationError("dimension mismatch at " + path.string());
    frames.push_back(std::move(frame));
  }
  if (frames.size() < 2) throw ValidationError("sequence needs at least two frames");
  return ComplementedSequence(std::move(frames), layout);
}

void save_sequence(const ComplementedSequence& sequence, const std::string& pattern) {
  const int images = sequence.image_channel_count();
  for (int t = 0; t < sequence.frame_count(); ++t) {
    const Frame& f = sequence.frame(t);
    const fs::path path = format_index(pattern, t);
    std::vector<Plane> planes(f.channels.begin(), f.channels.begin() + images);
    write_raster(path, planes, 8);
    if (has_saliency(sequence.layout()))
      write_raster(saliency_sidecar(path), {f.channels.back()}, 16);
  }
}

void save_flow(const FlowFrame& flow, const fs::path& path) {
  if (!flow.u1.same_shape(flow.u2)) throw ValidationError("flow components differ in shape");
  for (std::size_t i = 0; i < flow.u1.size(); ++i)
    if (!std::isfinite(flow.u1.values()[i]) || !std::isfinite(flow.u2.values()[i]))
      throw ValidationError("non-finite flow value, refusing to save " + path.string());
  std::ofstream os = open_out(path);
  put(os, kFlowTag);
  put(os, static_cast<std::int32_t>(flow.width()));
  put(os, static_cast<std::int32_t>(flow.height()));
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      put(os, static_cast<float>(flow.u1(x, y)));
      put(os, static_cast<float>(flow.u2(x, y)));
    }
  if (!os) throw IoError("write failed for " + path.string());
}

FlowFrame load_flow(const fs::path& path, Plane* valid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  const float tag = get<float>(is, path);
  if (tag != kFlowTag) throw IoError("bad flow tag in " + path.string());
  const auto w = get<std::int32_t>(is, path);
  const auto h = get<std::int32_t>(is, path);
  if (w < 1 || h < 1 || w > (1 << 16) || h > (1 << 16))
    throw IoError("implausible flow dimensions in " + path.string());
  FlowFrame flow{Plane(w, h), Plane(w, h)};
  Plane mask(w, h, 1.0);
  std::vector<float> payload(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 2);
  if (!is.read(reinterpret_cast<char*>(payload.data()),
               static_cast<std::streamsize>(payload.size() * sizeof(float))))
    throw IoError("truncated payload in " + path.string());
  std::size_t k = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float u = payload[k++];
      const float v = payload[k++];
      if (!std::isfinite(u) || !std::isfinite(v) || std::abs(u) > kUnknownFlowThreshold ||
          std::abs(v) > kUnknownFlowThreshold) {
        mask(x, y) = 0.0;
        continue;
      }
      flow.u1(x, y) = u;
      flow.u2(x, y) = v;
    }
  if (valid) *valid = std::move(mask);
  return flow;
}

void save_flow_field(const FlowField& flow, const std::string& pattern) {
  for (int t = 0; t < flow.time_samples(); ++t)
    save_flow(flow.frames[static_cast<std::size_t>(t)], format_index(pattern, t));
}

FlowField load_flow_field(const std::string& pattern) {
  FlowField flow;
  for (int index : list_indices(pattern)) {
    Plane mask;
    flow.frames.push_back(load_flow(format_index(pattern, index), &mask));
    flow.valid.push_back(std::move(mask));
  }
  return flow;
}

void save_map(const Plane& map, const fs::path& path) {
  std::ofstream os = open_out(path);
  os.write("SALF", 4);
  put(os, static_cast<std::int32_t>(map.width()));
  put(os, static_cast<std::int32_t>(map.height()));
  for (double v : map.values()) put(os, static_cast<float>(v));
  if (!os) throw IoError("write failed for " + path.string());
}

Plane load_map(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char tag[4];
  if (!is.read(tag, 4) || std::memcmp(tag, "SALF", 4) != 0)
    throw IoError("bad map tag in " + path.string());
  const auto w = get<std::int32_t>(is, path);
  const auto h = get<std::int32_t>(is, path);
  if (w < 1 || h < 1 || w > (1 << 16) || h > (1 << 16))
    throw IoError("implausible map dimensions in " + path.string());
  Plane map(w, h);
  for (double& v : map.values()) v = get<float>(is, path);
  return map;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream os = open_out(path);
  os << content;
  if (!os) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace salflow
