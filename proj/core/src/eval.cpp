#include "salflow/eval.hpp"

#include "salflow/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace salflow {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  T value{};
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size())
    throw ValidationError("fixations line " + std::to_string(line) + ": bad number '" +
                          std::string(field) + "'");
  return value;
}

void check_same_shape(const Plane& map, const Plane& mask) {
  if (!map.same_shape(mask)) throw ValidationError("map and fixation mask differ in size");
}

bool degenerate(const Plane& mask) {
  std::size_t pos = 0;
  for (double v : mask.values()) pos += v != 0.0;
  return pos == 0 || pos == mask.size();
}

}  // namespace

FixationSet parse_fixations(std::string_view csv) {
  FixationSet set;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!csv.empty()) {
    const std::size_t nl = csv.find('\n');
    std::string_view line = trim(csv.substr(0, nl));
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line != "viewer,start_s,end_s,x,y")
        throw ValidationError("fixations: expected header 'viewer,start_s,end_s,x,y'");
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    if (fields.size() != 5)
      throw ValidationError("fixations line " + std::to_string(line_no) + ": expected 5 fields");
    Fixation f;
    f.viewer = parse_number<int>(fields[0], line_no);
    f.start_s = parse_number<double>(fields[1], line_no);
    f.end_s = parse_number<double>(fields[2], line_no);
    f.x = parse_number<double>(fields[3], line_no);
    f.y = parse_number<double>(fields[4], line_no);
    if (!(f.start_s >= 0.0 && f.start_s < f.end_s))
      throw ValidationError("fixations line " + std::to_string(line_no) +
                            ": need 0 <= start_s < end_s");
    set.records.push_back(f);
  }
  return set;
}

std::string format_fixations(const FixationSet& set) {
  std::ostringstream out;
  out.precision(17);
  out << "viewer,start_s,end_s,x,y\n";
  for (const Fixation& f : set.records)
    out << f.viewer << ',' << f.start_s << ',' << f.end_s << ',' << f.x << ',' << f.y << '\n';
  return out.str();
}

FixationSet load_fixations(const std::filesystem::path& path) {
  return parse_fixations(read_text(path));
}

void save_fixations(const FixationSet& set, const std::filesystem::path& path) {
  write_text(path, format_fixations(set));
}

FixationMatrix::FixationMatrix(int width, int height, int frames, double frame_rate)
    : width_(width), height_(height), frame_rate_(frame_rate) {
  if (width < 1 || height < 1 || frames < 0 || !(frame_rate > 0.0))
    throw ValidationError("invalid fixation matrix geometry");
  marks_.assign(static_cast<std::size_t>(frames),
                std::vector<std::uint8_t>(static_cast<std::size_t>(width) *
                                          static_cast<std::size_t>(height), 0));
}

int FixationMatrix::count(int t) const {
  return static_cast<int>(std::count(marks_[idx(t)].begin(), marks_[idx(t)].end(), 1));
}

std::vector<std::pair<int, int>> FixationMatrix::positions(int t) const {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (at(t, x, y)) out.emplace_back(x, y);
  return out;
}

Plane FixationMatrix::mask(int t) const {
  Plane out(width_, height_);
  const auto& m = marks_[idx(t)];
  for (std::size_t i = 0; i < m.size(); ++i) out.values()[i] = m[i];
  return out;
}

std::pair<int, int> fixation_frame_span(double start_s, double end_s, double frame_rate) {
  // The small bias keeps exact products like 2.0 * 25 from flooring to 49.
  constexpr double kBias = 1e-9;
  return {static_cast<int>(std::floor(start_s * frame_rate + kBias)),
          static_cast<int>(std::floor(end_s * frame_rate + kBias))};
}

FixationMatrix rasterize_fixations(const FixationSet& set, double frame_rate, int width,
                                   int height, int frames) {
  FixationMatrix out(width, height, frames, frame_rate);
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    const Fixation& f = set.records[i];
    const int x = static_cast<int>(std::floor(f.x));
    const int y = static_cast<int>(std::floor(f.y));
    if (!(f.x >= 0.0 && f.y >= 0.0) || x >= width || y >= height) {
      std::ostringstream msg;
      msg << "fixation record " << i << " at (" << f.x << ", " << f.y << ") is outside the "
          << width << "x" << height << " frame";
      throw ValidationError(msg.str());
    }
    const auto [first, last] = fixation_frame_span(f.start_s, f.end_s, frame_rate);
    if (first < 0 || last >= frames) {
      std::ostringstream msg;
      msg << "fixation record " << i << " spans frames " << first << ".." << last
          << " beyond the " << frames << "-frame sequence";
      throw ValidationError(msg.str());
    }
    for (int t = first; t <= last; ++t) out.mark(t, x, y);
  }
  return out;
}

double auc(const Plane& map, const Plane& fixated) {
  check_same_shape(map, fixated);
  if (degenerate(fixated)) throw ValidationError("undefined classifier: degenerate fixation mask");
  const auto v = map.values();
  const auto m = fixated.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double positives = 0.0;
  for (double x : m) positives += x != 0.0;
  const double negatives = static_cast<double>(m.size()) - positives;

  // Thresholds descending so the curve runs from (0,0) towards (1,1).
  std::vector<std::pair<double, double>> curve{{0.0, 0.0}};
  for (int k = kAucThresholds - 1; k >= 0; --k) {
    const double th = *lo + (*hi - *lo) * static_cast<double>(k) / (kAucThresholds - 1);
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] >= th) (m[i] != 0.0 ? tp : fp) += 1.0;
    curve.emplace_back(fp / negatives, tp / positives);
  }
  curve.emplace_back(1.0, 1.0);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].first - curve[i - 1].first) * (curve[i].second + curve[i - 1].second) * 0.5;
  return area;
}

double auc_exact(const Plane& map, const Plane& fixated) {
  check_same_shape(map, fixated);
  if (degenerate(fixated)) throw ValidationError("undefined classifier: degenerate fixation mask");
  const auto v = map.values();
  const auto m = fixated.values();
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  // Mann-Whitney U through mid-ranks of tied groups.
  double rank_sum = 0.0, positives = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (m[order[k]] != 0.0) {
        rank_sum += mid_rank;
        positives += 1.0;
      }
    i = j;
  }
  const double negatives = static_cast<double>(v.size()) - positives;
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double nss(const Plane& map, const std::vector<std::pair<int, int>>& positions) {
  if (positions.empty()) throw ValidationError("NSS needs at least one fixation");
  const SaliencyMap z = to_z_scored({map, Normalization::kRaw});
  double acc = 0.0;
  for (const auto& [x, y] : positions) {
    if (x < 0 || y < 0 || x >= map.width() || y >= map.height())
      throw ValidationError("NSS fixation outside the map");
    acc += z.values(x, y);
  }
  return acc / static_cast<double>(positions.size());
}

double angular_error(double u1, double u2, double v1, double v2) {
  // Angle between (u1, u2, 1) and (v1, v2, 1). atan2 of the cross and dot
  // products equals the arccos form but stays accurate near 0 and 180 degrees.
  const double cx = u2 - v2;
  const double cy = v1 - u1;
  const double cz = u1 * v2 - u2 * v1;
  const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
  const double dot = u1 * v1 + u2 * v2 + 1.0;
  return std::atan2(cross, dot) * 180.0 / std::numbers::pi;
}

Plane angular_error_map(const FlowFrame& flow, const FlowFrame& truth) {
  if (!flow.u1.same_shape(truth.u1)) throw ValidationError("flow and truth differ in size");
  Plane out(flow.width(), flow.height());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values()[i] = angular_error(flow.u1.values()[i], flow.u2.values()[i],
                                    truth.u1.values()[i], truth.u2.values()[i]);
  return out;
}

AngularErrorReport average_angular_error(const FlowField& flow, const FlowField& truth,
                                         const std::vector<Plane>& valid) {
  if (flow.time_samples() != truth.time_samples())
    throw ValidationError("flow and truth have different numbers of samples");
  if (!valid.empty() && static_cast<int>(valid.size()) != flow.time_samples())
    throw ValidationError("one validity mask per sample expected");
  AngularErrorReport report;
  double acc = 0.0;
  for (int t = 0; t < flow.time_samples(); ++t) {
    const auto st = static_cast<std::size_t>(t);
    report.maps.push_back(angular_error_map(flow.frames[st], truth.frames[st]));
    const Plane& map = report.maps.back();
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (!valid.empty() && valid[st].values()[i] == 0.0) continue;
      acc += map.values()[i];
      ++report.valid_pixels;
    }
  }
  report.mean = report.valid_pixels == 0 ? std::numeric_limits<double>::quiet_NaN()
                                         : acc / static_cast<double>(report.valid_pixels);
  return report;
}

std::vector<ScoreCurve> score_models(const std::vector<ModelMaps>& models,
                                     const FixationMatrix& fixations,
                                     const std::vector<int>& frames) {
  std::vector<int> selected = frames;
  if (selected.empty()) {
    int common = fixations.frames();
    for (const ModelMaps& m : models) common = std::min(common, static_cast<int>(m.maps.size()));
    for (int t = 0; t < common; ++t) selected.push_back(t);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ScoreCurve> curves;
  for (const ModelMaps& model : models) {
    ScoreCurve curve;
    curve.model = model.name;
    curve.frames = selected;
    double sum_auc = 0.0, sum_nss = 0.0;
    int scored = 0;
    for (int t : selected) {
      if (t < 0 || t >= static_cast<int>(model.maps.size()) || t >= fixations.frames())
        throw ValidationError("model '" + model.name + "' has no map for frame " +
                              std::to_string(t));
      const Plane& map = model.maps[static_cast<std::size_t>(t)];
      const Plane mask = fixations.mask(t);
      if (degenerate(mask)) {
        curve.auc.push_back(nan);
        curve.nss.push_back(nan);
        ++curve.skipped;
        continue;
      }
      curve.auc.push_back(auc(map, mask));
      curve.nss.push_back(nss(map, fixations.positions(t)));
      sum_auc += curve.auc.back();
      sum_nss += curve.nss.back();
      ++scored;
    }
    curve.mean_auc = scored ? sum_auc / scored : nan;
    curve.mean_nss = scored ? sum_nss / scored : nan;
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::string format_score_curves(const std::vector<ScoreCurve>& curves) {
  std::ostringstream out;
  out.precision(10);
  out << "model,frame,auc,nss\n";
  for (const ScoreCurve& c : curves)
    for (std::size_t i = 0; i < c.frames.size(); ++i)
      out << c.model << ',' << c.frames[i] << ',' << c.auc[i] << ',' << c.nss[i] << '\n';
  return out.str();
}

}  // namespace salflow
