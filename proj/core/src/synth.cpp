#include "salflow/synth.hpp"

#include "salflow/grid.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace salflow {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform and normal draws built on the raw engine output so that the stream
// does not depend on the standard library's distribution implementations.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix(seed ^ splitmix(stream))) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Stream ids for the independent random sources of a scene.
constexpr std::uint64_t kBackgroundStream = 1;
constexpr std::uint64_t kObjectStream = 100;
constexpr std::uint64_t kNoiseStream = 10000;
constexpr std::uint64_t kViewerStream = 20000;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

template <typename T>
T to_number(std::string_view text, std::string_view key) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw ValidationError("scene spec: bad value '" + std::string(text) + "' for " +
                          std::string(key));
  return value;
}

bool to_bool(std::string_view text, std::string_view key) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError("scene spec: bad boolean '" + std::string(text) + "' for " +
                        std::string(key));
}

std::array<double, 3> to_tint(std::string_view text, std::string_view key) {
  const auto parts = split(text, '/');
  if (parts.size() != 3) throw ValidationError("scene spec: tint needs r/g/b for " + std::string(key));
  return {to_number<double>(parts[0], key), to_number<double>(parts[1], key),
          to_number<double>(parts[2], key)};
}

std::string tint_text(const std::array<double, 3>& t) {
  std::ostringstream out;
  out.precision(17);
  out << t[0] << '/' << t[1] << '/' << t[2];
  return out.str();
}

// "field:value, field:value" lists of object and occluder lines.
std::map<std::string, std::string, std::less<>> fields_of(std::string_view text,
                                                           std::string_view what) {
  std::map<std::string, std::string, std::less<>> out;
  for (std::string_view item : split(text, ',')) {
    if (item.empty()) continue;
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos)
      throw ValidationError("scene spec: " + std::string(what) + " field '" + std::string(item) +
                            "' lacks ':'");
    out.emplace(std::string(trim(item.substr(0, colon))), std::string(trim(item.substr(colon + 1))));
  }
  return out;
}

MovingObject parse_object(std::string_view text) {
  MovingObject o;
  for (const auto& [k, v] : fields_of(text, "object")) {
    if (k == "shape") {
      if (v == "square") o.shape = MovingObject::Shape::kSquare;
      else if (v == "disc") o.shape = MovingObject::Shape::kDisc;
      else throw ValidationError("scene spec: unknown shape '" + v + "'");
    } else if (k == "x") o.x = to_number<double>(v, k);
    else if (k == "y") o.y = to_number<double>(v, k);
    else if (k == "size") o.size = to_number<int>(v, k);
    else if (k == "vx") o.vx = to_number<double>(v, k);
    else if (k == "vy") o.vy = to_number<double>(v, k);
    else if (k == "level") o.level = to_number<double>(v, k);
    else if (k == "contrast") o.contrast = to_number<double>(v, k);
    else if (k == "chroma") o.chroma = to_number<double>(v, k);
    else if (k == "tint") o.tint = to_tint(v, k);
    else throw ValidationError("scene spec: unknown object field '" + k + "'");
  }
  return o;
}

Occluder parse_occluder(std::string_view text) {
  Occluder o;
  for (const auto& [k, v] : fields_of(text, "occluder")) {
    if (k == "x") o.x = to_number<int>(v, k);
    else if (k == "width") o.width = to_number<int>(v, k);
    else if (k == "level") o.level = to_number<double>(v, k);
    else if (k == "tint") o.tint = to_tint(v, k);
    else throw ValidationError("scene spec: unknown occluder field '" + k + "'");
  }
  return o;
}

bool covers(const MovingObject& o, double left, double top, double px, double py) {
  const double half = 0.5 * o.size;
  if (o.shape == MovingObject::Shape::kDisc)
    return std::hypot(px - (left + half), py - (top + half)) < half;
  return px >= left && px < left + o.size && py >= top && py < top + o.size;
}

}  // namespace

ValueNoise::ValueNoise(int width, int height, int cell, std::uint64_t seed, std::uint64_t stream)
    : cols_(width / cell + 4), rows_(height / cell + 4), cell_(cell) {
  Rng rng(seed, stream);
  lattice_.resize(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_));
  for (double& v : lattice_) v = rng.uniform();
}

double ValueNoise::operator()(double x, double y) const {
  // Catmull-Rom interpolation of the lattice, so gradients do not vanish at
  // lattice nodes.
  const double gx = x / cell_ + 1.0;
  const double gy = y / cell_ + 1.0;
  const int ix = static_cast<int>(std::floor(gx));
  const int iy = static_cast<int>(std::floor(gy));
  double acc = 0.0;
  for (int j = -1; j <= 2; ++j) {
    const int ry = std::clamp(iy + j, 0, rows_ - 1);
    const double wy = cubic_kernel(gy - (iy + j));
    for (int i = -1; i <= 2; ++i) {
      const int rx = std::clamp(ix + i, 0, cols_ - 1);
      acc += wy * cubic_kernel(gx - (ix + i)) *
             lattice_[static_cast<std::size_t>(ry) * static_cast<std::size_t>(cols_) +
                      static_cast<std::size_t>(rx)];
    }
  }
  return acc;
}

void SceneSpec::validate() const {
  const auto fail = [](const std::string& what) { throw ValidationError("scene spec: " + what); };
  if (width < 8 || height < 8) fail("frames must be at least 8x8");
  if (frames < 2) fail("need at least 2 frames");
  if (texture_cell < 1) fail("texture_cell must be >= 1");
  if (noise < 0.0) fail("noise must be >= 0");
  if (!contrast_schedule.empty() && static_cast<int>(contrast_schedule.size()) != frames)
    fail("contrast schedule needs one factor per frame");
  if (viewers < 0) fail("viewers must be >= 0");
  if (viewers > 0 && objects.empty()) fail("fixations follow object 0, but there is none");
  if (!(frame_rate > 0.0)) fail("frame_rate must be > 0");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const MovingObject& o = objects[i];
    if (o.size < 1) fail("object " + std::to_string(i) + " size must be >= 1");
    for (int t : {0, frames - 1}) {
      const double left = o.x + o.vx * t;
      const double top = o.y + o.vy * t;
      if (left < 0.0 || top < 0.0 || left + o.size > width || top + o.size > height)
        fail("object " + std::to_string(i) + " leaves the frame at t=" + std::to_string(t));
    }
  }
  for (std::size_t i = 0; i < occluders.size(); ++i) {
    const Occluder& o = occluders[i];
    if (o.width < 1 || o.x < 0 || o.x + o.width > width)
      fail("occluder " + std::to_string(i) + " outside the frame");
  }
}

SceneSpec parse_scene_spec(std::string_view text) {
  SceneSpec s;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ValidationError("scene spec line " + std::to_string(line_no) + ": expected key=value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "width") s.width = to_number<int>(value, key);
    else if (key == "height") s.height = to_number<int>(value, key);
    else if (key == "frames") s.frames = to_number<int>(value, key);
    else if (key == "seed") s.seed = to_number<std::uint64_t>(value, key);
    else if (key == "color") s.color = to_bool(value, key);
    else if (key == "texture_cell") s.texture_cell = to_number<int>(value, key);
    else if (key == "background_level") s.background_level = to_number<double>(value, key);
    else if (key == "background_contrast") s.background_contrast = to_number<double>(value, key);
    else if (key == "background_chroma") s.background_chroma = to_number<double>(value, key);
    else if (key == "background_tint") s.background_tint = to_tint(value, key);
    else if (key == "noise") s.noise = to_number<double>(value, key);
    else if (key == "contrast_schedule") {
      s.contrast_schedule.clear();
      for (std::string_view f : split(value, ','))
        if (!f.empty()) s.contrast_schedule.push_back(to_number<double>(f, key));
    } else if (key == "object") s.objects.push_back(parse_object(value));
    else if (key == "occluder") s.occluders.push_back(parse_occluder(value));
    else if (key == "viewers") s.viewers = to_number<int>(value, key);
    else if (key == "fixation_jitter") s.fixation_jitter = to_number<double>(value, key);
    else if (key == "frame_rate") s.frame_rate = to_number<double>(value, key);
    else
      throw ValidationError("scene spec line " + std::to_string(line_no) + ": unknown key '" +
                            std::string(key) + "'");
  }
  s.validate();
  return s;
}

std::string format_scene_spec(const SceneSpec& s) {
  std::ostringstream out;
  out.precision(17);
  out << "width = " << s.width << "\nheight = " << s.height << "\nframes = " << s.frames
      << "\nseed = " << s.seed << "\ncolor = " << (s.color ? "true" : "false")
      << "\ntexture_cell = " << s.texture_cell << "\nbackground_level = " << s.background_level
      << "\nbackground_contrast = " << s.background_contrast
      << "\nbackground_chroma = " << s.background_chroma
      << "\nbackground_tint = " << tint_text(s.background_tint) << "\nnoise = " << s.noise << '\n';
  if (!s.contrast_schedule.empty()) {
    out << "contrast_schedule = ";
    for (std::size_t i = 0; i < s.contrast_schedule.size(); ++i)
      out << (i ? "," : "") << s.contrast_schedule[i];
    out << '\n';
  }
  for (const MovingObject& o : s.objects)
    out << "object = shape:" << (o.shape == MovingObject::Shape::kDisc ? "disc" : "square")
        << ", x:" << o.x << ", y:" << o.y << ", size:" << o.size << ", vx:" << o.vx
        << ", vy:" << o.vy << ", level:" << o.level << ", contrast:" << o.contrast
        << ", chroma:" << o.chroma << ", tint:" << tint_text(o.tint) << '\n';
  for (const Occluder& o : s.occluders)
    out << "occluder = x:" << o.x << ", width:" << o.width << ", level:" << o.level
        << ", tint:" << tint_text(o.tint) << '\n';
  out << "viewers = " << s.viewers << "\nfixation_jitter = " << s.fixation_jitter
      << "\nframe_rate = " << s.frame_rate << '\n';
  return out.str();
}

RenderedScene render(const SceneSpec& spec) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  const int channels = spec.color ? 3 : 1;

  const ValueNoise background(w, h, spec.texture_cell, spec.seed, kBackgroundStream);
  std::vector<ValueNoise> background_chroma;
  for (int c = 0; c < channels; ++c)
    background_chroma.emplace_back(w, h, spec.texture_cell, spec.seed,
                                   kBackgroundStream + 1 + static_cast<std::uint64_t>(c));
  // Per object: luminance texture then one chroma texture per channel, in
  // object-local coordinates so the pattern moves rigidly.
  std::vector<std::vector<ValueNoise>> textures;
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const int s = spec.objects[i].size + 1;
    std::vector<ValueNoise> tex;
    for (int c = 0; c <= channels; ++c)
      tex.emplace_back(s, s, spec.texture_cell, spec.seed,
                       kObjectStream + 8 * i + static_cast<std::uint64_t>(c));
    textures.push_back(std::move(tex));
  }
  const auto centered = [](double v) { return v - 0.5; };

  const int frames = spec.frames;
  std::vector<Frame> rendered(static_cast<std::size_t>(frames));
  RenderedScene scene;
  scene.visible.assign(static_cast<std::size_t>(frames), Plane(w, h, 1.0));
  scene.object_mask.assign(static_cast<std::size_t>(frames), Plane(w, h));
  scene.hidden_mask.assign(static_cast<std::size_t>(frames), Plane(w, h));
  scene.truth = FlowField::zeros(w, h, frames - 1);

#pragma omp parallel for schedule(static)
  for (int t = 0; t < frames; ++t) {
    const auto st = static_cast<std::size_t>(t);
    Frame frame;
    frame.channels.assign(static_cast<std::size_t>(channels), Plane(w, h));
    Rng noise(spec.seed, kNoiseStream + static_cast<std::uint64_t>(t));
    const double contrast = spec.contrast_schedule.empty() ? 1.0 : spec.contrast_schedule[st];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double px = x + 0.5;
        const double py = y + 0.5;
        std::array<double, 3> value{};
        const double lum = spec.background_level + spec.background_contrast * centered(background(px, py));
        for (int c = 0; c < channels; ++c)
          value[static_cast<std::size_t>(c)] =
              lum * (spec.color ? spec.background_tint[static_cast<std::size_t>(c)] : 1.0) +
              (spec.color ? spec.background_chroma * centered(background_chroma[static_cast<std::size_t>(c)](px, py)) : 0.0);

        int owner = -1;
        // Later objects are drawn on top.
        for (std::size_t i = 0; i < spec.objects.size(); ++i) {
          const MovingObject& o = spec.objects[i];
          const double left = o.x + o.vx * t;
          const double top = o.y + o.vy * t;
          if (!covers(o, left, top, px, py)) continue;
          owner = static_cast<int>(i);
          const double ox = px - left;
          const double oy = py - top;
          const double olum = o.level + o.contrast * centered(textures[i][0](ox, oy));
          for (int c = 0; c < channels; ++c) {
            const auto sc = static_cast<std::size_t>(c);
            value[sc] = olum * (spec.color ? o.tint[sc] : 1.0) +
                        (spec.color ? o.chroma * centered(textures[i][sc + 1](ox, oy)) : 0.0);
          }
        }
        bool occluded = false;
        for (const Occluder& occ : spec.occluders) {
          if (x < occ.x || x >= occ.x + occ.width) continue;
          occluded = true;
          for (int c = 0; c < channels; ++c)
            value[static_cast<std::size_t>(c)] =
                occ.level * (spec.color ? occ.tint[static_cast<std::size_t>(c)] : 1.0);
        }
        if (owner >= 0) {
          scene.object_mask[st](x, y) = 1.0;
          if (occluded) {
            scene.visible[st](x, y) = 0.0;
            scene.hidden_mask[st](x, y) = 1.0;
          } else if (t + 1 < frames) {
            const MovingObject& o = spec.objects[static_cast<std::size_t>(owner)];
            scene.truth.frames[st].u1(x, y) = o.vx;
            scene.truth.frames[st].u2(x, y) = o.vy;
          }
        }
        for (int c = 0; c < channels; ++c) {
          double v = value[static_cast<std::size_t>(c)];
          v = 0.5 + contrast * (v - 0.5);
          if (spec.noise > 0.0) v += spec.noise * noise.normal();
          frame.channels[static_cast<std::size_t>(c)](x, y) = std::clamp(v, 0.0, 1.0);
        }
      }
    rendered[st] = std::move(frame);
  }
  scene.sequence = ComplementedSequence(std::move(rendered), spec.color ? Layout::kColor : Layout::kGray);

  if (!spec.objects.empty()) {
    const MovingObject& o = spec.objects.front();
    for (int t = 0; t < frames; ++t)
      scene.object_center.push_back(
          {o.x + o.vx * t + 0.5 * o.size, o.y + o.vy * t + 0.5 * o.size});
  }
  for (int v = 0; v < spec.viewers; ++v) {
    Rng rng(spec.seed, kViewerStream + static_cast<std::uint64_t>(v));
    const double dx = spec.fixation_jitter * rng.normal();
    const double dy = spec.fixation_jitter * rng.normal();
    for (int t = 0; t < frames; ++t) {
      const auto& c = scene.object_center[static_cast<std::size_t>(t)];
      Fixation f;
      f.viewer = v;
      // Centered inside frame t's time slot so the span maps to frame t alone.
      f.start_s = (t + 0.25) / spec.frame_rate;
      f.end_s = (t + 0.75) / spec.frame_rate;
      f.x = std::clamp(c[0] + dx, 0.0, w - 1e-6);
      f.y = std::clamp(c[1] + dy, 0.0, h - 1e-6);
      scene.fixations.records.push_back(f);
    }
  }
  return scene;
}

OcclusionFrames occlusion_frames(const SceneSpec& spec, const MovingObject& object,
                                 const Occluder& occluder) {
  OcclusionFrames out;
  const double bar_left = occluder.x;
  const double bar_right = occluder.x + occluder.width;
  for (int t = 0; t < spec.frames; ++t) {
    const double left = object.x + object.vx * t;
    const double right = left + object.size;
    if (left < bar_right && right > bar_left) out.overlap.push_back(t);
    if (left >= bar_left && right <= bar_right) out.hidden.push_back(t);
  }
  return out;
}

}  // namespace salflow

namespace salflow {

SceneSpec translation_scene(std::uint64_t seed, bool color, double chroma) {
  SceneSpec s;
  s.frames = 6;
  s.seed = seed;
  s.noise = 0.01;
  s.color = color;
  MovingObject o;
  o.x = 12;
  o.y = 20;
  o.size = 24;
  o.level = 0.6;
  o.contrast = 0.6;
  if (color) {
    s.background_chroma = 0.5 * chroma;
    o.chroma = chroma;
    o.tint = {1.0, 0.7, 0.5};
  }
  s.objects.push_back(o);
  return s;
}

SceneSpec occlusion_scene(std::uint64_t seed) {
  SceneSpec s;
  s.frames = 20;
  s.seed = seed;
  s.noise = 0.01;
  MovingObject o;
  o.size = 6;
  o.x = 18;
  o.y = 29;
  o.level = 0.8;
  o.contrast = 0.5;
  s.objects.push_back(o);
  Occluder bar;
  bar.x = 30;
  bar.width = 7;
  bar.level = 0.15;
  s.occluders.push_back(bar);
  s.viewers = 8;
  s.fixation_jitter = 1.0;
  return s;
}

SceneSpec static_scene(std::uint64_t seed, int frames) {
  SceneSpec s;
  s.frames = frames;
  s.seed = seed;
  return s;
}

}  // namespace salflow
