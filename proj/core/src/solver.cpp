#include "salflow/solver.hpp"

#include "salflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace salflow {

namespace {

std::vector<Plane> component(const FlowField& flow, int which) {
  std::vector<Plane> out;
  out.reserve(flow.frames.size());
  for (const FlowFrame& f : flow.frames) out.push_back(which == 0 ? f.u1 : f.u2);
  return out;
}

double squared_norm(const FlowField& flow, int which) {
  double acc = 0.0;
  for (const FlowFrame& f : flow.frames)
    for (double v : (which == 0 ? f.u1 : f.u2).values()) acc += v * v;
  return acc;
}

double squared_distance(const FlowField& a, const FlowField& b, int which) {
  double acc = 0.0;
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    const auto av = (which == 0 ? a.frames[t].u1 : a.frames[t].u2).values();
    const auto bv = (which == 0 ? b.frames[t].u1 : b.frames[t].u2).values();
    for (std::size_t i = 0; i < av.size(); ++i) acc += (av[i] - bv[i]) * (av[i] - bv[i]);
  }
  return acc;
}

// Central differences in the interior, one-sided at the ends, of a strided
// sequence p[0], p[stride], ..., p[(n - 1) * stride] at index i.
inline double diff(const double* p, int i, int n, std::ptrdiff_t stride) {
  if (n < 2) return 0.0;
  if (i == 0) return p[stride] - p[0];
  if (i == n - 1) return p[0] - p[-stride];
  return 0.5 * (p[stride] - p[-stride]);
}

// Cell-centered components of grad3 of both flow components, per sample;
// the temporal parts already carry lambda.
struct CellGradients {
  std::vector<Plane> x1, y1, t1, x2, y2, t2;
};

void cell_gradients(const FlowField& flow, double lambda, CellGradients& g) {
  const int n = flow.time_samples();
  const int w = flow.width();
  const int h = flow.height();
  const auto size = static_cast<std::size_t>(n);
  for (auto* planes : {&g.x1, &g.y1, &g.t1, &g.x2, &g.y2, &g.t2})
    if (planes->size() != size || (n > 0 && !(*planes)[0].same_shape(flow.frames[0].u1)))
      planes->assign(size, Plane(w, h));
  const std::ptrdiff_t row = w;
#pragma omp parallel for schedule(static)
  for (int t = 0; t < n; ++t) {
    const auto st = static_cast<std::size_t>(t);
    for (int c = 0; c < 2; ++c) {
      const Plane& u = c == 0 ? flow.frames[st].u1 : flow.frames[st].u2;
      const Plane* prev = t > 0 ? (c == 0 ? &flow.frames[st - 1].u1 : &flow.frames[st - 1].u2) : nullptr;
      const Plane* next = t + 1 < n ? (c == 0 ? &flow.frames[st + 1].u1 : &flow.frames[st + 1].u2) : nullptr;
      double* gx = (c == 0 ? g.x1 : g.x2)[st].values().data();
      double* gy = (c == 0 ? g.y1 : g.y2)[st].values().data();
      double* gt = (c == 0 ? g.t1 : g.t2)[st].values().data();
      const double* p = u.values().data();
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(y) * row + x;
          gx[k] = diff(p + k, x, w, 1);
          gy[k] = diff(p + k, y, h, row);
          double d = 0.0;
          if (prev && next) d = 0.5 * (next->values()[static_cast<std::size_t>(k)] -
                                       prev->values()[static_cast<std::size_t>(k)]);
          else if (next) d = next->values()[static_cast<std::size_t>(k)] - p[k];
          else if (prev) d = p[k] - prev->values()[static_cast<std::size_t>(k)];
          gt[k] = lambda * d;
        }
    }
  }
}

void ensure_shape(FaceWeights& fw, int w, int h, int n) {
  const auto size = static_cast<std::size_t>(n);
  for (auto* planes : {&fw.x, &fw.y, &fw.t})
    if (planes->size() != size || (n > 0 && ((*planes)[0].width() != w || (*planes)[0].height() != h)))
      planes->assign(size, Plane(w, h));
}

void average_faces_into(const std::vector<Plane>& g, double lambda, FaceWeights& fw) {
  const int n = static_cast<int>(g.size());
  if (n == 0) return;
  const int w = g[0].width();
  const int h = g[0].height();
  ensure_shape(fw, w, h, n);
  const double lambda2 = lambda * lambda;
#pragma omp parallel for schedule(static)
  for (int t = 0; t < n; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const Plane& c = g[st];
    Plane& fx = fw.x[st];
    Plane& fy = fw.y[st];
    Plane& ft = fw.t[st];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        fx(x, y) = x + 1 < w ? 0.5 * (c(x, y) + c(x + 1, y)) : 0.0;
        fy(x, y) = y + 1 < h ? 0.5 * (c(x, y) + c(x, y + 1)) : 0.0;
        ft(x, y) = t + 1 < n ? lambda2 * 0.5 * (c(x, y) + g[st + 1](x, y)) : 0.0;
      }
  }
}

void face_centered_into(const FlowField& flow, double lambda, double epsilon,
                        CellGradients& g, FaceWeights& fw) {
  const int n = flow.time_samples();
  const int w = flow.width();
  const int h = flow.height();
  cell_gradients(flow, lambda, g);
  ensure_shape(fw, w, h, n);
  const double lambda2 = lambda * lambda;
  const auto sq = [](double a) { return a * a; };
#pragma omp parallel for schedule(static)
  for (int t = 0; t < n; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const Plane& u1 = flow.frames[st].u1;
    const Plane& u2 = flow.frames[st].u2;
    Plane& fx = fw.x[st];
    Plane& fy = fw.y[st];
    Plane& ft = fw.t[st];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        // Each face: normal difference across it, tangential components as
        // means of the two adjacent cell values.
        if (x + 1 < w) {
          const double s = sq(u1(x + 1, y) - u1(x, y)) + sq(u2(x + 1, y) - u2(x, y)) +
                           sq(0.5 * (g.y1[st](x, y) + g.y1[st](x + 1, y))) +
                           sq(0.5 * (g.y2[st](x, y) + g.y2[st](x + 1, y))) +
                           sq(0.5 * (g.t1[st](x, y) + g.t1[st](x + 1, y))) +
                           sq(0.5 * (g.t2[st](x, y) + g.t2[st](x + 1, y)));
          fx(x, y) = psi_prime(s, epsilon);
        } else {
          fx(x, y) = 0.0;
        }
        if (y + 1 < h) {
          const double s = sq(u1(x, y + 1) - u1(x, y)) + sq(u2(x, y + 1) - u2(x, y)) +
                           sq(0.5 * (g.x1[st](x, y) + g.x1[st](x, y + 1))) +
                           sq(0.5 * (g.x2[st](x, y) + g.x2[st](x, y + 1))) +
                           sq(0.5 * (g.t1[st](x, y) + g.t1[st](x, y + 1))) +
                           sq(0.5 * (g.t2[st](x, y) + g.t2[st](x, y + 1)));
          fy(x, y) = psi_prime(s, epsilon);
        } else {
          fy(x, y) = 0.0;
        }
        if (t + 1 < n) {
          const auto sn = st + 1;
          const double s = lambda2 * (sq(flow.frames[sn].u1(x, y) - u1(x, y)) +
                                      sq(flow.frames[sn].u2(x, y) - u2(x, y))) +
                           sq(0.5 * (g.x1[st](x, y) + g.x1[sn](x, y))) +
                           sq(0.5 * (g.x2[st](x, y) + g.x2[sn](x, y))) +
                           sq(0.5 * (g.y1[st](x, y) + g.y1[sn](x, y))) +
                           sq(0.5 * (g.y2[st](x, y) + g.y2[sn](x, y)));
          ft(x, y) = lambda2 * psi_prime(s, epsilon);
        } else {
          ft(x, y) = 0.0;
        }
      }
  }
}

// Stencil sums at a voxel: S = sum of face weights, N = weighted neighbor sum.
struct StencilSums {
  double s;
  double n1;
  double n2;
};

inline StencilSums stencil(const FaceWeights& fw, const FlowField& flow, int x, int y, int t) {
  const auto st = static_cast<std::size_t>(t);
  const Plane& p1 = flow.frames[st].u1;
  const Plane& p2 = flow.frames[st].u2;
  const int w = p1.width();
  const int h = p1.height();
  const int samples = flow.time_samples();
  StencilSums acc{0.0, 0.0, 0.0};
  const auto add = [&](double wf, double v1, double v2) {
    acc.s += wf;
    acc.n1 += wf * v1;
    acc.n2 += wf * v2;
  };
  if (x > 0) add(fw.x[st](x - 1, y), p1(x - 1, y), p2(x - 1, y));
  if (x < w - 1) add(fw.x[st](x, y), p1(x + 1, y), p2(x + 1, y));
  if (y > 0) add(fw.y[st](x, y - 1), p1(x, y - 1), p2(x, y - 1));
  if (y < h - 1) add(fw.y[st](x, y), p1(x, y + 1), p2(x, y + 1));
  if (t > 0) add(fw.t[st - 1](x, y), flow.frames[st - 1].u1(x, y), flow.frames[st - 1].u2(x, y));
  if (t < samples - 1)
    add(fw.t[st](x, y), flow.frames[st + 1].u1(x, y), flow.frames[st + 1].u2(x, y));
  return acc;
}

// Reused buffers of one level solve.
struct Workspace {
  CellGradients gradients;
  std::vector<Plane> cell_diffusivity;
  FaceWeights faces;
};

void faces_into(const FlowField& flow, const SolverConfig& config, Workspace& ws) {
  if (config.faces == FaceDiffusivity::kFace) {
    face_centered_into(flow, config.lambda, config.epsilon, ws.gradients, ws.faces);
    return;
  }
  ws.cell_diffusivity = diffusivity(flow, config.lambda, config.epsilon);
  average_faces_into(ws.cell_diffusivity, config.lambda, ws.faces);
}

void sweep_into(const LevelData& data, const FlowField& flow, const FaceWeights& fw,
                const SolverConfig& config, FlowField& next) {
  const double tau = config.tau;
  const double alpha = config.alpha;
  const bool implicit_center = config.scheme == DiffusionScheme::kCenterImplicit;
  const int rows = data.samples * data.height;
  bool finite = true;
#pragma omp parallel for schedule(static) reduction(&& : finite)
  for (int r = 0; r < rows; ++r) {
    const int t = r / data.height;
    const int y = r % data.height;
    const auto st = static_cast<std::size_t>(t);
    const Plane& a11 = data.a11[st];
    const Plane& a12 = data.a12[st];
    const Plane& a22 = data.a22[st];
    const Plane& b1 = data.b1[st];
    const Plane& b2 = data.b2[st];
    const Plane& u1 = flow.frames[st].u1;
    const Plane& u2 = flow.frames[st].u2;
    FlowFrame& out = next.frames[st];
    for (int x = 0; x < data.width; ++x) {
      const StencilSums s = stencil(fw, flow, x, y, t);
      const double v1 = u1(x, y);
      const double v2 = u2(x, y);
      double n1, n2;
      if (implicit_center) {
        n1 = (v1 + tau * (alpha * s.n1 - a12(x, y) * v2 - b1(x, y))) /
             (1.0 + tau * a11(x, y) + tau * alpha * s.s);
        n2 = (v2 + tau * (alpha * s.n2 - a12(x, y) * v1 - b2(x, y))) /
             (1.0 + tau * a22(x, y) + tau * alpha * s.s);
      } else {
        n1 = (v1 + tau * (alpha * (s.n1 - s.s * v1) - a12(x, y) * v2 - b1(x, y))) /
             (1.0 + tau * a11(x, y));
        n2 = (v2 + tau * (alpha * (s.n2 - s.s * v2) - a12(x, y) * v1 - b2(x, y))) /
             (1.0 + tau * a22(x, y));
      }
      finite = finite && std::isfinite(n1) && std::isfinite(n2);
      out.u1(x, y) = n1;
      out.u2(x, y) = n2;
    }
  }
  if (!finite) throw NumericalError("non-finite flow update (step size tau too large?)");
}

}  // namespace

DiffusionScheme parse_diffusion_scheme(const std::string& text) {
  if (text == "explicit") return DiffusionScheme::kExplicit;
  if (text == "center-implicit") return DiffusionScheme::kCenterImplicit;
  throw ValidationError("unknown diffusion scheme '" + text + "'");
}

std::string to_string(DiffusionScheme scheme) {
  return scheme == DiffusionScheme::kExplicit ? "explicit" : "center-implicit";
}

FaceDiffusivity parse_face_diffusivity(const std::string& text) {
  if (text == "average") return FaceDiffusivity::kAverage;
  if (text == "face") return FaceDiffusivity::kFace;
  throw ValidationError("unknown face diffusivity '" + text + "'");
}

std::string to_string(FaceDiffusivity mode) {
  return mode == FaceDiffusivity::kAverage ? "average" : "face";
}

void SolverConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ValidationError("invalid " + what); };
  if (!(alpha > 0.0)) fail("alpha (must be > 0)");
  if (!(lambda >= 0.0)) fail("lambda (must be >= 0)");
  if (!(tau > 0.0)) fail("tau (must be > 0)");
  if (!(xi > 0.0)) fail("xi (must be > 0)");
  if (!(epsilon > 0.0)) fail("epsilon (must be > 0)");
  if (!(tol > 0.0)) fail("tol (must be > 0)");
  if (levels < 1) fail("levels (must be >= 1)");
  if (!(scale > 0.0 && scale < 1.0)) fail("scale (must be in (0,1))");
  if (max_iterations < 0) fail("max_iterations (must be >= 0)");
  if (median_radius < 0) fail("median_radius (must be >= 0)");
  if (!(presmooth_sigma >= 0.0)) fail("presmooth_sigma (must be >= 0)");
  if (temporal_window < 0 || temporal_window == 1) fail("temporal_window (0 or >= 2)");
  if (!(intensity_scale > 0.0)) fail("intensity_scale (must be > 0)");
}

WeightField compute_weights(const ComplementedSequence& sequence, double xi,
                            double intensity_scale) {
  const bool salient = has_saliency(sequence.layout());
  // xi is a contrast floor in unit-range intensity, scaled like the gradients.
  const double floor2 = (intensity_scale * xi) * (intensity_scale * xi);
  const int images = sequence.image_channel_count();
  WeightField field;
  for (const Frame& frame : sequence.frames()) {
    std::vector<Plane> weights;
    for (int i = 0; i < images; ++i) {
      const Plane& f = frame.channels[static_cast<std::size_t>(i)];
      const Plane gx = derivative_x(f);
      const Plane gy = derivative_y(f);
      Plane b(f.width(), f.height());
      for (int y = 0; y < f.height(); ++y)
        for (int x = 0; x < f.width(); ++x) {
          const double sx = intensity_scale * gx(x, y);
          const double sy = intensity_scale * gy(x, y);
          const double num = salient ? frame.channels.back()(x, y) : 1.0;
          b(x, y) = num / std::sqrt(sx * sx + sy * sy + floor2);
        }
      weights.push_back(std::move(b));
    }
    if (salient) weights.emplace_back(frame.width(), frame.height(), 1.0);
    field.b.push_back(std::move(weights));
  }
  return field;
}

ComplementedSequence presmooth(const ComplementedSequence& sequence, double sigma) {
  std::vector<Frame> frames = sequence.frames();
#pragma omp parallel for schedule(static)
  for (int t = 0; t < static_cast<int>(frames.size()); ++t)
    for (Plane& p : frames[static_cast<std::size_t>(t)].channels) p = gaussian_blur(p, sigma);
  return ComplementedSequence(std::move(frames), sequence.layout());
}

std::vector<std::pair<int, int>> pyramid_sizes(int width, int height, int levels, double scale) {
  if (levels < 1) throw ValidationError("pyramid needs at least one level");
  std::vector<std::pair<int, int>> sizes;
  for (int k = 0; k < levels; ++k) {
    const double f = std::pow(scale, levels - 1 - k);
    sizes.emplace_back(static_cast<int>(std::lround(f * width)),
                       static_cast<int>(std::lround(f * height)));
  }
  return sizes;
}

std::vector<ComplementedSequence> build_pyramid(const ComplementedSequence& sequence,
                                                int levels, double scale) {
  const auto sizes = pyramid_sizes(sequence.width(), sequence.height(), levels, scale);
  if (sizes.front().first < 8 || sizes.front().second < 8) {
    std::ostringstream msg;
    msg << "sequence " << sequence.width() << "x" << sequence.height() << " too small for "
        << levels << " pyramid levels at scale " << scale << " (coarsest "
        << sizes.front().first << "x" << sizes.front().second << ", need >= 8x8)";
    throw ValidationError(msg.str());
  }
  std::vector<ComplementedSequence> pyramid(static_cast<std::size_t>(levels));
  pyramid.back() = sequence;
  for (int k = levels - 2; k >= 0; --k) {
    const ComplementedSequence& finer = pyramid[static_cast<std::size_t>(k + 1)];
    const auto [w, h] = sizes[static_cast<std::size_t>(k)];
    std::vector<Frame> frames;
    for (const Frame& f : finer.frames()) {
      Frame g;
      for (const Plane& p : f.channels) g.channels.push_back(resample_bicubic(p, w, h));
      frames.push_back(std::move(g));
    }
    pyramid[static_cast<std::size_t>(k)] = ComplementedSequence(std::move(frames), finer.layout());
  }
  return pyramid;
}

void LevelData::assemble() {
  a11.assign(static_cast<std::size_t>(samples), Plane(width, height));
  a12 = a11;
  a22 = a11;
  b1 = a11;
  b2 = a11;
  for (int t = 0; t < samples; ++t) {
    const auto st = static_cast<std::size_t>(t);
    for (int i = 0; i < channels; ++i) {
      const auto si = static_cast<std::size_t>(i);
      auto gx = fx[st][si].values();
      auto gy = fy[st][si].values();
      auto gt = ft[st][si].values();
      auto b = weight[st][si].values();
      auto p11 = a11[st].values();
      auto p12 = a12[st].values();
      auto p22 = a22[st].values();
      auto q1 = b1[st].values();
      auto q2 = b2[st].values();
      for (std::size_t k = 0; k < gx.size(); ++k) {
        p11[k] += b[k] * gx[k] * gx[k];
        p12[k] += b[k] * gx[k] * gy[k];
        p22[k] += b[k] * gy[k] * gy[k];
        q1[k] += b[k] * gx[k] * gt[k];
        q2[k] += b[k] * gy[k] * gt[k];
      }
    }
  }
}

LevelData make_level_data(const ComplementedSequence& level, const SolverConfig& config) {
  LevelData data;
  data.width = level.width();
  data.height = level.height();
  data.samples = level.frame_count() - 1;
  data.channels = level.channel_count();
  const double k = config.intensity_scale;
  const WeightField weights = compute_weights(level, config.xi, k);
  const int frames = level.frame_count();
  for (int t = 0; t < data.samples; ++t) {
    std::vector<Plane> gx, gy, gt;
    for (int i = 0; i < data.channels; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const Plane& cur = level.frame(t).channels[si];
      Plane dx = derivative_x(cur);
      Plane dy = derivative_y(cur);
      Plane dt(data.width, data.height);
      const Plane& next = level.frame(t + 1).channels[si];
      if (t >= 1 && t + 1 < frames) {
        const Plane& prev = level.frame(t - 1).channels[si];
        for (std::size_t p = 0; p < dt.size(); ++p)
          dt.values()[p] = 0.5 * (next.values()[p] - prev.values()[p]);
      } else {
        for (std::size_t p = 0; p < dt.size(); ++p)
          dt.values()[p] = next.values()[p] - cur.values()[p];
      }
      for (double& v : dx.values()) v *= k;
      for (double& v : dy.values()) v *= k;
      for (double& v : dt.values()) v *= k;
      gx.push_back(std::move(dx));
      gy.push_back(std::move(dy));
      gt.push_back(std::move(dt));
    }
    data.fx.push_back(std::move(gx));
    data.fy.push_back(std::move(gy));
    data.ft.push_back(std::move(gt));
    data.weight.push_back(weights.b[static_cast<std::size_t>(t)]);
  }
  data.assemble();
  return data;
}

std::vector<Plane> diffusivity(const FlowField& flow, double lambda, double epsilon) {
  CellGradients g;
  cell_gradients(flow, lambda, g);
  const int samples = flow.time_samples();
  std::vector<Plane> out(static_cast<std::size_t>(samples));
  for (int t = 0; t < samples; ++t) {
    const auto st = static_cast<std::size_t>(t);
    Plane d(flow.width(), flow.height());
    for (std::size_t k = 0; k < d.size(); ++k) {
      const auto sq = [&](const std::vector<Plane>& p) { return p[st].values()[k] * p[st].values()[k]; };
      d.values()[k] =
          psi_prime(sq(g.x1) + sq(g.y1) + sq(g.t1) + sq(g.x2) + sq(g.y2) + sq(g.t2), epsilon);
    }
    out[st] = std::move(d);
  }
  return out;
}

FaceWeights average_face_weights(const std::vector<Plane>& g, double lambda) {
  FaceWeights fw;
  average_faces_into(g, lambda, fw);
  return fw;
}

FaceWeights face_centered_weights(const FlowField& flow, double lambda, double epsilon) {
  CellGradients g;
  FaceWeights fw;
  face_centered_into(flow, lambda, epsilon, g, fw);
  return fw;
}

FaceWeights face_weights(const FlowField& flow, const SolverConfig& config) {
  Workspace ws;
  faces_into(flow, config, ws);
  return ws.faces;
}

std::vector<Plane> divergence(const std::vector<Plane>& u, const FaceWeights& faces) {
  FlowField view;
  for (const Plane& p : u) view.frames.push_back({p, p});
  std::vector<Plane> out;
  for (int t = 0; t < view.time_samples(); ++t) {
    const Plane& p = u[static_cast<std::size_t>(t)];
    Plane d(p.width(), p.height());
    for (int y = 0; y < p.height(); ++y)
      for (int x = 0; x < p.width(); ++x) {
        const StencilSums s = stencil(faces, view, x, y, t);
        d(x, y) = s.n1 - s.s * p(x, y);
      }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Plane> divergence(const std::vector<Plane>& u, const std::vector<Plane>& g,
                              double lambda) {
  return divergence(u, average_face_weights(g, lambda));
}

FlowField fixed_point_sweep(const LevelData& data, const FlowField& flow,
                            const SolverConfig& config) {
  Workspace ws;
  faces_into(flow, config, ws);
  FlowField next = FlowField::zeros(data.width, data.height, data.samples);
  sweep_into(data, flow, ws.faces, config, next);
  return next;
}

double euler_lagrange_residual(const LevelData& data, const FlowField& flow,
                               const SolverConfig& config) {
  const FaceWeights fw = face_weights(flow, config);
  const std::vector<Plane> div1 = divergence(component(flow, 0), fw);
  const std::vector<Plane> div2 = divergence(component(flow, 1), fw);
  double acc = 0.0;
  for (int t = 0; t < data.samples; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const auto u1 = flow.frames[st].u1.values();
    const auto u2 = flow.frames[st].u2.values();
    for (std::size_t k = 0; k < u1.size(); ++k) {
      const double r1 = data.a11[st].values()[k] * u1[k] + data.a12[st].values()[k] * u2[k] +
                        data.b1[st].values()[k] - config.alpha * div1[st].values()[k];
      const double r2 = data.a12[st].values()[k] * u1[k] + data.a22[st].values()[k] * u2[k] +
                        data.b2[st].values()[k] - config.alpha * div2[st].values()[k];
      acc += r1 * r1 + r2 * r2;
    }
  }
  return std::sqrt(acc);
}

LevelResult solve_level(const LevelData& data, const FlowField& init, const SolverConfig& config) {
  if (init.time_samples() != data.samples || init.width() != data.width ||
      init.height() != data.height)
    throw ValidationError("initial flow does not match the level geometry");
  LevelResult result{init, {}};
  result.log.width = data.width;
  result.log.height = data.height;
  if (config.max_iterations == 0) return result;

  const double start_norm =
      std::max(1.0, std::sqrt(squared_norm(init, 0) + squared_norm(init, 1)));
  FlowField current = init;
  FlowField next = init;
  Workspace ws;
  for (int k = 0; k < config.max_iterations; ++k) {
    faces_into(current, config, ws);
    sweep_into(data, current, ws.faces, config, next);
    const double n1 = squared_norm(next, 0);
    const double n2 = squared_norm(next, 1);
    const double change1 = std::sqrt(squared_distance(next, current, 0)) /
                           (std::sqrt(squared_norm(current, 0)) + kRelativeChangeGuard);
    const double change2 = std::sqrt(squared_distance(next, current, 1)) /
                           (std::sqrt(squared_norm(current, 1)) + kRelativeChangeGuard);
    const double norm = std::sqrt(n1 + n2);
    if (norm > 1e6 * start_norm) {
      std::ostringstream msg;
      msg << "divergence at level " << data.width << "x" << data.height << ", iteration "
          << k + 1 << " (flow norm " << norm << ")";
      throw NumericalError(msg.str());
    }
    std::swap(current, next);
    result.log.iterations = k + 1;
    result.log.change_u1 = change1;
    result.log.change_u2 = change2;
    if (change1 < config.tol && change2 < config.tol) {
      result.log.converged = true;
      break;
    }
  }
  for (FlowFrame& f : current.frames) {
    f.u1 = median_filter(f.u1, config.median_radius);
    f.u2 = median_filter(f.u2, config.median_radius);
  }
  result.flow = std::move(current);
  return result;
}

FlowField prolong(const FlowField& flow, int width, int height) {
  FlowField out;
  const double rx = static_cast<double>(width) / flow.width();
  const double ry = static_cast<double>(height) / flow.height();
  for (const FlowFrame& f : flow.frames) {
    FlowFrame g{resample_bicubic(f.u1, width, height), resample_bicubic(f.u2, width, height)};
    for (double& v : g.u1.values()) v *= rx;
    for (double& v : g.u2.values()) v *= ry;
    out.frames.push_back(std::move(g));
  }
  return out;
}

SolveResult solve_sequence(const ComplementedSequence& sequence, const SolverConfig& config) {
  config.validate();
  const int frames = sequence.frame_count();
  if (frames < 2) throw ValidationError("solve needs at least two frames");
  const int window =
      config.temporal_window == 0 ? frames : std::min(config.temporal_window, frames);

  SolveResult result;
  int window_index = 0;
  for (int start = 0; start < frames - 1; start += window - 1, ++window_index) {
    const int end = std::min(start + window - 1, frames - 1);
    std::vector<Frame> part(sequence.frames().begin() + start,
                            sequence.frames().begin() + end + 1);
    const ComplementedSequence sub(std::move(part), sequence.layout());
    const auto pyramid = build_pyramid(sub, config.levels, config.scale);

    FlowField flow;
    for (int k = 0; k < config.levels; ++k) {
      const ComplementedSequence& raw = pyramid[static_cast<std::size_t>(k)];
      const ComplementedSequence level =
          config.presmooth_sigma > 0.0 ? presmooth(raw, config.presmooth_sigma) : raw;
      const LevelData data = make_level_data(level, config);
      const FlowField init = k == 0 ? FlowField::zeros(data.width, data.height, data.samples)
                                    : prolong(flow, data.width, data.height);
      LevelResult lr = solve_level(data, init, config);
      lr.log.level = k;
      lr.log.window = window_index;
      result.log.push_back(lr.log);
      flow = std::move(lr.flow);
    }
    for (FlowFrame& f : flow.frames) result.flow.frames.push_back(std::move(f));
  }
  return result;
}

SolveResult two_frame_baseline(const ComplementedSequence& sequence, SolverConfig config) {
  config.temporal_window = 2;
  return solve_sequence(sequence, config);
}

}  // namespace salflow
