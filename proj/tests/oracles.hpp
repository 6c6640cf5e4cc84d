#pragma once

// Brute-force references written independently of the library: plain nested
// loops over flat arrays, no shared helpers.

#include "salflow/solver.hpp"
#include "salflow/types.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

// Volume [t][y][x] of doubles.
struct Volume {
  int w = 0, h = 0, n = 0;
  std::vector<double> v;
  Volume() = default;
  Volume(int w_, int h_, int n_) : w(w_), h(h_), n(n_), v(static_cast<std::size_t>(w_ * h_ * n_)) {}
  double& at(int x, int y, int t) { return v[static_cast<std::size_t>((t * h + y) * w + x)]; }
  double at(int x, int y, int t) const { return v[static_cast<std::size_t>((t * h + y) * w + x)]; }
};

inline Volume from_planes(const std::vector<salflow::Plane>& p) {
  Volume out(p[0].width(), p[0].height(), static_cast<int>(p.size()));
  for (int t = 0; t < out.n; ++t)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x) out.at(x, y, t) = p[static_cast<std::size_t>(t)](x, y);
  return out;
}

// Central difference, one-sided at the borders, of samples a[0..n-1] at i.
inline double d1(const std::vector<double>& a, int i) {
  const int n = static_cast<int>(a.size());
  if (n < 2) return 0.0;
  if (i == 0) return a[1] - a[0];
  if (i == n - 1) return a[static_cast<std::size_t>(n - 1)] - a[static_cast<std::size_t>(n - 2)];
  return 0.5 * (a[static_cast<std::size_t>(i + 1)] - a[static_cast<std::size_t>(i - 1)]);
}

inline double dx(const Volume& u, int x, int y, int t) {
  std::vector<double> row(static_cast<std::size_t>(u.w));
  for (int i = 0; i < u.w; ++i) row[static_cast<std::size_t>(i)] = u.at(i, y, t);
  return d1(row, x);
}
inline double dy(const Volume& u, int x, int y, int t) {
  std::vector<double> col(static_cast<std::size_t>(u.h));
  for (int i = 0; i < u.h; ++i) col[static_cast<std::size_t>(i)] = u.at(x, i, t);
  return d1(col, y);
}
inline double dt(const Volume& u, int x, int y, int t) {
  std::vector<double> line(static_cast<std::size_t>(u.n));
  for (int i = 0; i < u.n; ++i) line[static_cast<std::size_t>(i)] = u.at(x, y, i);
  return d1(line, t);
}

inline double psi(double s, double eps) { return std::sqrt(s + eps * eps); }
inline double psi_prime(double s, double eps) { return 1.0 / (2.0 * std::sqrt(s + eps * eps)); }

// Face diffusivities, indexed by the lower cell of the face.
struct Faces {
  Volume x, y, t;
};

// Arithmetic mean of cell-centred Psi'(|grad3 u1|^2 + |grad3 u2|^2).
inline Faces average_faces(const Volume& u1, const Volume& u2, double lambda, double eps) {
  Volume g(u1.w, u1.h, u1.n);
  for (int t = 0; t < u1.n; ++t)
    for (int y = 0; y < u1.h; ++y)
      for (int x = 0; x < u1.w; ++x) {
        double s = 0.0;
        for (const Volume* u : {&u1, &u2}) {
          const double a = dx(*u, x, y, t), b = dy(*u, x, y, t), c = lambda * dt(*u, x, y, t);
          s += a * a + b * b + c * c;
        }
        g.at(x, y, t) = psi_prime(s, eps);
      }
  Faces f{Volume(u1.w, u1.h, u1.n), Volume(u1.w, u1.h, u1.n), Volume(u1.w, u1.h, u1.n)};
  for (int t = 0; t < u1.n; ++t)
    for (int y = 0; y < u1.h; ++y)
      for (int x = 0; x < u1.w; ++x) {
        if (x + 1 < u1.w) f.x.at(x, y, t) = (g.at(x, y, t) + g.at(x + 1, y, t)) / 2.0;
        if (y + 1 < u1.h) f.y.at(x, y, t) = (g.at(x, y, t) + g.at(x, y + 1, t)) / 2.0;
        if (t + 1 < u1.n) f.t.at(x, y, t) = lambda * lambda * (g.at(x, y, t) + g.at(x, y, t + 1)) / 2.0;
      }
  return f;
}

// Psi' of the gradient on the face: normal part from the two cells, the other
// two components averaged over the two cells' central differences.
inline Faces face_faces(const Volume& u1, const Volume& u2, double lambda, double eps) {
  Faces f{Volume(u1.w, u1.h, u1.n), Volume(u1.w, u1.h, u1.n), Volume(u1.w, u1.h, u1.n)};
  for (int t = 0; t < u1.n; ++t)
    for (int y = 0; y < u1.h; ++y)
      for (int x = 0; x < u1.w; ++x) {
        if (x + 1 < u1.w) {
          double s = 0.0;
          for (const Volume* u : {&u1, &u2}) {
            const double nrm = u->at(x + 1, y, t) - u->at(x, y, t);
            const double ty = (dy(*u, x, y, t) + dy(*u, x + 1, y, t)) / 2.0;
            const double tt = lambda * (dt(*u, x, y, t) + dt(*u, x + 1, y, t)) / 2.0;
            s += nrm * nrm + ty * ty + tt * tt;
          }
          f.x.at(x, y, t) = psi_prime(s, eps);
        }
        if (y + 1 < u1.h) {
          double s = 0.0;
          for (const Volume* u : {&u1, &u2}) {
            const double nrm = u->at(x, y + 1, t) - u->at(x, y, t);
            const double tx = (dx(*u, x, y, t) + dx(*u, x, y + 1, t)) / 2.0;
            const double tt = lambda * (dt(*u, x, y, t) + dt(*u, x, y + 1, t)) / 2.0;
            s += nrm * nrm + tx * tx + tt * tt;
          }
          f.y.at(x, y, t) = psi_prime(s, eps);
        }
        if (t + 1 < u1.n) {
          double s = 0.0;
          for (const Volume* u : {&u1, &u2}) {
            const double nrm = lambda * (u->at(x, y, t + 1) - u->at(x, y, t));
            const double tx = (dx(*u, x, y, t) + dx(*u, x, y, t + 1)) / 2.0;
            const double ty = (dy(*u, x, y, t) + dy(*u, x, y, t + 1)) / 2.0;
            s += nrm * nrm + tx * tx + ty * ty;
          }
          f.t.at(x, y, t) = lambda * lambda * psi_prime(s, eps);
        }
      }
  return f;
}

// Sum over existing neighbours of face * (u_n - u_c).
inline double divergence(const Faces& f, const Volume& u, int x, int y, int t) {
  double d = 0.0;
  const double c = u.at(x, y, t);
  if (x > 0) d += f.x.at(x - 1, y, t) * (u.at(x - 1, y, t) - c);
  if (x + 1 < u.w) d += f.x.at(x, y, t) * (u.at(x + 1, y, t) - c);
  if (y > 0) d += f.y.at(x, y - 1, t) * (u.at(x, y - 1, t) - c);
  if (y + 1 < u.h) d += f.y.at(x, y, t) * (u.at(x, y + 1, t) - c);
  if (t > 0) d += f.t.at(x, y, t - 1) * (u.at(x, y, t - 1) - c);
  if (t + 1 < u.n) d += f.t.at(x, y, t) * (u.at(x, y, t + 1) - c);
  return d;
}

inline std::vector<salflow::Plane> component(const salflow::FlowField& f, int c) {
  std::vector<salflow::Plane> out;
  for (const salflow::FlowFrame& fr : f.frames) out.push_back(c == 0 ? fr.u1 : fr.u2);
  return out;
}

// Per-sample data of the optical-flow system, straight from the definitions.
struct LevelData {
  Volume a11, a12, a22, b1, b2;
};

inline LevelData level_data(const salflow::ComplementedSequence& s, double xi, double k) {
  const int w = s.width(), h = s.height(), n = s.frame_count() - 1, sig = s.channel_count();
  const bool sal = salflow::has_saliency(s.layout());
  LevelData d{Volume(w, h, n), Volume(w, h, n), Volume(w, h, n), Volume(w, h, n),
              Volume(w, h, n)};
  for (int i = 0; i < sig; ++i) {
    std::vector<salflow::Plane> ch;
    for (const salflow::Frame& f : s.frames()) ch.push_back(f.channels[static_cast<std::size_t>(i)]);
    const Volume f = from_planes(ch);
    for (int t = 0; t < n; ++t)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double fx = k * dx(f, x, y, t), fy = k * dy(f, x, y, t);
          const double ft = t == 0 ? k * (f.at(x, y, 1) - f.at(x, y, 0))
                                   : k * (f.at(x, y, t + 1) - f.at(x, y, t - 1)) / 2.0;
          double b = 1.0;
          if (!(sal && i == sig - 1)) {
            const double num = sal ? s.frame(t).channels.back()(x, y) : 1.0;
            b = num / std::sqrt(fx * fx + fy * fy + k * k * xi * xi);
          }
          d.a11.at(x, y, t) += b * fx * fx;
          d.a12.at(x, y, t) += b * fx * fy;
          d.a22.at(x, y, t) += b * fy * fy;
          d.b1.at(x, y, t) += b * fx * ft;
          d.b2.at(x, y, t) += b * fy * ft;
        }
  }
  return d;
}

// One update: data term implicit in the updated component, lagged diffusion.
inline salflow::FlowField sweep(const LevelData& d, const salflow::FlowField& flow,
                                const salflow::SolverConfig& c) {
  const Volume u1 = from_planes(component(flow, 0)), u2 = from_planes(component(flow, 1));
  const Faces f = c.faces == salflow::FaceDiffusivity::kFace
                      ? face_faces(u1, u2, c.lambda, c.epsilon)
                      : average_faces(u1, u2, c.lambda, c.epsilon);
  salflow::FlowField out = salflow::FlowField::zeros(u1.w, u1.h, u1.n);
  for (int t = 0; t < u1.n; ++t)
    for (int y = 0; y < u1.h; ++y)
      for (int x = 0; x < u1.w; ++x) {
        const double v1 = u1.at(x, y, t), v2 = u2.at(x, y, t);
        const double div1 = divergence(f, u1, x, y, t);
        const double div2 = divergence(f, u2, x, y, t);
        double n1, n2;
        if (c.scheme == salflow::DiffusionScheme::kExplicit) {
          n1 = (v1 + c.tau * (c.alpha * div1 - d.a12.at(x, y, t) * v2 - d.b1.at(x, y, t))) /
               (1.0 + c.tau * d.a11.at(x, y, t));
          n2 = (v2 + c.tau * (c.alpha * div2 - d.a12.at(x, y, t) * v1 - d.b2.at(x, y, t))) /
               (1.0 + c.tau * d.a22.at(x, y, t));
        } else {
          // div = N - S u_c; take the S u_c part at the new iterate.
          double s = 0.0;
          if (x > 0) s += f.x.at(x - 1, y, t);
          if (x + 1 < u1.w) s += f.x.at(x, y, t);
          if (y > 0) s += f.y.at(x, y - 1, t);
          if (y + 1 < u1.h) s += f.y.at(x, y, t);
          if (t > 0) s += f.t.at(x, y, t - 1);
          if (t + 1 < u1.n) s += f.t.at(x, y, t);
          n1 = (v1 + c.tau * (c.alpha * (div1 + s * v1) - d.a12.at(x, y, t) * v2 - d.b1.at(x, y, t))) /
               (1.0 + c.tau * d.a11.at(x, y, t) + c.tau * c.alpha * s);
          n2 = (v2 + c.tau * (c.alpha * (div2 + s * v2) - d.a12.at(x, y, t) * v1 - d.b2.at(x, y, t))) /
               (1.0 + c.tau * d.a22.at(x, y, t) + c.tau * c.alpha * s);
        }
        out.frames[static_cast<std::size_t>(t)].u1(x, y) = n1;
        out.frames[static_cast<std::size_t>(t)].u2(x, y) = n2;
      }
  return out;
}

inline salflow::Plane random_plane(int w, int h, std::mt19937_64& rng, double lo = 0.0,
                                   double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  salflow::Plane p(w, h);
  for (double& v : p.values()) v = u(rng);
  return p;
}

}  // namespace oracle
