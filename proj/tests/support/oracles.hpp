#pragma once

// Straightforward per-pixel reference versions of the mask formulas, written
// in double without any of the library's helpers, used as test oracles.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hybridzoom/image.hpp"

namespace oracle {

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

struct Focus {
  double u = 0.0;
  double v = 0.0;
  std::vector<int> sizes;
};

// Lloyd k-means on the ROI flow vectors, seeded at the (c + 1/2) / k
// magnitude quantiles, ties resolved toward the lower cluster index.
inline Focus kmeans_focus(const hz::FlowField& f, const hz::Rect& roi, int k,
                          int iters) {
  std::vector<double> us, vs;
  for (int y = roi.y; y < roi.y + roi.height; ++y)
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      us.push_back(f.u[y * f.width + x]);
      vs.push_back(f.v[y * f.width + x]);
    }
  const int n = static_cast<int>(us.size());
  k = std::min(k, n);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::sqrt(us[a] * us[a] + vs[a] * vs[a]) <
           std::sqrt(us[b] * us[b] + vs[b] * vs[b]);
  });
  std::vector<double> cu(k), cv(k);
  for (int c = 0; c < k; ++c) {
    const int q = idx[static_cast<int>((c + 0.5) * n / k)];
    cu[c] = us[q];
    cv[c] = vs[q];
  }
  std::vector<int> lab(n);
  auto assign = [&] {
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = 1e300;
      for (int c = 0; c < k; ++c) {
        const double d = (us[i] - cu[c]) * (us[i] - cu[c]) +
                         (vs[i] - cv[c]) * (vs[i] - cv[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      lab[i] = best;
    }
  };
  for (int it = 0; it < iters; ++it) {
    assign();
    for (int c = 0; c < k; ++c) {
      double su = 0, sv = 0;
      int cnt = 0;
      for (int i = 0; i < n; ++i)
        if (lab[i] == c) {
          su += us[i];
          sv += vs[i];
          ++cnt;
        }
      if (cnt) {
        cu[c] = su / cnt;
        cv[c] = sv / cnt;
      }
    }
  }
  assign();
  Focus out;
  out.sizes.assign(k, 0);
  for (int i = 0; i < n; ++i) ++out.sizes[lab[i]];
  int best = 0;
  for (int c = 1; c < k; ++c)
    if (out.sizes[c] > out.sizes[best]) best = c;
  out.u = cu[best];
  out.v = cv[best];
  return out;
}

inline std::vector<double> defocus(const hz::FlowField& f, const hz::Rect& roi,
                                   double gamma, double sigma_f, int k,
                                   int iters) {
  std::vector<double> m(f.u.size(), 0.0);
  if (roi.empty()) return m;
  const Focus focus = kmeans_focus(f, roi, k, iters);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double du = f.u[i] - focus.u, dv = f.v[i] - focus.v;
    m[i] = sigmoid((std::sqrt(du * du + dv * dv) - gamma) / sigma_f);
  }
  return m;
}

inline double bilinear(const std::vector<float>& p, int w, int h, double x,
                       double y) {
  x = std::min(std::max(x, 0.0), w - 1.0);
  y = std::min(std::max(y, 0.0), h - 1.0);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double ax = x - x0, ay = y - y0;
  return (1 - ax) * (1 - ay) * p[y0 * w + x0] + ax * (1 - ay) * p[y0 * w + x1] +
         (1 - ax) * ay * p[y1 * w + x0] + ax * ay * p[y1 * w + x1];
}

inline std::vector<double> occlusion(const hz::FlowField& fwd,
                                     const hz::FlowField& bwd, double s) {
  const int w = fwd.width, h = fwd.height;
  std::vector<double> m(fwd.u.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      const double px = x + static_cast<double>(fwd.u[i]);
      const double py = y + static_cast<double>(fwd.v[i]);
      const double rx = px + bilinear(bwd.u, w, h, px, py);
      const double ry = py + bilinear(bwd.v, w, h, px, py);
      const double e = std::sqrt((rx - x) * (rx - x) + (ry - y) * (ry - y));
      m[i] = std::min(s * e, 1.0);
    }
  return m;
}

inline std::vector<double> flow_uncertainty(const hz::FlowField& f,
                                            double s_max) {
  std::vector<double> m(f.u.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double s = std::sqrt(std::exp(static_cast<double>(f.logvar_x[i])) +
                               std::exp(static_cast<double>(f.logvar_y[i])));
    m[i] = std::min(s, s_max) / s_max;
  }
  return m;
}

// Patch grid of ceil(H/stride) x ceil(W/stride); each patch is centered on
// its stride cell and shifted inward at the borders.
struct RejectionGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

inline RejectionGrid rejection(const hz::PlanarImage& src,
                               const hz::PlanarImage& ref_lowpassed, int patch,
                               int stride, double eps0) {
  const int w = src.width(), h = src.height();
  RejectionGrid g;
  const bool whole = w < patch || h < patch;
  g.width = whole ? 1 : (w + stride - 1) / stride;
  g.height = whole ? 1 : (h + stride - 1) / stride;
  const int pw = whole ? w : patch, ph = whole ? h : patch;
  for (int gy = 0; gy < g.height; ++gy)
    for (int gx = 0; gx < g.width; ++gx) {
      int x0 = 0, y0 = 0;
      if (!whole) {
        x0 = std::min(std::max(gx * stride + stride / 2 - patch / 2, 0), w - patch);
        y0 = std::min(std::max(gy * stride + stride / 2 - patch / 2, 0), h - patch);
      }
      const double n = static_cast<double>(pw) * ph;
      double ms = 0, mr = 0;
      for (int y = y0; y < y0 + ph; ++y)
        for (int x = x0; x < x0 + pw; ++x) {
          ms += src.at(x, y);
          mr += ref_lowpassed.at(x, y);
        }
      ms /= n;
      mr /= n;
      double var = 0, d2 = 0;
      for (int y = y0; y < y0 + ph; ++y)
        for (int x = x0; x < x0 + pw; ++x) {
          const double a = src.at(x, y) - ms;
          const double b = ref_lowpassed.at(x, y) - mr;
          var += a * a;
          d2 += (a - b) * (a - b);
        }
      var /= n;
      d2 /= n;
      g.values.push_back(1.0 - std::exp(-d2 / (var + eps0)));
    }
  return g;
}

inline double blend(double occ, double defocus, double flow, double reject) {
  return std::max(1.0 - occ - defocus - flow - reject, 0.0);
}

}  // namespace oracle
