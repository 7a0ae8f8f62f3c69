#include "hybridzoom/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hz {

namespace {

struct Vec2 {
  double u = 0.0;
  double v = 0.0;
  bool operator==(const Vec2&) const = default;
};

double dist2(const Vec2& a, const Vec2& b) {
  const double du = a.u - b.u, dv = a.v - b.v;
  return du * du + dv * dv;
}

int nearest(const std::vector<Vec2>& centroids, const Vec2& p) {
  int best = 0;
  double bd = dist2(centroids[0], p);
  for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
    const double d = dist2(centroids[c], p);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  return best;
}

// Edge-clamped bilinear lookup in double, so the round trip error is not
// dominated by float rounding of the sample position.
double bilinear_at(const std::vector<float>& plane, int w, int h, double x,
                   double y) {
  x = std::clamp(x, 0.0, w - 1.0);
  y = std::clamp(y, 0.0, h - 1.0);
  const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  auto at = [&](int xx, int yy) {
    return static_cast<double>(plane[static_cast<std::size_t>(yy) * w + xx]);
  };
  const double top = at(x0, y0) + fx * (at(x1, y0) - at(x0, y0));
  const double bot = at(x0, y1) + fx * (at(x1, y1) - at(x0, y1));
  return top + fy * (bot - top);
}

}  // namespace

std::pair<Mask, FocusEstimate> defocus_map(const FlowField& fwd,
                                           const Rect& focus_roi,
                                           const DefocusParams& p) {
  require(p.gamma >= 0.0 && p.sigma_f > 0.0 && p.k_clusters >= 1 &&
              p.kmeans_iters >= 0,
          ErrorKind::InvalidInput, "invalid defocus parameters");
  Mask mask(fwd.width, fwd.height, 0.0f);
  FocusEstimate est;
  if (focus_roi.empty()) {
    est.degenerate = true;
    return {std::move(mask), est};
  }
  require(focus_roi.inside(fwd.width, fwd.height), ErrorKind::InvalidInput,
          "focus ROI outside the flow field");

  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(focus_roi.width) * focus_roi.height);
  for (int y = focus_roi.y; y < focus_roi.y + focus_roi.height; ++y)
    for (int x = focus_roi.x; x < focus_roi.x + focus_roi.width; ++x) {
      const std::size_t i = fwd.index(x, y);
      pts.push_back({fwd.u[i], fwd.v[i]});
    }
  const int n = static_cast<int>(pts.size());
  const int k = std::min(p.k_clusters, n);

  // Seed at evenly spaced quantiles of flow magnitude.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::hypot(pts[a].u, pts[a].v) < std::hypot(pts[b].u, pts[b].v);
  });
  std::vector<Vec2> centroids(k);
  for (int c = 0; c < k; ++c)
    centroids[c] = pts[order[static_cast<int>((c + 0.5) * n / k)]];

  // Quantile seeding can coincide (e.g. equal magnitudes); re-seed duplicates.
  std::mt19937_64 rng(p.seed);
  for (int c = 1; c < k; ++c) {
    for (int attempt = 0; attempt < 16; ++attempt) {
      if (std::find(centroids.begin(), centroids.begin() + c, centroids[c]) ==
          centroids.begin() + c)
        break;
      centroids[c] = pts[rng() % static_cast<std::uint64_t>(n)];
    }
  }

  std::vector<int> label(n, 0);
  auto assign = [&] {
    for (int i = 0; i < n; ++i) label[i] = nearest(centroids, pts[i]);
  };
  for (int it = 0; it < p.kmeans_iters; ++it) {
    assign();
    std::vector<Vec2> sum(k);
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) {
      sum[label[i]].u += pts[i].u;
      sum[label[i]].v += pts[i].v;
      ++count[label[i]];
    }
    for (int c = 0; c < k; ++c)
      if (count[c] > 0) centroids[c] = {sum[c].u / count[c], sum[c].v / count[c]};
  }
  assign();

  est.cluster_sizes.assign(k, 0);
  for (int i = 0; i < n; ++i) ++est.cluster_sizes[label[i]];
  est.chosen_cluster = static_cast<int>(
      std::max_element(est.cluster_sizes.begin(), est.cluster_sizes.end()) -
      est.cluster_sizes.begin());
  const Vec2 focus = centroids[est.chosen_cluster];
  est.focus_flow_u = static_cast<float>(focus.u);
  est.focus_flow_v = static_cast<float>(focus.v);

  const auto count = static_cast<std::ptrdiff_t>(mask.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const double d = std::hypot(fwd.u[i] - focus.u, fwd.v[i] - focus.v);
    mask.data()[i] =
        static_cast<float>(1.0 / (1.0 + std::exp(-(d - p.gamma) / p.sigma_f)));
  }
  return {std::move(mask), est};
}

Mask occlusion_map(const FlowField& fwd, const FlowField& bwd,
                   const OcclusionParams& p) {
  require(fwd.same_size(bwd), ErrorKind::DimensionMismatch,
          "occlusion_map: flow sizes differ");
  require(p.s > 0.0, ErrorKind::InvalidInput, "occlusion scale must be > 0");
  const int w = fwd.width, h = fwd.height;
  Mask m(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = fwd.index(x, y);
      const double yx = x + static_cast<double>(fwd.u[i]);
      const double yy = y + static_cast<double>(fwd.v[i]);
      const double rx = yx + bilinear_at(bwd.u, w, h, yx, yy);
      const double ry = yy + bilinear_at(bwd.v, w, h, yx, yy);
      const double err = std::hypot(rx - x, ry - y);
      m.data()[i] = static_cast<float>(std::min(p.s * err, 1.0));
    }
  return m;
}

Mask flow_uncertainty_map(const FlowField& flow, const UncertaintyParams& p) {
  require(p.s_max > 0.0, ErrorKind::InvalidInput, "s_max must be > 0");
  require(flow.logvar_x.size() == flow.u.size() &&
              flow.logvar_y.size() == flow.u.size(),
          ErrorKind::InvalidInput, "flow logvar planes not populated");
  Mask m(flow.width, flow.height);
  const auto n = static_cast<std::ptrdiff_t>(m.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double s =
        std::sqrt(std::exp(static_cast<double>(flow.logvar_x[i])) +
                  std::exp(static_cast<double>(flow.logvar_y[i])));
    m.data()[i] = static_cast<float>(std::min(s, p.s_max) / p.s_max);
  }
  return m;
}

namespace {

int patch_origin(int cell, int stride, int patch, int extent) {
  const int origin = cell * stride + stride / 2 - patch / 2;
  return std::clamp(origin, 0, extent - patch);
}

}  // namespace

Mask rejection_map_prefiltered(const PlanarImage& y_src,
                               const PlanarImage& y_ref,
                               const RejectionParams& p) {
  require(y_src.channels() == 1 && y_ref.channels() == 1,
          ErrorKind::InvalidInput, "rejection_map expects luma planes");
  require(y_src.same_size(y_ref), ErrorKind::DimensionMismatch,
          "rejection_map: image sizes differ");
  require(p.patch > 0 && p.stride > 0 && p.stride <= p.patch && p.epsilon0 > 0,
          ErrorKind::InvalidInput, "invalid rejection parameters");
  const int w = y_src.width(), h = y_src.height();
  const bool global = w < p.patch || h < p.patch;
  const int gw = global ? 1 : (w + p.stride - 1) / p.stride;
  const int gh = global ? 1 : (h + p.stride - 1) / p.stride;
  const int pw = global ? w : p.patch;
  const int ph = global ? h : p.patch;

  Mask grid(gw, gh);
#pragma omp parallel for schedule(static)
  for (int gy = 0; gy < gh; ++gy)
    for (int gx = 0; gx < gw; ++gx) {
      const int x0 = global ? 0 : patch_origin(gx, p.stride, p.patch, w);
      const int y0 = global ? 0 : patch_origin(gy, p.stride, p.patch, h);
      double ss = 0.0, sr = 0.0, sss = 0.0, srr = 0.0, ssr = 0.0;
      for (int y = y0; y < y0 + ph; ++y) {
        const float* a = &y_src.plane(0)[static_cast<std::size_t>(y) * w + x0];
        const float* b = &y_ref.plane(0)[static_cast<std::size_t>(y) * w + x0];
        for (int x = 0; x < pw; ++x) {
          ss += a[x];
          sr += b[x];
          sss += static_cast<double>(a[x]) * a[x];
          srr += static_cast<double>(b[x]) * b[x];
          ssr += static_cast<double>(a[x]) * b[x];
        }
      }
      const double n = static_cast<double>(pw) * ph;
      const double ms = ss / n, mr = sr / n;
      const double var_s = std::max(sss / n - ms * ms, 0.0);
      // mean(((a - ma) - (b - mb))^2) = mean((a - b)^2) - (ma - mb)^2,
      // exactly zero for identical patches.
      const double dm = ms - mr;
      const double diff = std::max((sss + srr - 2.0 * ssr) / n - dm * dm, 0.0);
      grid.at(gx, gy) =
          static_cast<float>(1.0 - std::exp(-diff / (var_s + p.epsilon0)));
    }
  return grid;
}

Mask rejection_map(const PlanarImage& y_src, const PlanarImage& y_ref_warped,
                   double focal_ratio, const RejectionParams& p) {
  require(y_src.same_size(y_ref_warped), ErrorKind::DimensionMismatch,
          "rejection_map: image sizes differ");
  return rejection_map_prefiltered(y_src, downup(y_ref_warped, focal_ratio), p);
}

}  // namespace hz
