#include "hybridzoom/blend.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hz {

Mask upsample_mask(const Mask& m, int w, int h) {
  if (m.width() == w && m.height() == h) return m;
  return Mask::from_image(
      resample(m.to_image(), w, h, Kernel::Bilinear, /*antialias=*/true));
}

Mask blend_mask(const BlendStack& stack, int out_w, int out_h) {
  Mask out(out_w, out_h, 1.0f);
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  for (const Mask* m : {&stack.occlusion, &stack.defocus,
                        &stack.flow_uncertainty, &stack.rejection}) {
    Mask up;
    const bool native = m->width() == out_w && m->height() == out_h;
    if (!native) up = upsample_mask(*m, out_w, out_h);
    const float* src = native ? m->data().data() : up.data().data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out.data()[i] -= src[i];
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out.data()[i] = std::max(out.data()[i], 0.0f);
  return out;
}

namespace {
double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
}  // namespace

double feather_profile(double d, double sigma) {
  if (sigma <= 0.0) return 1.0;
  if (d <= 0.0) return 0.0;
  if (d >= 3.0 * sigma) return 1.0;
  const double lo = phi(-3.0), hi = phi(3.0);
  return (phi(2.0 * d / sigma - 3.0) - lo) / (hi - lo);
}

double default_boundary_sigma(int crop_w, int crop_h) {
  return 0.01 * std::min(crop_w, crop_h);
}

Mask smooth_boundary(const Mask& mask, const Rect& rect, double sigma) {
  require(sigma >= 0.0, ErrorKind::InvalidInput, "sigma must be >= 0");
  if (sigma == 0.0) return mask;
  const int w = mask.width(), h = mask.height();
  auto axis_ramp = [&](int extent, int start, int len) {
    std::vector<float> r(extent, 0.0f);
    for (int i = 0; i < extent; ++i) {
      if (i < start || i >= start + len) continue;
      const int d = std::min(i - start, start + len - 1 - i);
      r[i] = static_cast<float>(feather_profile(d, sigma));
    }
    return r;
  };
  const auto rx = axis_ramp(w, rect.x, rect.width);
  const auto ry = axis_ramp(h, rect.y, rect.height);
  Mask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = mask.at(x, y) * rx[x] * ry[y];
  return out;
}

PlanarImage alpha_blend(const PlanarImage& fusion, const PlanarImage& src,
                        const Mask& m) {
  require(fusion.same_size(src) && fusion.channels() == src.channels() &&
              m.width() == src.width() && m.height() == src.height(),
          ErrorKind::DimensionMismatch, "alpha_blend: size mismatch");
  PlanarImage out(src.width(), src.height(), src.channels());
  const auto n = static_cast<std::ptrdiff_t>(src.plane_size());
  for (int c = 0; c < src.channels(); ++c) {
    auto f = fusion.plane(c), s = src.plane(c);
    auto o = out.plane(c);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const float a = m.data()[i];
      o[i] = a * f[i] + (1.0f - a) * s[i];
    }
  }
  return out;
}

PlanarImage uncrop(const PlanarImage& blended, const PlanarImage& src,
                   const PlanarImage& full_w, const CameraMeta& meta) {
  require(blended.same_size(src) && blended.channels() == src.channels() &&
              full_w.channels() == src.channels(),
          ErrorKind::DimensionMismatch, "uncrop: size mismatch");
  const Rect& r = meta.tele_fov_rect;
  require(r.inside(full_w.width(), full_w.height()), ErrorKind::Metadata,
          "tele_fov_rect outside the wide image");

  PlanarImage delta(src.width(), src.height(), src.channels());
  for (std::size_t i = 0; i < delta.data().size(); ++i)
    delta.data()[i] = blended.data()[i] - src.data()[i];
  const PlanarImage down = resample(delta, r.width, r.height, Kernel::Bicubic);

  PlanarImage out = full_w;
  for (int c = 0; c < out.channels(); ++c)
    for (int y = 0; y < r.height; ++y)
      for (int x = 0; x < r.width; ++x) {
        float& px = out.at(r.x + x, r.y + y, c);
        px = std::clamp(px + down.at(x, y, c), 0.0f, 1.0f);
      }
  return out;
}

PlanarImage alpha_blend_uncrop(const PlanarImage& fusion,
                               const PlanarImage& src, const Mask& m_blend,
                               const PlanarImage& full_w,
                               const CameraMeta& meta) {
  return uncrop(alpha_blend(fusion, src, m_blend), src, full_w, meta);
}

}  // namespace hz
