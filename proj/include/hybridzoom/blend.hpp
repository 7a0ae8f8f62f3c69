#pragma once

#include "hybridzoom/coarse_align.hpp"
#include "hybridzoom/image.hpp"

namespace hz {

/// The four exclusion masks, each at its native resolution.
struct BlendStack {
  Mask occlusion;
  Mask defocus;
  Mask flow_uncertainty;
  Mask rejection;
  double boundary_sigma = 0.0;
};

/// Bilinear upsample of a mask to (w, h); identity when sizes match.
Mask upsample_mask(const Mask& m, int w, int h);

/// Each mask is upsampled to (out_w, out_h) first, then
///   M_blend = max(1 - occ - defocus - flow - reject, 0).
Mask blend_mask(const BlendStack& stack, int out_w, int out_h);

/// Feather ramp on the rectangle boundary (mask coordinates). For a pixel at
/// integer distance d from the nearest rect edge pixel along an axis,
///   f(d) = (Phi(2d/sigma - 3) - Phi(-3)) / (Phi(3) - Phi(-3)),  d in [0, 3 sigma]
/// and 1 beyond; the mask is multiplied by f(dx) * f(dy), 0 outside the rect.
/// sigma == 0 leaves the mask unchanged.
Mask smooth_boundary(const Mask& mask, const Rect& rect, double sigma);

/// Feather value for one axis distance (exposed for tests).
double feather_profile(double distance, double sigma);

/// Default boundary sigma: 1% of the short side of the crop.
double default_boundary_sigma(int crop_w, int crop_h);

/// Per-pixel convex blend m * fusion + (1 - m) * src.
PlanarImage alpha_blend(const PlanarImage& fusion, const PlanarImage& src,
                        const Mask& m_blend);

/// Writes a crop-resolution result back into the wide frame. The change
/// relative to src (blended - src) is bicubic-resampled onto tele_fov_rect
/// and added to the original wide pixels; everything outside the rectangle
/// is copied bit for bit.
PlanarImage uncrop(const PlanarImage& blended, const PlanarImage& src,
                   const PlanarImage& full_w, const CameraMeta& meta);

/// alpha_blend followed by uncrop.
PlanarImage alpha_blend_uncrop(const PlanarImage& fusion,
                               const PlanarImage& src, const Mask& m_blend,
                               const PlanarImage& full_w,
                               const CameraMeta& meta);

}  // namespace hz
