#pragma once

#include <cstdint>
#include <vector>

#include "hybridzoom/image.hpp"

namespace hz {

// Polarity for every mask here: 1 excludes the pixel from fusion.

struct DefocusParams {
  double gamma = 2.0;    // in-focus tolerance, flow pixels
  double sigma_f = 1.0;  // sigmoid softness, flow pixels
  int k_clusters = 3;
  int kmeans_iters = 10;
  std::uint64_t seed = 0;  // only used to re-seed coincident centroids
};

struct FocusEstimate {
  float focus_flow_u = 0.0f;
  float focus_flow_v = 0.0f;
  std::vector<int> cluster_sizes;
  int chosen_cluster = -1;
  bool degenerate = false;  // empty ROI, nothing clustered
};

struct OcclusionParams {
  double s = 0.5;
};

struct UncertaintyParams {
  double s_max = 8.0;
};

struct RejectionParams {
  int patch = 16;
  int stride = 8;
  double epsilon0 = 1e-4;
};

/// Defocus map from flow-as-depth. k-means over the flow vectors inside
/// `focus_roi` (flow-grid coordinates) picks the focal plane as the largest
/// cluster's centroid F_f; then
///   M(x) = sigmoid((|F(x) - F_f| - gamma) / sigma_f).
/// An empty ROI gives an all-zero mask and a degenerate estimate.
std::pair<Mask, FocusEstimate> defocus_map(const FlowField& fwd,
                                           const Rect& focus_roi,
                                           const DefocusParams& p = {});

/// Forward-backward consistency:
///   M(x) = min(s * |y + F_bwd(y) - x|, 1),  y = x + F_fwd(x),
/// with F_bwd sampled bilinearly (edge clamped) at y.
Mask occlusion_map(const FlowField& fwd, const FlowField& bwd,
                   const OcclusionParams& p = {});

/// S = sqrt(exp(logvar_x) + exp(logvar_y)), M = min(S, s_max) / s_max.
Mask flow_uncertainty_map(const FlowField& flow,
                          const UncertaintyParams& p = {});

/// Per-patch alignment rejection on a stride grid of ceil(H/stride) x
/// ceil(W/stride) cells. The warped reference is first passed through
/// downup(., focal_ratio). For each patch (centered on its cell, shifted to
/// stay inside the image):
///   d = (P_src - mean) - (P_ref - mean),
///   M = 1 - exp(-mean(d^2) / (var(P_src) + epsilon0)).
/// Images smaller than one patch are treated as a single global patch.
Mask rejection_map(const PlanarImage& y_src, const PlanarImage& y_ref_warped,
                   double focal_ratio, const RejectionParams& p = {});

/// Rejection on an already low-passed reference (the part after downup).
Mask rejection_map_prefiltered(const PlanarImage& y_src,
                               const PlanarImage& y_ref_lowpassed,
                               const RejectionParams& p);

}  // namespace hz
