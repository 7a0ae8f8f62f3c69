#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "hybridzoom/coarse_align.hpp"
#include "hybridzoom/image.hpp"

namespace hz {

struct FlowParams {
  // Working resolution of the solver; orientation is swapped to follow the
  // image aspect. Never larger than the input.
  int flow_width = 384;
  int flow_height = 512;
  int pyramid_levels = 5;
  double scale_factor = 0.5;
  int iterations_per_level = 30;
  double smoothness_weight = 0.1;
  double max_displacement = 64.0;
};

/// Flow grid size for an image of the given size: the long side is fitted to
/// the longer configured dimension, aspect preserved, clamped to the image.
std::pair<int, int> flow_resolution(int image_w, int image_h,
                                    const FlowParams& params);

/// Coarse-to-fine variational flow from src to ref (single-channel inputs at
/// flow resolution). Data term is the linearized brightness constancy of the
/// warped reference, integrated over a small Gaussian window and normalized
/// by local gradient energy; smoothness is quadratic. Increments are solved
/// with Jacobi sweeps, with re-warping and a 5x5 median filter every 10
/// sweeps. `init` seeds the coarsest level (e.g. a global translation).
/// The logvar planes are filled by estimate_uncertainty.
FlowField estimate_flow(const PlanarImage& src, const PlanarImage& ref,
                        const FlowParams& params, Translation2D init = {});

struct LogVariance {
  std::vector<float> x;
  std::vector<float> y;
};

/// Residual-based per-pixel log-variance of a flow estimate, in px^2:
///   logvar_a = ln( mean7x7(r^2) / (mean7x7(d_a ref_w^2) + eps) + eps )
/// with r = src - warp(ref, flow), eps = 1e-6, clamped to [ln 1e-4, ln 1e4].
LogVariance estimate_uncertainty(const PlanarImage& src,
                                 const PlanarImage& ref,
                                 const FlowField& flow);

inline constexpr float kLogVarMin = -9.210340372f;  // ln 1e-4
inline constexpr float kLogVarMax = 9.210340372f;   // ln 1e4

/// Forward (src->ref) and backward (ref->src) flows with identical params.
std::pair<FlowField, FlowField> estimate_flow_pair(const PlanarImage& src,
                                                   const PlanarImage& ref,
                                                   const FlowParams& params,
                                                   Translation2D init = {});

// Middlebury .flo: "PIEH" float tag 202021.25, int32 width, int32 height,
// then interleaved little-endian float32 (u,v) in row-major order. The logvar
// sidecar uses the same header with interleaved (logvar_x, logvar_y).
inline constexpr float kFloTag = 202021.25f;

void write_flo(const std::filesystem::path& path, const FlowField& flow);
void write_logvar(const std::filesystem::path& path, const FlowField& flow);
/// Reads u,v; logvar planes are zero.
FlowField read_flo(const std::filesystem::path& path);
/// Reads a sidecar into the logvar planes of an existing field of equal size.
void read_logvar(const std::filesystem::path& path, FlowField& flow);

}  // namespace hz
