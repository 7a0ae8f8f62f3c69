#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hybridzoom/coarse_align.hpp"
#include "hybridzoom/image.hpp"

namespace hz {

// Synthetic dual-camera rig. Scene geometry lives in the "source frame": the
// T-resolution pixel grid of the W crop (what the pipeline calls I_src).
// A layer with disparity d is seen by T at y = p + translation + d for every
// source-frame point p, so the true correspondence is translation + d.

enum class LayerShape { Full, Rect, Ellipse };

struct SceneLayer {
  LayerShape shape = LayerShape::Full;
  // Bounding box in source-frame pixels (ignored for Full).
  double x = 0.0, y = 0.0, width = 0.0, height = 0.0;
  double disparity_x = 0.0;
  double disparity_y = 0.0;
  double defocus_sigma = 0.0;  // blur applied to this layer in T only
  std::array<float, 3> tint = {1.0f, 1.0f, 1.0f};
  double contrast = 1.0;

  bool contains(double px, double py) const;
};

struct RigScene {
  int tele_width = 512;
  int tele_height = 384;
  int wide_width = 256;
  int wide_height = 192;
  double focal_ratio = 4.0;
  std::vector<SceneLayer> layers;  // back to front; layers[0] should be Full
  double noise_sigma = 0.0;
  std::array<double, 3> color_gain = {1.0, 1.0, 1.0};
  Translation2D translation;
  int focus_layer = -1;  // -1: front-most layer
  std::uint64_t seed = 1;
};

struct PairLabels {
  PlanarImage gt_image;    // sharp scene in the source frame, W colors
  FlowField gt_flow;       // per-pixel layer disparity (translation excluded)
  Mask gt_occlusion;       // visible in source, hidden in T or outside its frame
  Mask gt_defocus_region;  // visible layer is defocused in T
};

struct SyntheticPair {
  PlanarImage wide;
  PlanarImage tele;
  CameraMeta meta;
  PairLabels labels;
};

/// Validates a scene; throws InvalidInput naming the offending field.
void validate_scene(const RigScene& scene);

/// Renders W, T, metadata and oracle labels. Deterministic for a fixed seed
/// and independent of thread count (noise is hashed per sample).
SyntheticPair synthesize_pair(const RigScene& scene);

/// Two-layer test scene: a Full background and a centered rectangle in
/// front, both sharp unless bg_defocus_sigma > 0.
RigScene two_layer_scene(double fg_disparity, double bg_disparity,
                         double bg_defocus_sigma = 0.0,
                         std::uint64_t seed = 7);

/// Smooth textured luma in [0,1] (multi-octave value noise), for tests and
/// demos. Period of the finest octave is `finest_period` pixels.
PlanarImage procedural_texture(int width, int height, std::uint64_t seed,
                               double finest_period = 3.0);

/// 10 log10(1 / MSE) over all samples; identical inputs give 99 dB.
double psnr(const PlanarImage& a, const PlanarImage& b);

/// mean |G(y_a, sigma) - G(y_b, sigma)|.
double brightness_consistency(const PlanarImage& y_a, const PlanarImage& y_b,
                              double sigma = 10.0);

}  // namespace hz
