#pragma once

#include <vector>

#include "hybridzoom/image.hpp"

namespace hz {

/// Camera metadata for a W/T pair.
struct CameraMeta {
  double focal_ratio = 4.0;  // T focal length / W focal length
  Rect tele_fov_rect;        // T footprint in W pixels
  Rect focus_roi;            // autofocus ROI in T pixels
};

/// Throws Metadata errors for a ratio <= 1 or rectangles outside their frames.
void validate_meta(const CameraMeta& meta, int wide_w, int wide_h, int tele_w,
                   int tele_h);

/// Centered rectangle covering 1/focal_ratio of each W dimension.
Rect centered_fov_rect(int wide_w, int wide_h, double focal_ratio);

/// Global offset such that ref(x + t) ~ src(x).
struct Translation2D {
  double dx = 0.0;
  double dy = 0.0;
};

struct TranslationParams {
  double fast_threshold = 0.06;
  int patch_size = 11;       // odd, NCC window
  double search_radius = 200.0;
  int min_matches = 8;
  double min_ncc = 0.7;
  int max_keypoints = 1500;
};

struct TranslationEstimate {
  Translation2D translation;
  int matches = 0;
  bool low_confidence = false;
};

struct Keypoint {
  int x = 0;
  int y = 0;
  float score = 0.0f;
};

/// FAST-9 segment test on a 16-pixel Bresenham ring of radius 3 with 3x3
/// non-maximum suppression. `border` pixels on each side are skipped.
std::vector<Keypoint> detect_fast(const PlanarImage& luma, double threshold,
                                  int border);

/// Crop W to the T field of view and bicubic-resample it to T's size.
/// Output is clamped to [0,1].
PlanarImage crop_and_resample_source(const PlanarImage& w_img,
                                     const CameraMeta& meta, int target_w,
                                     int target_h);

/// Sparse global translation: FAST keypoints on both images, mutual-best NCC
/// matching inside the search radius, sub-pixel peak refinement, then the
/// per-axis median of match displacements. Fewer than min_matches surviving
/// matches yields (0,0) flagged low-confidence.
TranslationEstimate estimate_translation(const PlanarImage& src,
                                         const PlanarImage& ref,
                                         const TranslationParams& params = {});

/// Per-channel mean/std transfer of ref onto src's statistics, clamped.
PlanarImage match_color(const PlanarImage& ref, const PlanarImage& src);

}  // namespace hz
