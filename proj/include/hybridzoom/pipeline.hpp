#pragma once

#include <string>

#include "hybridzoom/blend.hpp"
#include "hybridzoom/coarse_align.hpp"
#include "hybridzoom/config.hpp"
#include "hybridzoom/dense_flow.hpp"
#include "hybridzoom/image.hpp"
#include "hybridzoom/masks.hpp"

namespace hz {

/// Wall-clock milliseconds per stage, measured with a monotonic clock.
/// Cropping/resampling W counts toward coarse alignment; the flow
/// uncertainty map is derived from the solver output and counts toward flow.
struct StageTimings {
  double color_matching = 0.0;
  double coarse_alignment = 0.0;
  double optical_flow = 0.0;
  double warping = 0.0;
  double occlusion_map = 0.0;
  double defocus_map = 0.0;
  double rejection_map = 0.0;
  double fusion = 0.0;
  double blending = 0.0;
  double total = 0.0;
};

std::string timings_to_json(const StageTimings& t);

/// Everything the pipeline computed. Images, m_occ and m_blend live at T
/// resolution; flow fields, m_flow and m_defocus at the solver resolution;
/// m_reject on its patch grid. i_ref_warped is only filled on request.
/// When fusion_skipped is set only output, i_src and translation are
/// meaningful.
struct PipelineResult {
  PlanarImage output;       // full W frame
  PlanarImage zoomed;       // blended crop at T resolution
  PlanarImage i_src;        // cropped + resampled W
  PlanarImage i_ref;        // color-matched T
  PlanarImage i_ref_warped;
  FlowField fwd;
  FlowField bwd;
  Mask m_occ;
  Mask m_defocus;
  Mask m_flow;
  Mask m_reject;
  Mask m_blend;
  TranslationEstimate translation;
  FocusEstimate focus;
  double optical_ratio = 1.0;
  bool fusion_skipped = false;
  StageTimings timings;
};

/// Ratio between T sampling and the W crop it covers; ≥ 1 for a real rig.
double sampling_ratio(const CameraMeta& meta, int tele_w, int tele_h);

/// Full W/T fusion. Both images must be 3-channel; the metadata is checked
/// against their sizes (ErrorKind::Metadata / DimensionMismatch). Fusion
/// itself works on luma; warp_color additionally warps the color T for
/// inspection.
PipelineResult run_pipeline(const PlanarImage& wide, const PlanarImage& tele,
                            const CameraMeta& meta, const PipelineConfig& cfg,
                            bool warp_color = false);

}  // namespace hz
