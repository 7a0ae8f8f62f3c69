#include "hybridzoom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"

#include "hybridzoom/fusion.hpp"

namespace hz {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Long side used for keypoint matching; larger inputs are shrunk first.
constexpr int kMatchLongSide = 1024;

Rect scale_rect(const Rect& r, double sx, double sy, int w, int h) {
  if (r.empty()) return {};
  const int x0 = std::clamp(static_cast<int>(std::floor(r.x * sx)), 0, w - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(r.y * sy)), 0, h - 1);
  const int x1 = std::clamp(static_cast<int>(std::ceil((r.x + r.width) * sx)), x0 + 1, w);
  const int y1 = std::clamp(static_cast<int>(std::ceil((r.y + r.height) * sy)), y0 + 1, h);
  return {x0, y0, x1 - x0, y1 - y0};
}

TranslationEstimate coarse_translation(const PlanarImage& y_src,
                                       const PlanarImage& y_ref,
                                       double ratio,
                                       const TranslationParams& params) {
  const int long_side = std::max(y_src.width(), y_src.height());
  const double s = std::min(1.0, static_cast<double>(kMatchLongSide) / long_side);
  if (s == 1.0) {
    return estimate_translation(y_src, downup(y_ref, ratio), params);
  }
  const int w = std::max(1, static_cast<int>(std::lround(y_src.width() * s)));
  const int h = std::max(1, static_cast<int>(std::lround(y_src.height() * s)));
  const PlanarImage src_s = resample(y_src, w, h, Kernel::Bilinear);
  // T is sharper than the W crop; bring it to the same optical level.
  const PlanarImage ref_s = downup(resample(y_ref, w, h, Kernel::Bilinear), ratio * s);
  TranslationParams p = params;
  p.search_radius = params.search_radius * s;
  TranslationEstimate est = estimate_translation(src_s, ref_s, p);
  est.translation.dx *= static_cast<double>(y_src.width()) / w;
  est.translation.dy *= static_cast<double>(y_src.height()) / h;
  return est;
}

}  // namespace

std::string timings_to_json(const StageTimings& t) {
  nlohmann::ordered_json j;
  j["color_matching"] = t.color_matching;
  j["coarse_alignment"] = t.coarse_alignment;
  j["optical_flow"] = t.optical_flow;
  j["warping"] = t.warping;
  j["occlusion_map"] = t.occlusion_map;
  j["defocus_map"] = t.defocus_map;
  j["rejection_map"] = t.rejection_map;
  j["fusion"] = t.fusion;
  j["blending"] = t.blending;
  j["total"] = t.total;
  return j.dump(2);
}

double sampling_ratio(const CameraMeta& meta, int tele_w, int tele_h) {
  const Rect& r = meta.tele_fov_rect;
  return 0.5 * (static_cast<double>(tele_w) / r.width +
                static_cast<double>(tele_h) / r.height);
}

PipelineResult run_pipeline(const PlanarImage& wide, const PlanarImage& tele,
                            const CameraMeta& meta, const PipelineConfig& cfg,
                            bool warp_color) {
  require(wide.channels() == 3 && tele.channels() == 3,
          ErrorKind::DimensionMismatch, "W and T must be 3-channel images");
  validate_meta(meta, wide.width(), wide.height(), tele.width(), tele.height());
  validate_config(cfg);

  const auto t_start = Clock::now();
  PipelineResult res;
  const int tw = tele.width();
  const int th = tele.height();
  res.optical_ratio = std::max(1.0, sampling_ratio(meta, tw, th));

  auto t0 = Clock::now();
  res.i_src = crop_and_resample_source(wide, meta, tw, th);
  auto [y_src, chroma_src] = rgb_to_yuv(res.i_src);
  res.translation = coarse_translation(y_src, rgb_to_luma(tele), res.optical_ratio, cfg.coarse);
  res.timings.coarse_alignment = ms_since(t0);

  if (res.translation.low_confidence) {
    res.fusion_skipped = true;
    res.output = wide;
    res.timings.total = ms_since(t_start);
    return res;
  }

  t0 = Clock::now();
  res.i_ref = match_color(tele, res.i_src);
  res.timings.color_matching = ms_since(t0);

  t0 = Clock::now();
  const PlanarImage y_ref = rgb_to_luma(res.i_ref);
  const auto [fw, fh] = flow_resolution(tw, th, cfg.flow);
  const double sx = static_cast<double>(fw) / tw;
  const double sy = static_cast<double>(fh) / th;
  const PlanarImage y_src_f = resample(y_src, fw, fh, Kernel::Bilinear);
  const PlanarImage y_ref_f = downup(resample(y_ref, fw, fh, Kernel::Bilinear),
                                     res.optical_ratio * 0.5 * (sx + sy));
  const Translation2D init{res.translation.translation.dx * sx,
                           res.translation.translation.dy * sy};
  std::tie(res.fwd, res.bwd) = estimate_flow_pair(y_src_f, y_ref_f, cfg.flow, init);
  res.m_flow = flow_uncertainty_map(res.fwd, cfg.uncertainty);
  res.timings.optical_flow = ms_since(t0);

  t0 = Clock::now();
  // Fusion and rejection only need luma; the color warp is a debug product.
  auto [y_ref_warped, valid] = bilinear_warp_upsampled(y_ref, res.fwd);
  if (warp_color) res.i_ref_warped = bilinear_warp_upsampled(res.i_ref, res.fwd).first;
  res.timings.warping = ms_since(t0);

  t0 = Clock::now();
  res.m_occ = upsample_mask(occlusion_map(res.fwd, res.bwd, cfg.occlusion), tw, th);
  // Samples that fell outside T carry no reference information.
  for (std::size_t i = 0; i < res.m_occ.size(); ++i)
    res.m_occ.data()[i] = std::max(res.m_occ.data()[i], 1.0f - valid.data()[i]);
  res.timings.occlusion_map = ms_since(t0);

  t0 = Clock::now();
  const Rect roi_f = scale_rect(meta.focus_roi, sx, sy, fw, fh);
  std::tie(res.m_defocus, res.focus) = defocus_map(res.fwd, roi_f, cfg.defocus);
  res.timings.defocus_map = ms_since(t0);

  t0 = Clock::now();
  res.m_reject = rejection_map(y_src, y_ref_warped, res.optical_ratio, cfg.rejection);
  res.timings.rejection_map = ms_since(t0);

  t0 = Clock::now();
  const FusionInput fin{y_src, y_ref_warped, res.m_occ, res.optical_ratio};
  const PlanarImage y_fusion = fuse_luma(fin, fusion_operator(cfg.fusion_operator));
  const PlanarImage i_fusion = recombine(y_fusion, chroma_src);
  res.timings.fusion = ms_since(t0);

  t0 = Clock::now();
  const BlendStack stack{res.m_occ, res.m_defocus, res.m_flow, res.m_reject,
                         cfg.boundary_sigma.value_or(default_boundary_sigma(tw, th))};
  res.m_blend = smooth_boundary(blend_mask(stack, tw, th), Rect{0, 0, tw, th},
                                stack.boundary_sigma);
  res.zoomed = alpha_blend(i_fusion, res.i_src, res.m_blend);
  res.output = uncrop(res.zoomed, res.i_src, wide, meta);
  res.timings.blending = ms_since(t0);

  res.timings.total = ms_since(t_start);
  return res;
}

}  // namespace hz
