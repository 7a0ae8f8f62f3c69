#include "hybridzoom/fusion.hpp"

#include <algorithm>
#include <map>

namespace hz {

namespace {

void validate(const FusionInput& in) {
  require(in.y_src.channels() == 1 && in.y_ref_warped.channels() == 1,
          ErrorKind::InvalidInput, "fusion expects luma planes");
  require(in.y_src.same_size(in.y_ref_warped) &&
              in.occlusion.width() == in.y_src.width() &&
              in.occlusion.height() == in.y_src.height(),
          ErrorKind::DimensionMismatch, "fusion input planes differ in size");
  require(in.focal_ratio > 0.0, ErrorKind::InvalidInput,
          "focal ratio must be positive");
}

const std::map<std::string, FusionOperator, std::less<>>& registry() {
  static const std::map<std::string, FusionOperator, std::less<>> ops = {
      {"band_inject", band_inject},
  };
  return ops;
}

}  // namespace

PlanarImage band_inject(const FusionInput& in) {
  const PlanarImage low = downup(in.y_ref_warped, in.focal_ratio);
  PlanarImage out(in.y_src.width(), in.y_src.height(), 1);
  const auto& src = in.y_src.data();
  const auto& ref = in.y_ref_warped.data();
  const auto& occ = in.occlusion.data();
  const auto& lp = low.data();
  auto& o = out.data();
  const auto n = static_cast<std::ptrdiff_t>(o.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const float detail = ref[i] - lp[i];
    o[i] = std::clamp(src[i] + (1.0f - occ[i]) * detail, 0.0f, 1.0f);
  }
  return out;
}

FusionOperator fusion_operator(std::string_view key) {
  const auto& ops = registry();
  auto it = ops.find(key);
  if (it == ops.end())
    throw Error(ErrorKind::Config,
                "unknown fusion operator '" + std::string(key) + "'");
  return it->second;
}

std::vector<std::string> fusion_operator_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : registry()) keys.push_back(k);
  return keys;
}

PlanarImage fuse_luma(const FusionInput& input) {
  return fuse_luma(input, band_inject);
}

PlanarImage fuse_luma(const FusionInput& input, const FusionOperator& op) {
  validate(input);
  PlanarImage out = op(input);
  require(out.channels() == 1 && out.same_size(input.y_src),
          ErrorKind::DimensionMismatch,
          "fusion operator returned a plane of the wrong shape");
  return out;
}

PlanarImage recombine(const PlanarImage& y_fusion,
                      const PlanarImage& chroma_src) {
  require(y_fusion.channels() == 1 && chroma_src.channels() == 2,
          ErrorKind::InvalidInput, "recombine expects 1+2 channels");
  require(y_fusion.same_size(chroma_src), ErrorKind::DimensionMismatch,
          "recombine: luma/chroma sizes differ");
  // BT.601 constants, matching rgb_to_yuv.
  constexpr double kWr = 0.299, kWg = 0.587, kWb = 0.114;
  constexpr double kCb = 1.772, kCr = 1.402;
  constexpr float wr = static_cast<float>(kWr), wb = static_cast<float>(kWb);
  constexpr float inv_wg = static_cast<float>(1.0 / kWg);
  constexpr float cbk = static_cast<float>(kCb), crk = static_cast<float>(kCr);
  PlanarImage out(y_fusion.width(), y_fusion.height(), 3);
  auto yf = y_fusion.plane(0);
  auto cb = chroma_src.plane(0), cr = chroma_src.plane(1);
  auto r = out.plane(0), g = out.plane(1), b = out.plane(2);
  const auto n = static_cast<std::ptrdiff_t>(out.plane_size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const float a = crk * (cr[i] - 0.5f);           // R - Y
    const float bd = cbk * (cb[i] - 0.5f);          // B - Y
    const float gd = (wr * a + wb * bd) * inv_wg;   // Y - G
    // Keep luma inside the range where this chroma is representable, so
    // the RGB result carries the source chroma exactly.
    const float lo = std::max(std::max(0.0f, -a), std::max(-bd, gd));
    const float hi = std::max(lo, std::min(std::min(1.0f, 1.0f - a),
                                           std::min(1.0f - bd, 1.0f + gd)));
    const float y = std::min(std::max(yf[i], lo), hi);
    r[i] = std::min(std::max(y + a, 0.0f), 1.0f);
    g[i] = std::min(std::max(y - gd, 0.0f), 1.0f);
    b[i] = std::min(std::max(y + bd, 0.0f), 1.0f);
  }
  return out;
}

}  // namespace hz
