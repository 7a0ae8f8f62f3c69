#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridzoom/image.hpp"

namespace hz {

struct FusionInput {
  PlanarImage y_src;         // luma of the cropped wide image
  PlanarImage y_ref_warped;  // luma of the aligned tele image
  Mask occlusion;            // same size as the planes
  double focal_ratio = 1.0;  // optical gap between the two samplings
};

/// A luma fusion operator. Must return a 1-channel image the size of y_src.
using FusionOperator = std::function<PlanarImage(const FusionInput&)>;

/// Band injection: D = y_ref - downup(y_ref, focal_ratio) is the detail the
/// reference carries beyond the source sampling rate;
///   Y = clamp(y_src + (1 - occlusion) * D, 0, 1).
PlanarImage band_inject(const FusionInput& input);

/// Looks up a registered operator ("band_inject"). Unknown keys throw a
/// Config error.
FusionOperator fusion_operator(std::string_view key);
std::vector<std::string> fusion_operator_keys();

/// Runs the default operator after validating the input.
PlanarImage fuse_luma(const FusionInput& input);
PlanarImage fuse_luma(const FusionInput& input, const FusionOperator& op);

/// Merges fused luma with the source chroma and converts to RGB. Luma is
/// first limited to the range where the given chroma stays inside the RGB
/// gamut, so the output chroma equals chroma_src exactly.
PlanarImage recombine(const PlanarImage& y_fusion,
                      const PlanarImage& chroma_src);

}  // namespace hz
