#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hybridzoom/error.hpp"

namespace hz {

/// Integer pixel rectangle, half-open: [x, x+width) x [y, y+height).
struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool empty() const { return width <= 0 || height <= 0; }
  bool inside(int w, int h) const {
    return x >= 0 && y >= 0 && width > 0 && height > 0 && x + width <= w &&
           y + height <= h;
  }
  bool operator==(const Rect&) const = default;
};

/// Multi-channel float image, one contiguous row-major plane per channel.
///
/// Samples are nominally in [0,1]. A few intermediates (detail bands,
/// residuals) are signed; functions producing those say so.
class PlanarImage {
 public:
  PlanarImage() = default;
  PlanarImage(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  std::span<float> plane(int c) {
    return {data_.data() + c * plane_size(), plane_size()};
  }
  std::span<const float> plane(int c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }

  float& at(int x, int y, int c = 0) {
    return data_[c * plane_size() + static_cast<std::size_t>(y) * width_ + x];
  }
  float at(int x, int y, int c = 0) const {
    return data_[c * plane_size() + static_cast<std::size_t>(y) * width_ + x];
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool same_size(const PlanarImage& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

  /// Single-channel copy of plane c.
  PlanarImage channel(int c) const;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Single-channel weight map with every value in [0,1].
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, float fill = 0.0f);

  /// Clamps every sample of a 1-channel image into [0,1].
  static Mask from_image(PlanarImage img);
  PlanarImage to_image() const;

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  float& at(int x, int y) {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  float at(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Dense displacement field with per-axis log-variance.
/// Convention: src(x) ~ ref(x + (u(x), v(x))).
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;
  std::vector<float> v;
  std::vector<float> logvar_x;
  std::vector<float> logvar_y;

  FlowField() = default;
  FlowField(int w, int h, float fu = 0.0f, float fv = 0.0f);

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  bool same_size(const FlowField& o) const {
    return width == o.width && height == o.height;
  }
};

enum class Kernel { Bilinear, Bicubic };

/// BT.601 luma plus Cb/Cr difference channels offset by 0.5.
std::pair<PlanarImage, PlanarImage> rgb_to_yuv(const PlanarImage& img);

/// Luma plane only; equal to rgb_to_yuv(img).first.
PlanarImage rgb_to_luma(const PlanarImage& img);

/// Inverse of rgb_to_yuv, clamped to [0,1].
PlanarImage yuv_to_rgb(const PlanarImage& luma, const PlanarImage& chroma);

/// Separable resampling with pixel-center alignment and edge clamping.
/// When shrinking along an axis and `antialias` is set, the kernel is widened
/// by the shrink factor. Weights are normalized, so constants are preserved.
/// No output clamping: bicubic may overshoot, signed inputs stay signed.
PlanarImage resample(const PlanarImage& img, int new_width, int new_height,
                     Kernel kernel, bool antialias = true);

/// Gaussian blur, kernel truncated at +-ceil(3 sigma), edge clamp.
/// sigma == 0 is the identity.
PlanarImage gaussian_blur(const PlanarImage& img, double sigma);

/// warped(x) = img(x + flow(x)) with bilinear sampling. Samples landing
/// outside the image are edge-clamped and flagged 0 in the validity mask.
std::pair<PlanarImage, Mask> bilinear_warp(const PlanarImage& img,
                                           const FlowField& flow);

/// Warp by a flow computed at a coarser resolution. Same result as
/// bilinear_warp(img, resize_flow(flow, w, h)) without materializing the
/// full-resolution flow.
std::pair<PlanarImage, Mask> bilinear_warp_upsampled(const PlanarImage& img,
                                                     const FlowField& flow);

/// Gaussian pyramid. Level 0 is the input. Stops early (fewer levels
/// returned) once the next level would be smaller than 8x8.
std::vector<PlanarImage> build_pyramid(const PlanarImage& img, int levels,
                                       double scale_factor);

/// Bilinear sample with edge clamping, pixel centers at integer coordinates.
float sample_bilinear(std::span<const float> plane, int width, int height,
                      float x, float y);

/// Bilinear down by 1/ratio then back up to the original size: the optical
/// low-pass that models the sampling gap between the two cameras.
/// ratio <= 1 returns the input unchanged.
PlanarImage downup(const PlanarImage& img, double ratio);

/// Bilinear resize of a flow field with displacements rescaled to the new
/// grid. logvar planes are resized and shifted by the log of the squared
/// scale so that the implied variance is in target pixels.
FlowField resize_flow(const FlowField& flow, int new_width, int new_height);

}  // namespace hz
