#include "hybridzoom/image.hpp"

#include <algorithm>
#include <cmath>

namespace hz {

PlanarImage::PlanarImage(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  require(width > 0 && height > 0, ErrorKind::InvalidInput,
          "image dimensions must be positive");
  require(channels >= 1 && channels <= 3, ErrorKind::InvalidInput,
          "image must have 1, 2 or 3 channels");
  data_.assign(plane_size() * channels, fill);
}

PlanarImage PlanarImage::channel(int c) const {
  PlanarImage out(width_, height_, 1);
  auto src = plane(c);
  std::copy(src.begin(), src.end(), out.data().begin());
  return out;
}

Mask::Mask(int width, int height, float fill) : width_(width), height_(height) {
  require(width > 0 && height > 0, ErrorKind::InvalidInput,
          "mask dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * height,
               std::clamp(fill, 0.0f, 1.0f));
}

Mask Mask::from_image(PlanarImage img) {
  require(img.channels() == 1, ErrorKind::InvalidInput,
          "mask source must be single-channel");
  Mask m;
  m.width_ = img.width();
  m.height_ = img.height();
  m.data_ = std::move(img.data());
  for (float& v : m.data_) v = std::clamp(v, 0.0f, 1.0f);
  return m;
}

PlanarImage Mask::to_image() const {
  PlanarImage img(width_, height_, 1);
  std::copy(data_.begin(), data_.end(), img.data().begin());
  return img;
}

FlowField::FlowField(int w, int h, float fu, float fv)
    : width(w), height(h) {
  require(w > 0 && h > 0, ErrorKind::InvalidInput,
          "flow dimensions must be positive");
  const auto n = static_cast<std::size_t>(w) * h;
  u.assign(n, fu);
  v.assign(n, fv);
  logvar_x.assign(n, 0.0f);
  logvar_y.assign(n, 0.0f);
}

// ---------------------------------------------------------------------------
// Color conversion

namespace {
constexpr double kWr = 0.299;
constexpr double kWg = 0.587;
constexpr double kWb = 0.114;
constexpr double kCb = 2.0 * (1.0 - kWb);  // 1.772
constexpr double kCr = 2.0 * (1.0 - kWr);  // 1.402
constexpr double kInvCb = 1.0 / kCb;
constexpr double kInvCr = 1.0 / kCr;
constexpr double kInvWg = 1.0 / kWg;
}  // namespace

PlanarImage rgb_to_luma(const PlanarImage& img) {
  require(img.channels() == 3, ErrorKind::InvalidInput,
          "rgb_to_luma expects a 3-channel image");
  PlanarImage luma(img.width(), img.height(), 1);
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto y = luma.plane(0);
  const auto n = static_cast<std::ptrdiff_t>(img.plane_size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    y[i] = static_cast<float>(kWr * r[i] + kWg * g[i] + kWb * b[i]);
  return luma;
}

std::pair<PlanarImage, PlanarImage> rgb_to_yuv(const PlanarImage& img) {
  require(img.channels() == 3, ErrorKind::InvalidInput,
          "rgb_to_yuv expects a 3-channel image");
  PlanarImage luma(img.width(), img.height(), 1);
  PlanarImage chroma(img.width(), img.height(), 2);
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto y = luma.plane(0), cb = chroma.plane(0), cr = chroma.plane(1);
  const auto n = static_cast<std::ptrdiff_t>(img.plane_size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double yy = kWr * r[i] + kWg * g[i] + kWb * b[i];
    y[i] = static_cast<float>(yy);
    cb[i] = static_cast<float>((b[i] - yy) * kInvCb + 0.5);
    cr[i] = static_cast<float>((r[i] - yy) * kInvCr + 0.5);
  }
  return {std::move(luma), std::move(chroma)};
}

PlanarImage yuv_to_rgb(const PlanarImage& luma, const PlanarImage& chroma) {
  require(luma.channels() == 1 && chroma.channels() == 2,
          ErrorKind::InvalidInput, "yuv_to_rgb expects 1+2 channels");
  require(luma.same_size(chroma), ErrorKind::DimensionMismatch,
          "luma/chroma dimension mismatch");
  PlanarImage out(luma.width(), luma.height(), 3);
  auto y = luma.plane(0), cb = chroma.plane(0), cr = chroma.plane(1);
  auto r = out.plane(0), g = out.plane(1), b = out.plane(2);
  const auto n = static_cast<std::ptrdiff_t>(luma.plane_size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double rr = y[i] + kCr * (cr[i] - 0.5);
    const double bb = y[i] + kCb * (cb[i] - 0.5);
    const double gg = (y[i] - kWr * rr - kWb * bb) * kInvWg;
    r[i] = static_cast<float>(std::clamp(rr, 0.0, 1.0));
    g[i] = static_cast<float>(std::clamp(gg, 0.0, 1.0));
    b[i] = static_cast<float>(std::clamp(bb, 0.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

double triangle(double x) {
  x = std::abs(x);
  return x < 1.0 ? 1.0 - x : 0.0;
}

// Keys cubic convolution, a = -0.5.
double keys_cubic(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

struct TapTable {
  int taps = 0;                 // taps per output sample
  std::vector<int> index;       // out * taps, clamped source indices
  std::vector<float> weight;    // out * taps
};

TapTable make_taps(int in, int out, Kernel kernel, bool antialias) {
  const double scale = static_cast<double>(in) / out;
  const double stretch = (antialias && scale > 1.0) ? scale : 1.0;
  const double support = (kernel == Kernel::Bilinear ? 1.0 : 2.0) * stretch;

  TapTable t;
  // Integers strictly inside (center - support, center + support).
  t.taps = static_cast<int>(std::ceil(2.0 * support));
  t.index.assign(static_cast<std::size_t>(out) * t.taps, 0);
  t.weight.assign(static_cast<std::size_t>(out) * t.taps, 0.0f);

  std::vector<double> w(t.taps);
  for (int o = 0; o < out; ++o) {
    const double center = (o + 0.5) * scale - 0.5;
    const int first = static_cast<int>(std::floor(center - support)) + 1;
    double sum = 0.0;
    for (int k = 0; k < t.taps; ++k) {
      const double d = (first + k - center) / stretch;
      w[k] = kernel == Kernel::Bilinear ? triangle(d) : keys_cubic(d);
      sum += w[k];
    }
    for (int k = 0; k < t.taps; ++k) {
      const auto slot = static_cast<std::size_t>(o) * t.taps + k;
      t.index[slot] = std::clamp(first + k, 0, in - 1);
      t.weight[slot] = static_cast<float>(w[k] / sum);
    }
  }
  return t;
}

void horizontal_pass(const float* src, int in_w, float* dst, int out_w,
                     int rows, const TapTable& tx) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < rows; ++y) {
    const float* row = src + static_cast<std::size_t>(y) * in_w;
    float* out = dst + static_cast<std::size_t>(y) * out_w;
    for (int x = 0; x < out_w; ++x) {
      const int* idx = tx.index.data() + static_cast<std::size_t>(x) * tx.taps;
      const float* wt = tx.weight.data() + static_cast<std::size_t>(x) * tx.taps;
      float acc = 0.0f;
      for (int k = 0; k < tx.taps; ++k) acc += wt[k] * row[idx[k]];
      out[x] = acc;
    }
  }
}

void vertical_pass(const float* src, float* dst, int width, int out_h,
                   const TapTable& ty) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y) {
    float* out = dst + static_cast<std::size_t>(y) * width;
    std::fill(out, out + width, 0.0f);
    const int* idx = ty.index.data() + static_cast<std::size_t>(y) * ty.taps;
    const float* wt = ty.weight.data() + static_cast<std::size_t>(y) * ty.taps;
    for (int k = 0; k < ty.taps; ++k) {
      if (wt[k] == 0.0f) continue;
      const float* row = src + static_cast<std::size_t>(idx[k]) * width;
      const float w = wt[k];
      for (int x = 0; x < width; ++x) out[x] += w * row[x];
    }
  }
}

void resample_plane(std::span<const float> src, int in_w, int in_h,
                    std::span<float> dst, int out_w, int out_h,
                    const TapTable& tx, const TapTable& ty) {
  // The vertical pass streams whole rows and vectorizes, the horizontal one
  // gathers; shrink rows first so the gather touches fewer samples.
  if (out_h < in_h) {
    std::vector<float> tmp(static_cast<std::size_t>(in_w) * out_h);
    vertical_pass(src.data(), tmp.data(), in_w, out_h, ty);
    horizontal_pass(tmp.data(), in_w, dst.data(), out_w, out_h, tx);
  } else {
    std::vector<float> tmp(static_cast<std::size_t>(out_w) * in_h);
    horizontal_pass(src.data(), in_w, tmp.data(), out_w, in_h, tx);
    vertical_pass(tmp.data(), dst.data(), out_w, out_h, ty);
  }
}

}  // namespace

PlanarImage resample(const PlanarImage& img, int new_width, int new_height,
                     Kernel kernel, bool antialias) {
  require(new_width > 0 && new_height > 0, ErrorKind::InvalidInput,
          "resample target dimensions must be positive");
  require(!img.empty(), ErrorKind::InvalidInput, "resample of empty image");
  if (new_width == img.width() && new_height == img.height()) return img;
  const TapTable tx = make_taps(img.width(), new_width, kernel, antialias);
  const TapTable ty = make_taps(img.height(), new_height, kernel, antialias);
  PlanarImage out(new_width, new_height, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    resample_plane(img.plane(c), img.width(), img.height(), out.plane(c),
                   new_width, new_height, tx, ty);
  return out;
}

// ---------------------------------------------------------------------------
// Blur

PlanarImage gaussian_blur(const PlanarImage& img, double sigma) {
  require(sigma >= 0.0, ErrorKind::InvalidInput, "sigma must be >= 0");
  if (sigma == 0.0) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kd(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kd[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    sum += kd[k + radius];
  }
  std::vector<float> kernel(kd.size());
  for (std::size_t i = 0; i < kd.size(); ++i)
    kernel[i] = static_cast<float>(kd[i] / sum);

  const int w = img.width(), h = img.height();
  PlanarImage out(w, h, img.channels());
  std::vector<float> tmp(img.plane_size());
  for (int c = 0; c < img.channels(); ++c) {
    auto src = img.plane(c);
    auto dst = out.plane(c);
#pragma omp parallel
    {
      std::vector<float> padded(static_cast<std::size_t>(w) + 2 * radius);
#pragma omp for schedule(static)
      for (int y = 0; y < h; ++y) {
        const float* row = src.data() + static_cast<std::size_t>(y) * w;
        for (int i = 0; i < w + 2 * radius; ++i)
          padded[i] = row[std::clamp(i - radius, 0, w - 1)];
        float* o = tmp.data() + static_cast<std::size_t>(y) * w;
        std::fill(o, o + w, 0.0f);
        for (int k = 0; k <= 2 * radius; ++k) {
          const float wk = kernel[k];
          const float* p = padded.data() + k;
          for (int x = 0; x < w; ++x) o[x] += wk * p[x];
        }
      }
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      float* o = dst.data() + static_cast<std::size_t>(y) * w;
      std::fill(o, o + w, 0.0f);
      for (int k = -radius; k <= radius; ++k) {
        const int yy = std::clamp(y + k, 0, h - 1);
        const float* row = tmp.data() + static_cast<std::size_t>(yy) * w;
        const float wk = kernel[k + radius];
        for (int x = 0; x < w; ++x) o[x] += wk * row[x];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Warping

float sample_bilinear(std::span<const float> plane, int width, int height,
                      float x, float y) {
  x = std::clamp(x, 0.0f, static_cast<float>(width - 1));
  y = std::clamp(y, 0.0f, static_cast<float>(height - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const float fx = x - x0;
  const float fy = y - y0;
  const float* r0 = plane.data() + static_cast<std::size_t>(y0) * width;
  const float* r1 = plane.data() + static_cast<std::size_t>(y1) * width;
  const float top = r0[x0] + fx * (r0[x1] - r0[x0]);
  const float bot = r1[x0] + fx * (r1[x1] - r1[x0]);
  return top + fy * (bot - top);
}

namespace {

// Warps one output row given its per-pixel source positions.
void warp_row(const PlanarImage& img, int y, const float* sx, const float* sy,
              PlanarImage& out, Mask& valid) {
  const int w = img.width(), h = img.height();
  const float xmax = static_cast<float>(w - 1);
  const float ymax = static_cast<float>(h - 1);
  const int nc = img.channels();
  const std::size_t row0 = static_cast<std::size_t>(y) * w;
  for (int x = 0; x < w; ++x) {
    const float px = sx[x], py = sy[x];
    if (!(px >= 0.0f && px <= xmax && py >= 0.0f && py <= ymax))
      valid.data()[row0 + x] = 0.0f;
    const float cx = std::clamp(px, 0.0f, xmax);
    const float cy = std::clamp(py, 0.0f, ymax);
    const int x0 = static_cast<int>(cx);
    const int y0 = static_cast<int>(cy);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const float fx = cx - x0;
    const float fy = cy - y0;
    const std::size_t a = static_cast<std::size_t>(y0) * w;
    const std::size_t b = static_cast<std::size_t>(y1) * w;
    for (int c = 0; c < nc; ++c) {
      const float* p = img.plane(c).data();
      const float top = p[a + x0] + fx * (p[a + x1] - p[a + x0]);
      const float bot = p[b + x0] + fx * (p[b + x1] - p[b + x0]);
      out.plane(c)[row0 + x] = top + fy * (bot - top);
    }
  }
}

}  // namespace

std::pair<PlanarImage, Mask> bilinear_warp(const PlanarImage& img,
                                           const FlowField& flow) {
  require(img.width() == flow.width && img.height() == flow.height,
          ErrorKind::DimensionMismatch, "warp: flow and image sizes differ");
  const int w = img.width(), h = img.height();
  PlanarImage out(w, h, img.channels());
  Mask valid(w, h, 1.0f);
#pragma omp parallel
  {
    std::vector<float> sx(w), sy(w);
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      const std::size_t row0 = static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        sx[x] = x + flow.u[row0 + x];
        sy[x] = y + flow.v[row0 + x];
      }
      warp_row(img, y, sx.data(), sy.data(), out, valid);
    }
  }
  return {std::move(out), std::move(valid)};
}

std::pair<PlanarImage, Mask> bilinear_warp_upsampled(const PlanarImage& img,
                                                     const FlowField& flow) {
  const int w = img.width(), h = img.height();
  if (flow.width == w && flow.height == h) return bilinear_warp(img, flow);
  // Same arithmetic as resize_flow: horizontal pass on the coarse rows, then
  // the vertical combination done row by row, then the displacement gain.
  const TapTable tx = make_taps(flow.width, w, Kernel::Bilinear, true);
  const TapTable ty = make_taps(flow.height, h, Kernel::Bilinear, true);
  std::vector<float> hu(static_cast<std::size_t>(w) * flow.height);
  std::vector<float> hv(hu.size());
  horizontal_pass(flow.u.data(), flow.width, hu.data(), w, flow.height, tx);
  horizontal_pass(flow.v.data(), flow.width, hv.data(), w, flow.height, tx);
  const float gx = static_cast<float>(w) / flow.width;
  const float gy = static_cast<float>(h) / flow.height;

  PlanarImage out(w, h, img.channels());
  Mask valid(w, h, 1.0f);
#pragma omp parallel
  {
    std::vector<float> sx(w), sy(w);
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      std::fill(sx.begin(), sx.end(), 0.0f);
      std::fill(sy.begin(), sy.end(), 0.0f);
      const int* idx = ty.index.data() + static_cast<std::size_t>(y) * ty.taps;
      const float* wt = ty.weight.data() + static_cast<std::size_t>(y) * ty.taps;
      for (int k = 0; k < ty.taps; ++k) {
        if (wt[k] == 0.0f) continue;
        const float* ru = hu.data() + static_cast<std::size_t>(idx[k]) * w;
        const float* rv = hv.data() + static_cast<std::size_t>(idx[k]) * w;
        for (int x = 0; x < w; ++x) {
          sx[x] += wt[k] * ru[x];
          sy[x] += wt[k] * rv[x];
        }
      }
      for (int x = 0; x < w; ++x) {
        sx[x] = x + sx[x] * gx;
        sy[x] = y + sy[x] * gy;
      }
      warp_row(img, y, sx.data(), sy.data(), out, valid);
    }
  }
  return {std::move(out), std::move(valid)};
}

// ---------------------------------------------------------------------------

std::vector<PlanarImage> build_pyramid(const PlanarImage& img, int levels,
                                       double scale_factor) {
  require(levels >= 1, ErrorKind::InvalidInput, "pyramid needs >= 1 level");
  require(scale_factor > 0.0 && scale_factor < 1.0, ErrorKind::InvalidInput,
          "pyramid scale must be in (0,1)");
  std::vector<PlanarImage> pyr;
  pyr.push_back(img);
  const double sigma = 0.5 / scale_factor;
  for (int l = 1; l < levels; ++l) {
    const PlanarImage& prev = pyr.back();
    const int nw = static_cast<int>(std::lround(prev.width() * scale_factor));
    const int nh = static_cast<int>(std::lround(prev.height() * scale_factor));
    if (nw < 8 || nh < 8) break;
    pyr.push_back(resample(gaussian_blur(prev, sigma), nw, nh,
                           Kernel::Bilinear, /*antialias=*/false));
  }
  return pyr;
}

PlanarImage downup(const PlanarImage& img, double ratio) {
  if (ratio <= 1.0) return img;
  const int dw = std::max(1, static_cast<int>(std::lround(img.width() / ratio)));
  const int dh = std::max(1, static_cast<int>(std::lround(img.height() / ratio)));
  return resample(resample(img, dw, dh, Kernel::Bilinear), img.width(),
                  img.height(), Kernel::Bilinear);
}

FlowField resize_flow(const FlowField& flow, int new_width, int new_height) {
  if (new_width == flow.width && new_height == flow.height) return flow;
  const float sx = static_cast<float>(new_width) / flow.width;
  const float sy = static_cast<float>(new_height) / flow.height;
  auto resize_plane = [&](const std::vector<float>& p, float gain, float bias) {
    PlanarImage tmp(flow.width, flow.height, 1);
    std::copy(p.begin(), p.end(), tmp.data().begin());
    PlanarImage r = resample(tmp, new_width, new_height, Kernel::Bilinear);
    std::vector<float> out = std::move(r.data());
    for (float& x : out) x = x * gain + bias;
    return out;
  };
  FlowField out;
  out.width = new_width;
  out.height = new_height;
  out.u = resize_plane(flow.u, sx, 0.0f);
  out.v = resize_plane(flow.v, sy, 0.0f);
  out.logvar_x = resize_plane(flow.logvar_x, 1.0f, 2.0f * std::log(sx));
  out.logvar_y = resize_plane(flow.logvar_y, 1.0f, 2.0f * std::log(sy));
  return out;
}

}  // namespace hz
