#include "hybridzoom/rig_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hz {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash4(std::uint64_t seed, std::int64_t a, std::int64_t b,
                    std::int64_t c) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(a));
  h = splitmix(h ^ static_cast<std::uint64_t>(b));
  return splitmix(h ^ static_cast<std::uint64_t>(c));
}

double unit(std::uint64_t h) {  // [0,1)
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double lattice(std::uint64_t seed, std::int64_t x, std::int64_t y) {
  return 2.0 * unit(hash4(seed, x, y, 0)) - 1.0;
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(std::uint64_t seed, double x, double y) {
  const double xf = std::floor(x), yf = std::floor(y);
  const auto xi = static_cast<std::int64_t>(xf);
  const auto yi = static_cast<std::int64_t>(yf);
  const double tx = fade(x - xf), ty = fade(y - yf);
  const double a = lattice(seed, xi, yi), b = lattice(seed, xi + 1, yi);
  const double c = lattice(seed, xi, yi + 1), d = lattice(seed, xi + 1, yi + 1);
  const double top = a + tx * (b - a);
  const double bot = c + tx * (d - c);
  return top + ty * (bot - top);
}

// Octaves from coarse to fine; the finest carries detail W cannot resolve.
double fbm(std::uint64_t seed, double x, double y, double finest_period) {
  constexpr double kAmp[] = {0.30, 0.25, 0.20, 0.16, 0.13, 0.11};
  constexpr int kOctaves = 6;
  double sum = 0.0;
  for (int o = 0; o < kOctaves; ++o) {
    const double period = finest_period * std::ldexp(1.0, kOctaves - 1 - o);
    sum += kAmp[o] * value_noise(seed + 1000003ULL * o, x / period, y / period);
  }
  return sum;
}

double luminance(std::uint64_t seed, double x, double y, double contrast,
                 double finest_period) {
  return std::clamp(0.5 + 0.6 * contrast * fbm(seed, x, y, finest_period),
                    0.02, 0.98);
}

double gaussian_noise(std::uint64_t seed, int x, int y, int c) {
  const std::uint64_t h = hash4(seed ^ 0x5a5a5a5aULL, x, y, c);
  const double u1 = std::max(unit(h), 1e-300);
  const double u2 = unit(splitmix(h));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

constexpr double kFinestPeriod = 3.0;

std::uint64_t layer_seed(std::uint64_t scene_seed, std::size_t l) {
  return hash4(scene_seed, static_cast<std::int64_t>(l), 17, 23);
}

int visible_in_source(const RigScene& s, double px, double py) {
  for (int l = static_cast<int>(s.layers.size()) - 1; l >= 0; --l)
    if (s.layers[l].contains(px, py)) return l;
  return 0;
}

// Layer seen by T at tele pixel (yx, yy).
int visible_in_tele(const RigScene& s, double yx, double yy) {
  for (int l = static_cast<int>(s.layers.size()) - 1; l >= 0; --l) {
    const SceneLayer& L = s.layers[l];
    if (L.contains(yx - s.translation.dx - L.disparity_x,
                   yy - s.translation.dy - L.disparity_y))
      return l;
  }
  return 0;
}

}  // namespace

bool SceneLayer::contains(double px, double py) const {
  switch (shape) {
    case LayerShape::Full:
      return true;
    case LayerShape::Rect:
      return px >= x && px < x + width && py >= y && py < y + height;
    case LayerShape::Ellipse: {
      const double cx = x + 0.5 * width, cy = y + 0.5 * height;
      const double dx = (px - cx) / (0.5 * width);
      const double dy = (py - cy) / (0.5 * height);
      return dx * dx + dy * dy <= 1.0;
    }
  }
  return false;
}

void validate_scene(const RigScene& s) {
  auto fail = [](const std::string& field) {
    throw Error(ErrorKind::InvalidInput, "invalid scene field: " + field);
  };
  if (s.tele_width < 16 || s.tele_height < 16) fail("tele_width/tele_height");
  if (s.wide_width < 2 || s.wide_height < 2) fail("wide_width/wide_height");
  if (!(s.focal_ratio > 1.0)) fail("focal_ratio");
  if (s.layers.empty()) fail("layers");
  if (s.layers[0].shape != LayerShape::Full) fail("layers[0].shape");
  if (!(s.noise_sigma >= 0.0)) fail("noise_sigma");
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    const SceneLayer& L = s.layers[l];
    const std::string at = "layers[" + std::to_string(l) + "]";
    if (L.shape != LayerShape::Full && (L.width <= 0.0 || L.height <= 0.0))
      fail(at + ".width/height");
    if (!(L.defocus_sigma >= 0.0)) fail(at + ".defocus_sigma");
    if (std::hypot(L.disparity_x, L.disparity_y) > 64.0) fail(at + ".disparity");
  }
  for (double g : s.color_gain)
    if (!(g > 0.0)) fail("color_gain");
  if (s.focus_layer >= static_cast<int>(s.layers.size())) fail("focus_layer");
  const int rw = static_cast<int>(std::lround(s.tele_width / s.focal_ratio));
  const int rh = static_cast<int>(std::lround(s.tele_height / s.focal_ratio));
  if (rw < 2 || rh < 2 || rw > s.wide_width || rh > s.wide_height)
    fail("wide_width/wide_height (too small for the tele field of view)");
}

SyntheticPair synthesize_pair(const RigScene& s) {
  validate_scene(s);
  const int tw = s.tele_width, th = s.tele_height;
  const int ww = s.wide_width, wh = s.wide_height;

  Rect rect;
  rect.width = static_cast<int>(std::lround(tw / s.focal_ratio));
  rect.height = static_cast<int>(std::lround(th / s.focal_ratio));
  rect.x = (ww - rect.width) / 2;
  rect.y = (wh - rect.height) / 2;
  // World grid: W field of view at T pixel density.
  const double kx = static_cast<double>(tw) / rect.width;
  const double ky = static_cast<double>(th) / rect.height;
  const double ox = rect.x * kx, oy = rect.y * ky;

  std::vector<std::uint64_t> seeds(s.layers.size());
  for (std::size_t l = 0; l < seeds.size(); ++l) seeds[l] = layer_seed(s.seed, l);

  auto shade = [&](int l, double wx, double wy, int c) {
    const SceneLayer& L = s.layers[l];
    return static_cast<float>(
        L.tint[c] * luminance(seeds[l], wx, wy, L.contrast, kFinestPeriod));
  };

  SyntheticPair out;

  // W: composite on the world grid, optical blur, sample at W pixel centers.
  {
    const int cw = static_cast<int>(std::lround(ww * kx));
    const int ch = static_cast<int>(std::lround(wh * ky));
    PlanarImage canvas(cw, ch, 3);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < ch; ++y)
      for (int x = 0; x < cw; ++x) {
        const int l = visible_in_source(s, x - ox, y - oy);
        for (int c = 0; c < 3; ++c) canvas.at(x, y, c) = shade(l, x, y, c);
      }
    out.wide = resample(gaussian_blur(canvas, s.focal_ratio / 2.0), ww, wh,
                        Kernel::Bilinear, /*antialias=*/false);
    for (float& v : out.wide.data()) v = std::clamp(v, 0.0f, 1.0f);
  }

  // GT in the source frame.
  out.labels.gt_image = PlanarImage(tw, th, 3);
  out.labels.gt_flow = FlowField(tw, th);
  out.labels.gt_occlusion = Mask(tw, th);
  out.labels.gt_defocus_region = Mask(tw, th);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < th; ++y)
    for (int x = 0; x < tw; ++x) {
      const int l = visible_in_source(s, x, y);
      const SceneLayer& L = s.layers[l];
      for (int c = 0; c < 3; ++c)
        out.labels.gt_image.at(x, y, c) = shade(l, x + ox, y + oy, c);
      const std::size_t i = out.labels.gt_flow.index(x, y);
      out.labels.gt_flow.u[i] = static_cast<float>(L.disparity_x);
      out.labels.gt_flow.v[i] = static_cast<float>(L.disparity_y);
      const double tx = x + s.translation.dx + L.disparity_x;
      const double ty = y + s.translation.dy + L.disparity_y;
      const bool outside = tx < 0.0 || ty < 0.0 || tx > tw - 1 || ty > th - 1;
      out.labels.gt_occlusion.at(x, y) =
          outside || visible_in_tele(s, tx, ty) != l ? 1.0f : 0.0f;
      out.labels.gt_defocus_region.at(x, y) = L.defocus_sigma > 0.0 ? 1.0f : 0.0f;
    }

  // T: each layer rendered at its own parallax, defocused, then composited.
  out.tele = PlanarImage(tw, th, 3);
  {
    std::vector<int> owner(static_cast<std::size_t>(tw) * th);
    for (int y = 0; y < th; ++y)
      for (int x = 0; x < tw; ++x)
        owner[static_cast<std::size_t>(y) * tw + x] = visible_in_tele(s, x, y);
    for (int l = 0; l < static_cast<int>(s.layers.size()); ++l) {
      const SceneLayer& L = s.layers[l];
      if (std::find(owner.begin(), owner.end(), l) == owner.end()) continue;
      PlanarImage layer(tw, th, 3);
      const double sx = ox - s.translation.dx - L.disparity_x;
      const double sy = oy - s.translation.dy - L.disparity_y;
#pragma omp parallel for schedule(static)
      for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x)
          for (int c = 0; c < 3; ++c) layer.at(x, y, c) = shade(l, x + sx, y + sy, c);
      layer = gaussian_blur(layer, L.defocus_sigma);
      for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x)
          if (owner[static_cast<std::size_t>(y) * tw + x] == l)
            for (int c = 0; c < 3; ++c) out.tele.at(x, y, c) = layer.at(x, y, c);
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < th; ++y)
      for (int x = 0; x < tw; ++x)
        for (int c = 0; c < 3; ++c) {
          double v = out.tele.at(x, y, c) * s.color_gain[c];
          if (s.noise_sigma > 0.0) v += s.noise_sigma * gaussian_noise(s.seed, x, y, c);
          out.tele.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
  }

  // Metadata: focus ROI is the focused layer's box as seen by T, shrunk.
  out.meta.focal_ratio = s.focal_ratio;
  out.meta.tele_fov_rect = rect;
  {
    const int fl = s.focus_layer < 0 ? static_cast<int>(s.layers.size()) - 1
                                     : s.focus_layer;
    const SceneLayer& L = s.layers[fl];
    double x0 = 0, y0 = 0, x1 = tw, y1 = th;
    if (L.shape != LayerShape::Full) {
      x0 = L.x + s.translation.dx + L.disparity_x;
      y0 = L.y + s.translation.dy + L.disparity_y;
      x1 = x0 + L.width;
      y1 = y0 + L.height;
    }
    x0 = std::clamp(x0, 0.0, double(tw));
    x1 = std::clamp(x1, 0.0, double(tw));
    y0 = std::clamp(y0, 0.0, double(th));
    y1 = std::clamp(y1, 0.0, double(th));
    const double mx = 0.2 * (x1 - x0), my = 0.2 * (y1 - y0);
    Rect roi;
    roi.x = static_cast<int>(std::ceil(x0 + mx));
    roi.y = static_cast<int>(std::ceil(y0 + my));
    roi.width = std::max(0, static_cast<int>(std::floor(x1 - mx)) - roi.x);
    roi.height = std::max(0, static_cast<int>(std::floor(y1 - my)) - roi.y);
    out.meta.focus_roi = roi;
  }
  return out;
}

RigScene two_layer_scene(double fg_disparity, double bg_disparity,
                         double bg_defocus_sigma, std::uint64_t seed) {
  RigScene s;
  s.seed = seed;
  s.noise_sigma = 0.004;
  s.color_gain = {1.06, 1.0, 0.95};
  SceneLayer bg;
  bg.disparity_x = bg_disparity;
  bg.defocus_sigma = bg_defocus_sigma;
  bg.tint = {0.92f, 0.96f, 1.0f};
  SceneLayer fg;
  fg.shape = LayerShape::Rect;
  fg.x = 160;
  fg.y = 112;
  fg.width = 192;
  fg.height = 160;
  fg.disparity_x = fg_disparity;
  fg.tint = {1.0f, 0.93f, 0.86f};
  s.layers = {bg, fg};
  s.focus_layer = 1;
  return s;
}

PlanarImage procedural_texture(int width, int height, std::uint64_t seed,
                               double finest_period) {
  PlanarImage img(width, height, 1);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      img.at(x, y) = static_cast<float>(luminance(seed, x, y, 1.0, finest_period));
  return img;
}

double psnr(const PlanarImage& a, const PlanarImage& b) {
  require(a.same_size(b) && a.channels() == b.channels(),
          ErrorKind::DimensionMismatch, "psnr: size mismatch");
  double se = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.data().size());
  if (mse == 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

double brightness_consistency(const PlanarImage& y_a, const PlanarImage& y_b,
                              double sigma) {
  require(y_a.same_size(y_b) && y_a.channels() == y_b.channels(),
          ErrorKind::DimensionMismatch, "brightness_consistency: size mismatch");
  const PlanarImage ga = gaussian_blur(y_a, sigma);
  const PlanarImage gb = gaussian_blur(y_b, sigma);
  double acc = 0.0;
  for (std::size_t i = 0; i < ga.data().size(); ++i)
    acc += std::abs(static_cast<double>(ga.data()[i]) - gb.data()[i]);
  return acc / static_cast<double>(ga.data().size());
}

}  // namespace hz
