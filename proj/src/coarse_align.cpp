#include "hybridzoom/coarse_align.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace hz {

void validate_meta(const CameraMeta& meta, int wide_w, int wide_h, int tele_w,
                   int tele_h) {
  require(meta.focal_ratio > 1.0, ErrorKind::Metadata,
          "focal_ratio must be > 1");
  require(meta.tele_fov_rect.inside(wide_w, wide_h), ErrorKind::Metadata,
          "tele_fov_rect must lie inside the wide image");
  require(meta.focus_roi.empty() || meta.focus_roi.inside(tele_w, tele_h),
          ErrorKind::Metadata, "focus_roi must lie inside the tele image");
}

Rect centered_fov_rect(int wide_w, int wide_h, double focal_ratio) {
  require(focal_ratio >= 1.0, ErrorKind::InvalidInput,
          "focal ratio must be >= 1");
  Rect r;
  r.width = static_cast<int>(std::floor(wide_w / focal_ratio));
  r.height = static_cast<int>(std::floor(wide_h / focal_ratio));
  r.x = (wide_w - r.width) / 2;
  r.y = (wide_h - r.height) / 2;
  return r;
}

PlanarImage crop_and_resample_source(const PlanarImage& w_img,
                                     const CameraMeta& meta, int target_w,
                                     int target_h) {
  const Rect& rect = meta.tele_fov_rect;
  require(rect.inside(w_img.width(), w_img.height()), ErrorKind::Metadata,
          "tele_fov_rect outside the wide image");
  PlanarImage crop(rect.width, rect.height, w_img.channels());
  for (int c = 0; c < w_img.channels(); ++c)
    for (int y = 0; y < rect.height; ++y) {
      const float* src = &w_img.plane(c)[static_cast<std::size_t>(y + rect.y) *
                                             w_img.width() +
                                         rect.x];
      std::copy(src, src + rect.width, &crop.at(0, y, c));
    }
  PlanarImage out = resample(crop, target_w, target_h, Kernel::Bicubic);
  for (float& v : out.data()) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

// ---------------------------------------------------------------------------
// FAST

namespace {

constexpr std::array<std::array<int, 2>, 16> kRing = {{{0, -3},
                                                      {1, -3},
                                                      {2, -2},
                                                      {3, -1},
                                                      {3, 0},
                                                      {3, 1},
                                                      {2, 2},
                                                      {1, 3},
                                                      {0, 3},
                                                      {-1, 3},
                                                      {-2, 2},
                                                      {-3, 1},
                                                      {-3, 0},
                                                      {-3, -1},
                                                      {-2, -2},
                                                      {-1, -3}}};
constexpr int kArc = 9;

bool has_arc(const std::array<int, 16>& state, int sign) {
  int run = 0;
  for (int i = 0; i < 16 + kArc - 1; ++i) {
    if (state[i % 16] == sign) {
      if (++run >= kArc) return true;
    } else {
      run = 0;
    }
  }
  return false;
}

PlanarImage as_luma(const PlanarImage& img) {
  if (img.channels() == 1) return img;
  require(img.channels() == 3, ErrorKind::InvalidInput,
          "expected a 1- or 3-channel image");
  return rgb_to_yuv(img).first;
}

}  // namespace

std::vector<Keypoint> detect_fast(const PlanarImage& luma, double threshold,
                                  int border) {
  require(luma.channels() == 1, ErrorKind::InvalidInput,
          "FAST expects a single-channel image");
  const int w = luma.width(), h = luma.height();
  border = std::max(border, 3);
  if (w <= 2 * border || h <= 2 * border) return {};
  const float t = static_cast<float>(threshold);
  auto img = luma.plane(0);

  std::array<std::ptrdiff_t, 16> offs{};
  for (int i = 0; i < 16; ++i) offs[i] = kRing[i][1] * w + kRing[i][0];

  std::vector<float> score(luma.plane_size(), 0.0f);
#pragma omp parallel for schedule(static)
  for (int y = border; y < h - border; ++y) {
    for (int x = border; x < w - border; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const float c = img[p];
      const float hi = c + t, lo = c - t;
      int nb = 0, nd = 0;
      for (int k = 0; k < 16; k += 4) {
        const float v = img[p + offs[k]];
        nb += v > hi;
        nd += v < lo;
      }
      if (nb < 2 && nd < 2) continue;
      std::array<int, 16> state{};
      float sb = 0.0f, sd = 0.0f;
      for (int k = 0; k < 16; ++k) {
        const float v = img[p + offs[k]];
        if (v > hi) {
          state[k] = 1;
          sb += v - hi;
        } else if (v < lo) {
          state[k] = -1;
          sd += lo - v;
        }
      }
      if (has_arc(state, 1))
        score[p] = sb;
      else if (has_arc(state, -1))
        score[p] = sd;
    }
  }

  std::vector<Keypoint> kps;
  for (int y = border; y < h - border; ++y) {
    for (int x = border; x < w - border; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const float s = score[p];
      if (s <= 0.0f) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const std::ptrdiff_t q = static_cast<std::ptrdiff_t>(p) + dy * w + dx;
          const float sq = score[q];
          // Ties go to the earlier pixel in raster order.
          if (sq > s || (sq == s && q < static_cast<std::ptrdiff_t>(p))) {
            is_max = false;
            break;
          }
        }
      if (is_max) kps.push_back({x, y, s});
    }
  }
  return kps;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

constexpr int kThresholdHalvings = 3;

// Zero-mean, unit-norm patch; empty when the patch is flat.
std::vector<float> normalized_patch(const PlanarImage& img, int cx, int cy,
                                    int half) {
  const int n = 2 * half + 1;
  std::vector<float> p(static_cast<std::size_t>(n) * n);
  double mean = 0.0;
  std::size_t k = 0;
  for (int y = cy - half; y <= cy + half; ++y)
    for (int x = cx - half; x <= cx + half; ++x) {
      p[k] = img.at(x, y);
      mean += p[k++];
    }
  mean /= static_cast<double>(p.size());
  double ss = 0.0;
  for (float& v : p) {
    v = static_cast<float>(v - mean);
    ss += static_cast<double>(v) * v;
  }
  if (ss < 1e-10) return {};
  const float inv = static_cast<float>(1.0 / std::sqrt(ss));
  for (float& v : p) v *= inv;
  return p;
}

float dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return static_cast<float>(s);
}

std::vector<Keypoint> strongest_spread(std::vector<Keypoint> kps, int w, int h,
                                       int max_count) {
  if (static_cast<int>(kps.size()) <= max_count) return kps;
  constexpr int kGrid = 8;
  const int per_cell = std::max(1, max_count / (kGrid * kGrid));
  std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  std::vector<int> used(kGrid * kGrid, 0);
  std::vector<Keypoint> out;
  for (const Keypoint& k : kps) {
    const int cell = std::min(k.y * kGrid / h, kGrid - 1) * kGrid +
                     std::min(k.x * kGrid / w, kGrid - 1);
    if (used[cell] >= per_cell) continue;
    ++used[cell];
    out.push_back(k);
  }
  return out;
}

double parabola_peak(float minus, float center, float plus) {
  const double denom = minus - 2.0 * center + plus;
  if (denom >= -1e-12) return 0.0;
  return std::clamp(0.5 * (minus - plus) / denom, -0.5, 0.5);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TranslationEstimate estimate_translation(const PlanarImage& src_in,
                                         const PlanarImage& ref_in,
                                         const TranslationParams& params) {
  require(src_in.same_size(ref_in), ErrorKind::DimensionMismatch,
          "estimate_translation: image sizes differ");
  const PlanarImage src = as_luma(src_in);
  const PlanarImage ref = as_luma(ref_in);
  const int w = src.width(), h = src.height();
  const int half = std::max(1, params.patch_size / 2);
  // One extra pixel so sub-pixel refinement can probe +-1 around a match.
  const int border = half + 1 + 3;

  auto prepare = [&](const PlanarImage& img) {
    // Upsampled W crops are smooth; relax the threshold until corners show up.
    const std::size_t wanted = static_cast<std::size_t>(8 * params.min_matches);
    double threshold = params.fast_threshold;
    auto found = detect_fast(img, threshold, border);
    for (int i = 0; i < kThresholdHalvings && found.size() < wanted; ++i) {
      threshold *= 0.5;
      found = detect_fast(img, threshold, border);
    }
    auto kps = strongest_spread(std::move(found), w, h, params.max_keypoints);
    std::vector<Keypoint> kept;
    std::vector<std::vector<float>> desc;
    for (const Keypoint& k : kps) {
      auto d = normalized_patch(img, k.x, k.y, half);
      if (d.empty()) continue;
      kept.push_back(k);
      desc.push_back(std::move(d));
    }
    return std::pair{std::move(kept), std::move(desc)};
  };
  const auto [skp, sdesc] = prepare(src);
  const auto [rkp, rdesc] = prepare(ref);

  const double radius = params.search_radius;
  const std::size_t ns = skp.size(), nr = rkp.size();
  std::vector<int> best_for_src(ns, -1), best_for_ref(nr, -1);
  std::vector<float> best_src_score(ns, -2.0f), best_ref_score(nr, -2.0f);
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      if (std::abs(rkp[j].x - skp[i].x) > radius ||
          std::abs(rkp[j].y - skp[i].y) > radius)
        continue;
      const float s = dot(sdesc[i], rdesc[j]);
      if (s > best_src_score[i]) {
        best_src_score[i] = s;
        best_for_src[i] = static_cast<int>(j);
      }
      if (s > best_ref_score[j]) {
        best_ref_score[j] = s;
        best_for_ref[j] = static_cast<int>(i);
      }
    }
  }

  std::vector<double> dxs, dys;
  for (std::size_t i = 0; i < ns; ++i) {
    const int j = best_for_src[i];
    if (j < 0 || best_for_ref[j] != static_cast<int>(i)) continue;
    if (best_src_score[i] < params.min_ncc) continue;
    const Keypoint& a = skp[i];
    const Keypoint& b = rkp[j];
    auto ncc_at = [&](int x, int y) {
      auto d = normalized_patch(ref, x, y, half);
      return d.empty() ? -1.0f : dot(sdesc[i], d);
    };
    const float c0 = best_src_score[i];
    const double ox = parabola_peak(ncc_at(b.x - 1, b.y), c0, ncc_at(b.x + 1, b.y));
    const double oy = parabola_peak(ncc_at(b.x, b.y - 1), c0, ncc_at(b.x, b.y + 1));
    dxs.push_back(b.x + ox - a.x);
    dys.push_back(b.y + oy - a.y);
  }

  TranslationEstimate est;
  est.matches = static_cast<int>(dxs.size());
  if (est.matches < params.min_matches) {
    est.low_confidence = true;
    return est;
  }
  est.translation = {median(dxs), median(dys)};
  return est;
}

// ---------------------------------------------------------------------------

PlanarImage match_color(const PlanarImage& ref, const PlanarImage& src) {
  require(ref.channels() == 3 && src.channels() == 3, ErrorKind::InvalidInput,
          "match_color expects 3-channel images");
  constexpr double kEps = 1e-6;
  PlanarImage out(ref.width(), ref.height(), 3);
  auto stats = [](std::span<const float> p) {
    // Sums are taken around the first sample so a constant plane has exactly
    // zero variance; four accumulators in a fixed order keep it reproducible.
    const double pivot = p[0];
    double s[4] = {0, 0, 0, 0}, q[4] = {0, 0, 0, 0};
    const std::size_t n4 = p.size() / 4 * 4;
    for (std::size_t i = 0; i < n4; i += 4)
      for (int k = 0; k < 4; ++k) {
        const double d = p[i + k] - pivot;
        s[k] += d;
        q[k] += d * d;
      }
    for (std::size_t i = n4; i < p.size(); ++i) {
      const double d = p[i] - pivot;
      s[0] += d;
      q[0] += d * d;
    }
    const double n = static_cast<double>(p.size());
    const double m = ((s[0] + s[1]) + (s[2] + s[3])) / n;
    const double var = ((q[0] + q[1]) + (q[2] + q[3])) / n - m * m;
    return std::pair{pivot + m, std::sqrt(std::max(var, 0.0))};
  };
  for (int c = 0; c < 3; ++c) {
    const auto [rm, rs] = stats(ref.plane(c));
    const auto [sm, ss] = stats(src.plane(c));
    auto in = ref.plane(c);
    auto o = out.plane(c);
    const auto n = static_cast<std::ptrdiff_t>(in.size());
    const float g = static_cast<float>(ss / std::max(rs, kEps));
    const float rmf = static_cast<float>(rm), smf = static_cast<float>(sm);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      o[i] = std::clamp((in[i] - rmf) * g + smf, 0.0f, 1.0f);
  }
  return out;
}

}  // namespace hz
