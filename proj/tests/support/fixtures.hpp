#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "hybridzoom/image.hpp"
#include "hybridzoom/rig_sim.hpp"

namespace fixtures {

// Two views of one texture: src(x) = ref(x + (dx, dy)). The texture is
// rendered 4x finer and box-averaged, so shifts are exact in quarter pixels.
inline std::pair<hz::PlanarImage, hz::PlanarImage> shifted_pair(
    int w, int h, double dx, double dy, std::uint64_t seed) {
  constexpr int kUp = 4;
  const int kMargin =
      12 + static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy))));
  const hz::PlanarImage fine = hz::procedural_texture(
      (w + 2 * kMargin) * kUp, (h + 2 * kMargin) * kUp, seed, 3.0 * kUp);
  auto view = [&](double ox, double oy) {
    const int fx0 = static_cast<int>(std::lround((kMargin + ox) * kUp));
    const int fy0 = static_cast<int>(std::lround((kMargin + oy) * kUp));
    hz::PlanarImage out(w, h, 1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int j = 0; j < kUp; ++j)
          for (int i = 0; i < kUp; ++i)
            s += fine.at(fx0 + x * kUp + i, fy0 + y * kUp + j);
        out.at(x, y) = static_cast<float>(s / (kUp * kUp));
      }
    return out;
  };
  return {view(0.0, 0.0), view(-dx, -dy)};
}

// Smooth-ish random flow: a random constant plus bounded per-pixel noise.
inline hz::FlowField random_flow(int w, int h, std::mt19937_64& rng,
                                 double base, double noise) {
  std::uniform_real_distribution<double> ub(-base, base), un(-noise, noise);
  hz::FlowField f(w, h, static_cast<float>(ub(rng)), static_cast<float>(ub(rng)));
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    f.u[i] += static_cast<float>(un(rng));
    f.v[i] += static_cast<float>(un(rng));
  }
  std::uniform_real_distribution<double> ul(-9.21, 9.21);
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    f.logvar_x[i] = static_cast<float>(ul(rng));
    f.logvar_y[i] = static_cast<float>(ul(rng));
  }
  return f;
}

inline hz::PlanarImage random_image(int w, int h, int channels,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  hz::PlanarImage img(w, h, channels);
  for (float& v : img.data()) v = u(rng);
  return img;
}

// Copy of a mask's samples; safe to iterate when the mask is a temporary.
inline std::vector<float> values(const hz::Mask& m) { return m.data(); }

inline double max_abs_diff(const std::vector<float>& a,
                           const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

inline double max_abs_diff(const hz::PlanarImage& a, const hz::PlanarImage& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
  return m;
}

}  // namespace fixtures
