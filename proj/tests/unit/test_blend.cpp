#include <cmath>
#include <random>

#include "doctest.h"
#include "hybridzoom/blend.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace hz;

namespace {

Mask random_mask(int w, int h, std::mt19937_64& rng, float hi = 1.0f) {
  std::uniform_real_distribution<float> u(0.0f, hi);
  Mask m(w, h);
  for (float& v : m.data()) v = u(rng);
  return m;
}

}  // namespace

TEST_CASE("blend_mask formula") {
  BlendStack zero{Mask(4, 4), Mask(4, 4), Mask(4, 4), Mask(4, 4)};
  for (float v : fixtures::values(blend_mask(zero, 4, 4))) CHECK(v == 1.0f);

  BlendStack s{Mask(1, 1, 0.2f), Mask(1, 1, 0.1f), Mask(1, 1, 0.1f), Mask(1, 1, 0.3f)};
  CHECK(blend_mask(s, 1, 1).at(0, 0) == doctest::Approx(0.3).epsilon(1e-6));

  BlendStack c{Mask(1, 1, 0.6f), Mask(1, 1, 0.6f), Mask(1, 1), Mask(1, 1)};
  CHECK(blend_mask(c, 1, 1).at(0, 0) == 0.0f);
}

TEST_CASE("blend_mask upsamples each mask before combining") {
  std::mt19937_64 rng(1);
  BlendStack s{random_mask(40, 30, rng, 0.4f), random_mask(10, 8, rng, 0.4f),
               random_mask(10, 8, rng, 0.4f), random_mask(5, 4, rng, 0.4f)};
  const Mask m = blend_mask(s, 40, 30);
  const Mask d = upsample_mask(s.defocus, 40, 30);
  const Mask f = upsample_mask(s.flow_uncertainty, 40, 30);
  const Mask r = upsample_mask(s.rejection, 40, 30);
  double worst = 0.0;
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) {
      const double want = oracle::blend(s.occlusion.at(x, y), d.at(x, y), f.at(x, y), r.at(x, y));
      worst = std::max(worst, std::abs(m.at(x, y) - want));
    }
  CHECK(worst <= 1e-6);
  for (float v : m.data()) CHECK((v >= 0.0f && v <= 1.0f));
}

TEST_CASE("blend_mask is zero wherever one mask saturates") {
  std::mt19937_64 rng(2);
  BlendStack s{random_mask(20, 20, rng), Mask(20, 20), Mask(20, 20), Mask(20, 20)};
  s.occlusion.at(3, 4) = 1.0f;
  s.occlusion.at(17, 11) = 1.0f;
  const Mask m = blend_mask(s, 20, 20);
  CHECK(m.at(3, 4) == 0.0f);
  CHECK(m.at(17, 11) == 0.0f);
}

TEST_CASE("upsample_mask is bilinear and identity at the same size") {
  std::mt19937_64 rng(3);
  const Mask m = random_mask(7, 5, rng);
  CHECK(upsample_mask(m, 7, 5).data() == m.data());
  const Mask up = upsample_mask(Mask(3, 3, 0.25f), 12, 9);
  for (float v : up.data()) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("feather profile") {
  constexpr double sigma = 4.0;
  CHECK(feather_profile(0.0, sigma) == doctest::Approx(0.0));
  CHECK(feather_profile(3 * sigma, sigma) >= 0.99);
  CHECK(feather_profile(100.0, sigma) == 1.0);
  double prev = -1.0;
  for (double d = 0.0; d <= 3 * sigma; d += 0.5) {
    const double f = feather_profile(d, sigma);
    CHECK(f >= prev);
    prev = f;
  }
  CHECK(default_boundary_sigma(4032, 3024) == doctest::Approx(30.24));
}

TEST_CASE("smooth_boundary") {
  std::mt19937_64 rng(4);
  const Mask m = random_mask(30, 20, rng);
  CHECK(smooth_boundary(m, {0, 0, 30, 20}, 0.0).data() == m.data());

  const Mask ones(60, 40, 1.0f);
  const Rect rect{0, 0, 60, 40};
  const Mask s = smooth_boundary(ones, rect, 2.0);
  CHECK(s.at(0, 20) == doctest::Approx(0.0));
  CHECK(s.at(30, 0) == doctest::Approx(0.0));
  CHECK(s.at(30, 20) == 1.0f);
  for (int x = 1; x < 30; ++x) CHECK(s.at(x, 20) >= s.at(x - 1, 20));
  CHECK(s.at(6, 20) >= 0.99f);

  const Mask inner = smooth_boundary(ones, {10, 10, 20, 10}, 1.0);
  CHECK(inner.at(5, 5) == 0.0f);
  CHECK(inner.at(20, 15) == 1.0f);
}

TEST_CASE("alpha_blend is a per-pixel convex combination") {
  std::mt19937_64 rng(5);
  const PlanarImage f = fixtures::random_image(16, 12, 3, rng);
  const PlanarImage s = fixtures::random_image(16, 12, 3, rng);
  const Mask m = random_mask(16, 12, rng);
  const PlanarImage out = alpha_blend(f, s, m);
  Mask more = m;
  for (float& v : more.data()) v = std::min(1.0f, v + 0.2f);
  const PlanarImage out2 = alpha_blend(f, s, more);
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    const float a = f.data()[i], b = s.data()[i], o = out.data()[i];
    CHECK(o >= std::min(a, b) - 1e-7f);
    CHECK(o <= std::max(a, b) + 1e-7f);
    CHECK(std::abs(out2.data()[i] - a) <= std::abs(o - a) + 1e-7f);
  }
  CHECK_THROWS_AS(alpha_blend(f, s, Mask(15, 12)), Error);
}

TEST_CASE("alpha_blend_uncrop fallbacks and exact outside pixels") {
  std::mt19937_64 rng(6);
  const PlanarImage full_w = fixtures::random_image(80, 60, 3, rng);
  CameraMeta meta;
  meta.focal_ratio = 4.0;
  meta.tele_fov_rect = {20, 15, 40, 30};
  const PlanarImage src = crop_and_resample_source(full_w, meta, 160, 120);
  const PlanarImage fusion = fixtures::random_image(160, 120, 3, rng);

  const PlanarImage none = alpha_blend_uncrop(fusion, src, Mask(160, 120, 0.0f), full_w, meta);
  CHECK(fixtures::max_abs_diff(none, full_w) <= 1e-6);

  const PlanarImage same = alpha_blend_uncrop(src, src, Mask(160, 120, 1.0f), full_w, meta);
  CHECK(fixtures::max_abs_diff(same, full_w) <= 1e-3);

  const PlanarImage mixed = alpha_blend_uncrop(fusion, src, random_mask(160, 120, rng), full_w, meta);
  const Rect& r = meta.tele_fov_rect;
  bool exact = true;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 60; ++y)
      for (int x = 0; x < 80; ++x) {
        const bool in = x >= r.x && x < r.x + r.width && y >= r.y && y < r.y + r.height;
        if (!in && mixed.at(x, y, c) != full_w.at(x, y, c)) exact = false;
      }
  CHECK(exact);
  CHECK(fixtures::max_abs_diff(mixed, full_w) > 0.01);

  CameraMeta bad = meta;
  bad.tele_fov_rect = {60, 50, 40, 30};
  CHECK_THROWS_AS(uncrop(src, src, full_w, bad), Error);
}
