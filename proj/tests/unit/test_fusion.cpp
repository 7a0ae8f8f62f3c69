#include <cmath>
#include <random>

#include "doctest.h"
#include "hybridzoom/coarse_align.hpp"
#include "hybridzoom/fusion.hpp"
#include "hybridzoom/rig_sim.hpp"
#include "support/fixtures.hpp"

using namespace hz;

namespace {

double mean(const PlanarImage& img) {
  double s = 0.0;
  for (float v : img.data()) s += v;
  return s / img.data().size();
}

PlanarImage interior(const PlanarImage& img, int margin) {
  PlanarImage out(img.width() - 2 * margin, img.height() - 2 * margin, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) out.at(x, y, c) = img.at(x + margin, y + margin, c);
  return out;
}

}  // namespace

TEST_CASE("band_inject is the identity on band-limited input") {
  const auto [tex, unused] = fixtures::shifted_pair(192, 128, 0.0, 0.0, 3);
  const PlanarImage smooth = gaussian_blur(tex, 20.0);
  FusionInput in{smooth, smooth, Mask(192, 128, 0.0f), 4.0};
  // Within two downsampled pixels of the frame the edge-clamped bilinear
  // reconstruction adds a slope-proportional error, so compare inside.
  const int margin = 8;
  CHECK(fixtures::max_abs_diff(interior(fuse_luma(in), margin), interior(smooth, margin)) <= 1e-3);
}

TEST_CASE("full occlusion returns the source exactly") {
  const auto [a, b] = fixtures::shifted_pair(64, 48, 2.0, 1.0, 4);
  FusionInput in{a, b, Mask(64, 48, 1.0f), 4.0};
  CHECK(fixtures::max_abs_diff(fuse_luma(in), a) == 0.0);
}

TEST_CASE("more occlusion moves the result toward the source") {
  const auto [a, b] = fixtures::shifted_pair(64, 48, 0.0, 0.0, 5);
  std::mt19937_64 rng(5);
  Mask lo(64, 48), hi(64, 48);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo.data()[i] = u(rng);
    hi.data()[i] = std::min(1.0f, lo.data()[i] + u(rng));
  }
  const PlanarImage f_lo = fuse_luma({a, b, lo, 4.0});
  const PlanarImage f_hi = fuse_luma({a, b, hi, 4.0});
  for (std::size_t i = 0; i < lo.size(); ++i)
    CHECK(std::abs(f_hi.data()[i] - a.data()[i]) <= std::abs(f_lo.data()[i] - a.data()[i]) + 1e-7);
}

TEST_CASE("fusion validates its input") {
  const PlanarImage a(16, 16, 1, 0.5f);
  CHECK_THROWS_AS(fuse_luma({a, PlanarImage(15, 16, 1), Mask(16, 16), 4.0}), Error);
  CHECK_THROWS_AS(fuse_luma({a, a, Mask(16, 15), 4.0}), Error);
  try {
    fusion_operator("unet");
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  CHECK(fusion_operator_keys() == std::vector<std::string>{"band_inject"});
}

TEST_CASE("a custom operator plugs in") {
  const PlanarImage a(8, 8, 1, 0.25f), b(8, 8, 1, 0.75f);
  const FusionOperator take_ref = [](const FusionInput& in) { return in.y_ref_warped; };
  CHECK(fixtures::max_abs_diff(fuse_luma({a, b, Mask(8, 8), 2.0}, take_ref), b) == 0.0);
  const FusionOperator wrong = [](const FusionInput&) { return PlanarImage(4, 4, 1); };
  CHECK_THROWS_AS(fuse_luma({a, b, Mask(8, 8), 2.0}, wrong), Error);
}

TEST_CASE("recombine round trip and gray chroma") {
  std::mt19937_64 rng(7);
  const PlanarImage img = fixtures::random_image(16, 12, 3, rng);
  auto [y, c] = rgb_to_yuv(img);
  CHECK(fixtures::max_abs_diff(recombine(y, c), img) <= 1e-6);

  const PlanarImage luma = fixtures::random_image(16, 12, 1, rng);
  const PlanarImage out = recombine(luma, PlanarImage(16, 12, 2, 0.5f));
  for (int yy = 0; yy < 12; ++yy)
    for (int x = 0; x < 16; ++x) {
      CHECK(out.at(x, yy, 0) == doctest::Approx(out.at(x, yy, 1)).epsilon(1e-6));
      CHECK(out.at(x, yy, 1) == doctest::Approx(out.at(x, yy, 2)).epsilon(1e-6));
    }
  CHECK_THROWS_AS(recombine(luma, PlanarImage(15, 12, 2)), Error);
}

TEST_CASE("recombine carries the source chroma for any luma") {
  std::mt19937_64 rng(8);
  const PlanarImage src = fixtures::random_image(32, 24, 3, rng);
  const PlanarImage chroma = rgb_to_yuv(src).second;
  const PlanarImage luma = fixtures::random_image(32, 24, 1, rng);
  const PlanarImage out = recombine(luma, chroma);
  CHECK(fixtures::max_abs_diff(rgb_to_yuv(out).second, chroma) <= 1e-6);
  for (float v : out.data()) CHECK((v >= 0.0f && v <= 1.0f));
}

TEST_CASE("fusion on an aligned in-focus rig-sim pair") {
  RigScene scene = two_layer_scene(0.0, 0.0);
  scene.layers.resize(1);
  scene.focus_layer = 0;
  scene.color_gain = {1.0, 1.0, 1.0};
  const SyntheticPair p = synthesize_pair(scene);
  const int w = p.tele.width(), h = p.tele.height();
  const PlanarImage src = crop_and_resample_source(p.wide, p.meta, w, h);
  const PlanarImage y_src = rgb_to_luma(src);
  const PlanarImage y_ref = rgb_to_luma(match_color(p.tele, src));
  const PlanarImage y_fused = fuse_luma({y_src, y_ref, Mask(w, h), scene.focal_ratio});
  const PlanarImage y_gt = rgb_to_luma(p.labels.gt_image);
  const double gain = psnr(interior(y_fused, 16), interior(y_gt, 16)) -
                      psnr(interior(y_src, 16), interior(y_gt, 16));
  CAPTURE(gain);
  CHECK(gain > 0.0);
  CHECK(std::abs(mean(y_fused) - mean(y_src)) <= 0.01);
}
