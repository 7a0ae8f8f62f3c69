#include <cmath>
#include <random>

#include "doctest.h"
#include "hybridzoom/image.hpp"
#include "support/fixtures.hpp"

using namespace hz;

namespace {

PlanarImage constant(int w, int h, int c, float v) { return PlanarImage(w, h, c, v); }

PlanarImage ramp(int w, int h, float slope) {
  PlanarImage img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = 0.1f + slope * x;
  return img;
}

double max_dev(const PlanarImage& img, float v) {
  double m = 0.0;
  for (float s : img.data()) m = std::max(m, std::abs(static_cast<double>(s) - v));
  return m;
}

}  // namespace

TEST_CASE("rgb_to_yuv on gray and red") {
  PlanarImage gray = constant(2, 2, 3, 0.5f);
  auto [y, c] = rgb_to_yuv(gray);
  CHECK(y.channels() == 1);
  CHECK(c.channels() == 2);
  CHECK(max_dev(y, 0.5f) < 1e-7);
  CHECK(max_dev(c, 0.5f) < 1e-7);

  PlanarImage red(1, 1, 3);
  red.at(0, 0, 0) = 1.0f;
  CHECK(rgb_to_yuv(red).first.at(0, 0) == doctest::Approx(0.299).epsilon(1e-7));
}

TEST_CASE("rgb_to_yuv rejects wrong channel count") {
  CHECK_THROWS_AS(rgb_to_yuv(PlanarImage(4, 4, 1)), Error);
  try {
    rgb_to_yuv(PlanarImage(4, 4, 2));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
}

TEST_CASE("rgb_to_luma matches the luma of rgb_to_yuv") {
  std::mt19937_64 rng(3);
  const PlanarImage img = fixtures::random_image(17, 9, 3, rng);
  const PlanarImage a = rgb_to_luma(img);
  const PlanarImage b = rgb_to_yuv(img).first;
  CHECK(fixtures::max_abs_diff(a, b) == 0.0);
}

TEST_CASE("yuv round trips") {
  std::mt19937_64 rng(11);
  const PlanarImage img = fixtures::random_image(8, 8, 3, rng);
  auto [y, c] = rgb_to_yuv(img);
  CHECK(fixtures::max_abs_diff(yuv_to_rgb(y, c), img) <= 1e-6);

  PlanarImage blue(1, 1, 3);
  blue.at(0, 0, 2) = 1.0f;
  auto [by, bc] = rgb_to_yuv(blue);
  const PlanarImage back = yuv_to_rgb(by, bc);
  CHECK(std::abs(back.at(0, 0, 0)) <= 1e-6);
  CHECK(std::abs(back.at(0, 0, 1)) <= 1e-6);
  CHECK(std::abs(back.at(0, 0, 2) - 1.0) <= 1e-6);

  PlanarImage l = constant(3, 3, 1, 0.5f), neutral = constant(3, 3, 2, 0.5f);
  CHECK(max_dev(yuv_to_rgb(l, neutral), 0.5f) < 1e-7);
  CHECK_THROWS_AS(yuv_to_rgb(l, constant(2, 3, 2, 0.5f)), Error);
}

TEST_CASE("resample preserves constants") {
  const PlanarImage c = constant(37, 23, 2, 0.3f);
  for (Kernel k : {Kernel::Bilinear, Kernel::Bicubic})
    for (auto [w, h] : {std::pair{100, 61}, std::pair{9, 5}, std::pair{37, 23},
                        std::pair{1, 1}, std::pair{200, 7}}) {
      const PlanarImage r = resample(c, w, h, k);
      CHECK(r.width() == w);
      CHECK(r.height() == h);
      CHECK(r.channels() == 2);
      CHECK(max_dev(r, 0.3f) <= 1e-6);
    }
  CHECK_THROWS_AS(resample(c, 0, 5, Kernel::Bilinear), Error);
}

TEST_CASE("bilinear 2x upsample of a two-pixel ramp") {
  PlanarImage img(2, 1, 1);
  img.at(1, 0) = 1.0f;
  const PlanarImage up = resample(img, 4, 1, Kernel::Bilinear);
  // Pixel centers of the output sit at -0.25, 0.25, 0.75, 1.25 input pixels.
  CHECK(up.at(0, 0) == doctest::Approx(0.0));
  CHECK(up.at(1, 0) == doctest::Approx(0.25));
  CHECK(up.at(2, 0) == doctest::Approx(0.75));
  CHECK(up.at(3, 0) == doctest::Approx(1.0));
  CHECK(0.5 * (up.at(1, 0) + up.at(2, 0)) == doctest::Approx(0.5));
}

TEST_CASE("bicubic down-up loses checkerboard energy") {
  PlanarImage cb(32, 32, 1);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) cb.at(x, y) = ((x + y) % 2) ? 1.0f : 0.0f;
  const PlanarImage back =
      resample(resample(cb, 16, 16, Kernel::Bicubic), 32, 32, Kernel::Bicubic);
  double l2 = 0.0;
  for (std::size_t i = 0; i < cb.data().size(); ++i)
    l2 += std::pow(cb.data()[i] - back.data()[i], 2);
  CHECK(l2 > 0.0);
}

TEST_CASE("resample keeps signed values signed") {
  PlanarImage img = constant(8, 8, 1, -0.25f);
  CHECK(max_dev(resample(img, 3, 5, Kernel::Bicubic), -0.25f) <= 1e-6);
}

TEST_CASE("gaussian_blur basics") {
  std::mt19937_64 rng(5);
  const PlanarImage img = fixtures::random_image(20, 13, 3, rng);
  CHECK(fixtures::max_abs_diff(gaussian_blur(img, 0.0), img) == 0.0);
  CHECK(max_dev(gaussian_blur(constant(30, 20, 1, 0.7f), 4.0), 0.7f) <= 1e-6);
  CHECK_THROWS_AS(gaussian_blur(img, -1.0), Error);
}

TEST_CASE("gaussian_blur impulse gives the normalized kernel peak") {
  constexpr double sigma = 10.0;
  PlanarImage impulse(101, 1, 1);
  impulse.at(50, 0) = 1.0f;
  double sum = 0.0;
  for (int k = -30; k <= 30; ++k) sum += std::exp(-k * k / (2 * sigma * sigma));
  const PlanarImage out = gaussian_blur(impulse, sigma);
  CHECK(out.at(50, 0) == doctest::Approx(1.0 / sum).epsilon(1e-5));
  CHECK(out.at(50 + 31, 0) == 0.0f);
  CHECK(out.at(50 + 30, 0) > 0.0f);
}

TEST_CASE("bilinear_warp with zero flow is the identity") {
  std::mt19937_64 rng(9);
  const PlanarImage img = fixtures::random_image(15, 11, 3, rng);
  auto [warped, valid] = bilinear_warp(img, FlowField(15, 11));
  CHECK(fixtures::max_abs_diff(warped, img) == 0.0);
  for (float v : valid.data()) CHECK(v == 1.0f);
}

TEST_CASE("bilinear_warp shifts a ramp") {
  const PlanarImage img = ramp(16, 4, 0.1f);
  {
    auto [warped, valid] = bilinear_warp(img, FlowField(16, 4, 1.0f, 0.0f));
    for (int x = 0; x < 15; ++x) {
      CHECK(warped.at(x, 2) == doctest::Approx(img.at(x + 1, 2)));
      CHECK(valid.at(x, 2) == 1.0f);
    }
    CHECK(valid.at(15, 2) == 0.0f);
    CHECK(warped.at(15, 2) == img.at(15, 2));  // edge clamped
  }
  {
    auto [warped, valid] = bilinear_warp(img, FlowField(16, 4, 0.5f, 0.0f));
    for (int x = 0; x < 15; ++x)
      CHECK(warped.at(x, 1) - img.at(x, 1) == doctest::Approx(0.05).epsilon(1e-4));
  }
  CHECK_THROWS_AS(bilinear_warp(img, FlowField(15, 4)), Error);
}

TEST_CASE("bilinear_warp_upsampled equals warp by the resized flow") {
  std::mt19937_64 rng(21);
  const PlanarImage img = fixtures::random_image(48, 36, 1, rng);
  const FlowField low = fixtures::random_flow(12, 9, rng, 3.0, 1.0);
  auto [a, va] = bilinear_warp_upsampled(img, low);
  auto [b, vb] = bilinear_warp(img, resize_flow(low, 48, 36));
  CHECK(fixtures::max_abs_diff(a, b) <= 1e-6);
  CHECK(va.data() == vb.data());
}

TEST_CASE("build_pyramid sizes and constants") {
  const PlanarImage img = constant(64, 64, 1, 0.4f);
  CHECK(build_pyramid(img, 1, 0.5).size() == 1);
  const auto pyr = build_pyramid(img, 3, 0.5);
  REQUIRE(pyr.size() == 3);
  CHECK(pyr[0].width() == 64);
  CHECK(pyr[1].width() == 32);
  CHECK(pyr[2].width() == 16);
  CHECK(pyr[2].height() == 16);
  for (const auto& level : pyr) CHECK(max_dev(level, 0.4f) <= 1e-6);
  // 64 -> 32 -> 16 -> 8 -> (4 is too small)
  CHECK(build_pyramid(img, 10, 0.5).size() == 4);
  CHECK_THROWS_AS(build_pyramid(img, 0, 0.5), Error);
  CHECK_THROWS_AS(build_pyramid(img, 2, 1.0), Error);
}

TEST_CASE("downup") {
  const PlanarImage c = constant(40, 30, 1, 0.6f);
  CHECK(max_dev(downup(c, 4.0), 0.6f) <= 1e-6);
  std::mt19937_64 rng(2);
  const PlanarImage img = fixtures::random_image(40, 30, 1, rng);
  CHECK(fixtures::max_abs_diff(downup(img, 1.0), img) == 0.0);
  const PlanarImage lp = downup(img, 4.0);
  CHECK(lp.same_size(img));
  CHECK(fixtures::max_abs_diff(lp, img) > 0.05);
}

TEST_CASE("resize_flow scales displacement and variance") {
  FlowField f(10, 8, 2.0f, -1.0f);
  std::fill(f.logvar_x.begin(), f.logvar_x.end(), 0.0f);
  const FlowField g = resize_flow(f, 20, 16);
  CHECK(g.width == 20);
  CHECK(g.height == 16);
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    CHECK(g.u[i] == doctest::Approx(4.0));
    CHECK(g.v[i] == doctest::Approx(-2.0));
    CHECK(g.logvar_x[i] == doctest::Approx(std::log(4.0)));
  }
}

TEST_CASE("Mask::from_image clamps into [0,1]") {
  PlanarImage img(3, 1, 1);
  img.at(0, 0) = -0.5f;
  img.at(1, 0) = 0.25f;
  img.at(2, 0) = 7.0f;
  const Mask m = Mask::from_image(img);
  CHECK(m.at(0, 0) == 0.0f);
  CHECK(m.at(1, 0) == 0.25f);
  CHECK(m.at(2, 0) == 1.0f);
  CHECK_THROWS_AS(Mask::from_image(PlanarImage(3, 1, 2)), Error);
}

TEST_CASE("output dimensions follow the parameters") {
  const PlanarImage img(31, 17, 3, 0.2f);
  CHECK(gaussian_blur(img, 2.0).same_size(img));
  CHECK(gaussian_blur(img, 2.0).channels() == 3);
  const PlanarImage r = resample(img, 5, 40, Kernel::Bicubic);
  CHECK(r.width() == 5);
  CHECK(r.height() == 40);
  CHECK(downup(img, 3.3).same_size(img));
}
