#include <doctest.h>

#include <cmath>

#include "glyphforge/augment.hpp"
#include "glyphforge/imgproc.hpp"
#include "oracles.hpp"

using namespace glyphforge;
using namespace glyphforge::augment;

namespace {

bool all_in_range(const Tensor& t, float lo, float hi) {
  for (float v : t.data())
    if (!(v >= lo && v <= hi)) return false;
  return true;
}

}  // namespace

TEST_CASE("rotate") {
  std::mt19937 gen(11);
  const ImageU8 img = oracle::random_image(21, 21, 3, gen);
  CHECK(rotate(img, 0.0) == img);

  const ImageU8 flat(31, 31, 1, 140);
  for (double deg : {7.0, -33.0, 90.0, 151.5}) {
    const ImageU8 r = rotate(flat, deg);
    CHECK(r.width() == 31);
    CHECK(r.height() == 31);
    CHECK(r.at(15, 15) == 140);
    for (std::uint8_t p : r.pixels()) CHECK((p == 140 || p < 140));
  }

  const ImageU8 gray = oracle::random_image(25, 25, 1, gen);
  const ImageU8 back = rotate(rotate(gray, 90.0), -90.0);
  int worst = 0;
  for (std::size_t y = 2; y < 23; ++y)
    for (std::size_t x = 2; x < 23; ++x) worst = std::max(worst, std::abs(int(back.at(x, y)) - int(gray.at(x, y))));
  CHECK(worst <= 2);
}

TEST_CASE("rotation direction is counterclockwise as displayed") {
  ImageU8 img(21, 21, 1, 0);
  img.at(18, 10) = 255;  // right of center
  const ImageU8 r = rotate(img, 90.0);
  CHECK(r.at(10, 2) == 255);  // now above center
}

TEST_CASE("random rotation") {
  std::mt19937 gen(12);
  const ImageU8 img = oracle::random_image(16, 16, 1, gen);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) CHECK(random_rotation({0.0f}, img, rng) == img);

  Rng a(9), b(9);
  for (int i = 0; i < 5; ++i) CHECK(random_rotation({15.0f}, img, a) == random_rotation({15.0f}, img, b));

  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    const float theta = rng_uniform(r, -15.0f, 15.0f);
    REQUIRE(theta >= -15.0f);
    REQUIRE(theta <= 15.0f);
  }
}

TEST_CASE("random scale crop") {
  std::mt19937 gen(13);
  const ImageU8 img = oracle::random_image(40, 40, 3, gen);
  Rng rng(1);
  CHECK(random_scale_crop({1.0f, 1.0f, 40}, img, rng) == img);
  CHECK(random_scale_crop({1.0f, 1.0f, 20}, img, rng) == imgproc::resize_bilinear(img, 20, 20));
  const ImageU8 flat(50, 50, 3, 99);
  for (int i = 0; i < 10; ++i) CHECK(random_scale_crop({0.5f, 0.9f, 32}, flat, rng) == ImageU8(32, 32, 3, 99));

  // A window of side 50 on a 100x100 image: the output at target 50 must be
  // a verbatim sub-block at some offset in [0, 50].
  const ImageU8 big = oracle::random_image(100, 100, 1, gen);
  const ImageU8 win = random_scale_crop({0.5f, 0.5f, 50}, big, rng);
  bool found = false;
  for (std::size_t oy = 0; oy <= 50 && !found; ++oy)
    for (std::size_t ox = 0; ox <= 50 && !found; ++ox)
      if (imgproc::crop(big, {int(ox), int(oy), 50, 50}, 0) == win) found = true;
  CHECK(found);

  CHECK_THROWS_AS(random_scale_crop({0.5f, 0.9f, 0}, img, rng), ConfigError);
  CHECK_THROWS_AS(AugmentPipeline({RandomScaleCrop{0.0f, 0.5f, 8}, Normalize{}}, 1), ConfigError);
  CHECK_THROWS_AS(AugmentPipeline({RandomScaleCrop{0.9f, 0.5f, 8}, Normalize{}}, 1), ConfigError);
}

TEST_CASE("random effect") {
  std::mt19937 gen(14);
  const ImageU8 img = oracle::random_image(12, 12, 3, gen);
  Rng rng(2);
  CHECK(random_effect({0.0f, 0.0f, 3}, img, rng) == img);
  const ImageU8 gray3 = imgproc::gray_to_rgb(imgproc::to_grayscale(img));
  CHECK(random_effect({0.0f, 1.0f, 3}, gray3, rng) == gray3);
  CHECK(random_effect({1.0f, 0.0f, 5}, img, rng) == imgproc::gaussian_blur(img, 5));
  const ImageU8 both = random_effect({1.0f, 1.0f, 3}, img, rng);
  CHECK(both == imgproc::gray_to_rgb(imgproc::to_grayscale(imgproc::gaussian_blur(img, 3))));
  CHECK_THROWS_AS(AugmentPipeline({RandomEffect{1.5f, 0.0f, 3}, Normalize{}}, 1), ConfigError);
}

TEST_CASE("to_tensor_normalize") {
  const ImageU8 img(2, 1, 1, {255, 0});
  const float half = 0.5f;
  const Tensor t = to_tensor_normalize(img, {&half, 1}, {&half, 1});
  CHECK(t(0, 0, 0) == 1.0f);
  CHECK(t(0, 0, 1) == -1.0f);

  std::mt19937 gen(15);
  const ImageU8 rgb = oracle::random_image(4, 3, 3, gen);
  const std::vector<float> zero{0.0f}, one{1.0f};
  const Tensor id = to_tensor_normalize(rgb, zero, one);
  CHECK(id.shape() == Shape{3, 3, 4});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 3; ++y)
      for (std::size_t x = 0; x < 4; ++x) CHECK(id(c, y, x) == float(rgb.at(x, y, c)) / 255.0f);

  const std::vector<float> mean{0.2f, 0.4f, 0.6f}, stdv{0.3f, 0.5f, 0.7f};
  ImageU8 ramp(256, 1, 3);
  for (std::size_t p = 0; p < 256; ++p)
    for (std::size_t c = 0; c < 3; ++c) ramp.at(p, 0, c) = std::uint8_t(p);
  const Tensor n = to_tensor_normalize(ramp, mean, stdv);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < 256; ++p) {
      const long back = std::lround(255.0 * (double(n(c, 0, p)) * stdv[c] + mean[c]));
      REQUIRE(std::abs(back - long(p)) <= 1);
    }

  const std::vector<float> bad{0.0f};
  CHECK_THROWS_AS(to_tensor_normalize(rgb, zero, bad), ConfigError);
}

TEST_CASE("pipelines") {
  std::mt19937 gen(16);
  const ImageU8 img = oracle::random_image(32, 32, 3, gen);

  AugmentConfig cfg;
  cfg.image_size = 32;
  AugmentPipeline plain({Resize{32}, Normalize{}}, 1);
  const std::vector<float> half{0.5f};
  CHECK(plain.apply(img) == to_tensor_normalize(img, half, half));
  CHECK_FALSE(AugmentPipeline(eval_steps(cfg), 1).randomized());
  CHECK_THROWS_AS(AugmentPipeline({Resize{32}}, 1), ConfigError);

  cfg.rotation_degrees = 15.0f;
  cfg.scale_lo = 0.8f;
  cfg.blur_prob = 0.5f;
  AugmentPipeline a(training_steps(cfg), 77), b(training_steps(cfg), 77);
  CHECK(a.randomized());
  for (int i = 0; i < 8; ++i) {
    const Tensor ta = a.apply(img), tb = b.apply(img);
    CHECK(ta.shape() == Shape{3, 32, 32});
    CHECK(ta == tb);
    CHECK(all_in_range(ta, -1.0f, 1.0f));
  }

  AugmentConfig one_channel;
  one_channel.image_size = 16;
  one_channel.channels = 1;
  AugmentPipeline e(eval_steps(one_channel), 0);
  CHECK(e.apply(img).shape() == Shape{1, 16, 16});
  CHECK(e.apply(img) == e.apply(img));
}
