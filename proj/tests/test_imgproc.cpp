#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "glyphforge/dataset.hpp"
#include "glyphforge/imgproc.hpp"
#include "oracles.hpp"

using namespace glyphforge;
using namespace glyphforge::imgproc;

namespace {

// Stack-based flood fill, 8-connectivity.
std::vector<BoundingBox> flood_fill_boxes(const ImageU8& img) {
  const int w = int(img.width()), h = int(img.height());
  std::vector<char> seen(std::size_t(w * h), 0);
  std::vector<BoundingBox> boxes;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      if (seen[std::size_t(y0 * w + x0)] || img.at(std::size_t(x0), std::size_t(y0)) != 255) continue;
      int x_lo = x0, x_hi = x0, y_lo = y0, y_hi = y0;
      std::vector<std::pair<int, int>> stack{{x0, y0}};
      seen[std::size_t(y0 * w + x0)] = 1;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        x_lo = std::min(x_lo, x), x_hi = std::max(x_hi, x), y_lo = std::min(y_lo, y), y_hi = std::max(y_hi, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            auto& s = seen[std::size_t(ny * w + nx)];
            if (s || img.at(std::size_t(nx), std::size_t(ny)) != 255) continue;
            s = 1;
            stack.push_back({nx, ny});
          }
      }
      boxes.push_back({x_lo, y_lo, x_hi - x_lo + 1, y_hi - y_lo + 1});
    }
  std::sort(boxes.begin(), boxes.end(), [](const BoundingBox& a, const BoundingBox& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  return boxes;
}

bool subset(const ImageU8& a, const ImageU8& b) {
  for (std::size_t i = 0; i < a.pixels().size(); ++i)
    if (a.pixels()[i] == 255 && b.pixels()[i] != 255) return false;
  return true;
}

bool within_one(const BoundingBox& a, const BoundingBox& b) {
  return std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1 && std::abs(a.x + a.w - b.x - b.w) <= 1 &&
         std::abs(a.y + a.h - b.y - b.h) <= 1;
}

}  // namespace

TEST_CASE("grayscale conversion") {
  CHECK(to_grayscale(ImageU8(1, 1, 3, {255, 255, 255})).at(0, 0) == 255);
  CHECK(to_grayscale(ImageU8(1, 1, 3, {0, 0, 0})).at(0, 0) == 0);
  CHECK(to_grayscale(ImageU8(1, 1, 3, {255, 0, 0})).at(0, 0) == 76);
  std::mt19937 gen(1);
  const ImageU8 g = oracle::random_image(5, 4, 1, gen);
  CHECK(to_grayscale(g) == g);
  const ImageU8 rgb = oracle::random_image(6, 6, 3, gen);
  const ImageU8 gray = to_grayscale(rgb);
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 6; ++x) {
      const double l = 0.299 * rgb.at(x, y, 0) + 0.587 * rgb.at(x, y, 1) + 0.114 * rgb.at(x, y, 2);
      CHECK(std::abs(double(gray.at(x, y)) - l) <= 0.5 + 1e-9);
    }
  CHECK(to_grayscale(gray_to_rgb(gray)) == gray);
}

TEST_CASE("gaussian kernel") {
  CHECK(gaussian_kernel(1).weights == std::vector<float>{1.0f});
  CHECK_THROWS_AS(gaussian_kernel(4), ConfigError);
  CHECK_THROWS_AS(gaussian_kernel(0), ConfigError);
  CHECK_THROWS_AS(gaussian_kernel(-3), ConfigError);
  for (int k : {3, 5, 7, 9}) {
    const auto kern = gaussian_kernel(k);
    CHECK(kern.sigma == doctest::Approx(0.3 * ((k - 1) / 2.0 - 1) + 0.8));
    double sum = 0.0;
    for (float v : kern.weights) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-6);
    for (int y = 0; y < k; ++y)
      for (int x = 0; x < k; ++x) {
        CHECK(kern.at(x, y) == kern.at(k - 1 - x, y));
        CHECK(kern.at(x, y) == kern.at(x, k - 1 - y));
        CHECK(kern.at(x, y) == kern.at(y, x));
      }
  }
  const auto k3 = gaussian_kernel(3);
  const double s = oracle::gaussian_sigma(3);
  double z = 0.0;
  for (int y = -1; y <= 1; ++y)
    for (int x = -1; x <= 1; ++x) z += std::exp(-(x * x + y * y) / (2 * s * s));
  for (int y = -1; y <= 1; ++y)
    for (int x = -1; x <= 1; ++x)
      CHECK(k3.at(x + 1, y + 1) == doctest::Approx(std::exp(-(x * x + y * y) / (2 * s * s)) / z).epsilon(1e-6));
}

TEST_CASE("gaussian blur") {
  CHECK(gaussian_blur(ImageU8(9, 7, 3, 77), 5) == ImageU8(9, 7, 3, 77));
  std::mt19937 gen(2);
  const ImageU8 r = oracle::random_image(8, 8, 1, gen);
  CHECK(gaussian_blur(r, 1) == r);
  ImageU8 dot(7, 7, 1, 0);
  dot.at(3, 3) = 255;
  CHECK(gaussian_blur(dot, 3) == oracle::gaussian_blur(dot, 3));
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + 2 * (trial % 4);
    const ImageU8 img = oracle::random_image(3 + trial % 9, 4 + trial % 7, trial % 2 ? 3 : 1, gen);
    const ImageU8 got = gaussian_blur(img, k);
    const ImageU8 want = oracle::gaussian_blur(img, k);
    for (std::size_t i = 0; i < got.pixels().size(); ++i) {
      REQUIRE(std::abs(int(got.pixels()[i]) - int(want.pixels()[i])) <= 1);
    }
  }
}

TEST_CASE("threshold") {
  const ImageU8 img(3, 1, 1, {130, 128, 0});
  CHECK(threshold(img, 128, ThresholdMode::binary).pixels() == std::vector<std::uint8_t>{255, 0, 0});
  std::mt19937 gen(3);
  const ImageU8 r = oracle::random_image(10, 10, 1, gen);
  const ImageU8 b = threshold(r, 100, ThresholdMode::binary);
  const ImageU8 inv = threshold(r, 100, ThresholdMode::inverse);
  for (std::size_t i = 0; i < b.pixels().size(); ++i) {
    CHECK((b.pixels()[i] == 0 || b.pixels()[i] == 255));
    CHECK(inv.pixels()[i] == 255 - b.pixels()[i]);
  }
  CHECK_THROWS_AS(threshold(ImageU8(2, 2, 3), 10, ThresholdMode::binary), PreconditionError);
  CHECK(parse_threshold_mode("inverse") == ThresholdMode::inverse);
  CHECK_FALSE(parse_threshold_mode("otsu").has_value());
}

TEST_CASE("morphology matches the neighborhood oracle") {
  std::mt19937 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const ImageU8 img = oracle::random_binary(5 + trial % 13, 6 + trial % 11, 0.3 + 0.1 * (trial % 5), gen);
    const int se = 1 + 2 * (trial % 3);
    const ImageU8 e = morphology(img, MorphOp::erode, se);
    const ImageU8 d = morphology(img, MorphOp::dilate, se);
    REQUIRE(e == oracle::morph_scan(img, se, false));
    REQUIRE(d == oracle::morph_scan(img, se, true));
    CHECK(morphology(img, MorphOp::open, se) == oracle::morph_scan(oracle::morph_scan(img, se, false), se, true));
    CHECK(morphology(img, MorphOp::close, se) == oracle::morph_scan(oracle::morph_scan(img, se, true), se, false));
    CHECK(subset(e, img));
    CHECK(subset(img, d));
    const ImageU8 o = morphology(img, MorphOp::open, se);
    CHECK(morphology(o, MorphOp::open, se) == o);
  }
}

TEST_CASE("morphology examples") {
  ImageU8 dot(9, 9, 1, 0);
  dot.at(4, 4) = 255;
  CHECK(morphology(dot, MorphOp::open, 3) == ImageU8(9, 9, 1, 0));
  ImageU8 square(20, 20, 1, 0);
  for (std::size_t y = 5; y < 15; ++y)
    for (std::size_t x = 5; x < 15; ++x) square.at(x, y) = 255;
  CHECK(morphology(morphology(square, MorphOp::dilate, 3), MorphOp::erode, 3) == square);
  CHECK(morphology(ImageU8(6, 6, 1, 255), MorphOp::erode, 3) == ImageU8(6, 6, 1, 255));
  CHECK_THROWS_AS(morphology(ImageU8(3, 3, 1, 7), MorphOp::open, 3), PreconditionError);
  CHECK_THROWS_AS(morphology(ImageU8(3, 3, 1, 0), MorphOp::open, 2), ConfigError);
}

TEST_CASE("connected components") {
  CHECK(connected_components(ImageU8(8, 8, 1, 0)).empty());
  const auto all = connected_components(ImageU8(8, 5, 1, 255));
  REQUIRE(all.size() == 1);
  CHECK(all[0] == BoundingBox{0, 0, 8, 5});
  ImageU8 two(20, 12, 1, 0);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) {
      two.at(std::size_t(12 + x), std::size_t(2 + y)) = 255;
      two.at(std::size_t(3 + x), std::size_t(7 + y)) = 255;
    }
  CHECK(connected_components(two) == std::vector<BoundingBox>{{3, 7, 3, 3}, {12, 2, 3, 3}});
  ImageU8 diag(4, 4, 1, 0);
  diag.at(0, 0) = diag.at(1, 1) = diag.at(2, 2) = 255;
  CHECK(connected_components(diag).size() == 1);

  std::mt19937 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const ImageU8 img = oracle::random_binary(32, 32, 0.2 + 0.004 * trial, gen);
    CHECK(connected_components(img) == flood_fill_boxes(img));
  }
}

TEST_CASE("crop") {
  std::mt19937 gen(6);
  const ImageU8 img = oracle::random_image(10, 8, 3, gen);
  CHECK(crop(img, {0, 0, 10, 8}, 0) == img);
  const ImageU8 px = crop(img, {0, 0, 1, 1}, 0);
  CHECK(px.width() == 1);
  CHECK(px.height() == 1);
  CHECK(px.at(0, 0, 2) == img.at(0, 0, 2));
  const ImageU8 clamped = crop(img, {1, 1, 2, 2}, 5);
  CHECK(clamped.width() == 8);
  CHECK(clamped.height() == 8);
  CHECK(clamped.at(1, 1, 0) == img.at(1, 1, 0));
  CHECK_THROWS_AS(crop(img, {8, 0, 3, 2}, 0), BoundsError);
  CHECK_THROWS_AS(crop(img, {0, 0, 0, 2}, 0), BoundsError);
  CHECK_THROWS_AS(crop(img, {-1, 0, 2, 2}, 0), BoundsError);
}

TEST_CASE("resize and square padding") {
  std::mt19937 gen(7);
  const ImageU8 img = oracle::random_image(9, 5, 3, gen);
  CHECK(resize_bilinear(img, 9, 5) == img);
  CHECK(resize_bilinear(ImageU8(4, 6, 1, 90), 13, 3) == ImageU8(13, 3, 1, 90));
  const ImageU8 sq = pad_to_square(img, 7);
  CHECK(sq.width() == 9);
  CHECK(sq.height() == 9);
  CHECK(sq.at(0, 0, 0) == 7);
  CHECK(sq.at(4, 2, 1) == img.at(4, 0, 1));
}

TEST_CASE("every stage preserves image dimensions") {
  std::mt19937 gen(8);
  const ImageU8 img = oracle::random_image(17, 11, 3, gen);
  const ImageU8 g = to_grayscale(img);
  const ImageU8 b = gaussian_blur(g, 5);
  const ImageU8 t = threshold(b, 128, ThresholdMode::inverse);
  const ImageU8 m = morphology(t, MorphOp::open, 3);
  for (const auto* x : {&g, &b, &t, &m}) {
    CHECK(x->width() == 17);
    CHECK(x->height() == 11);
  }
}

TEST_CASE("segmenting synthetic scenes") {
  const auto& font = dataset::GlyphFont::standard();
  CHECK(segment_characters(ImageU8(64, 32, 3, 230)).empty());

  const auto scene = dataset::synth_scene(font, "LAKES");
  const auto boxes = segment_characters(scene.image);
  REQUIRE(boxes.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(within_one(boxes[i], scene.boxes[i]));

  ImageU8 noisy = scene.image;
  for (std::size_t c = 0; c < 3; ++c) noisy.at(3, 3, c) = 0;
  for (std::size_t c = 0; c < 3; ++c) noisy.at(scene.boxes[2].x + scene.boxes[2].w + 2, 5, c) = 0;
  CHECK(segment_characters(noisy).size() == 5);

  const auto color = dataset::synth_scene(font, "COLOR");
  const auto cb = segment_characters(color.image);
  REQUIRE(cb.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(within_one(cb[i], color.boxes[i]));
}

TEST_CASE("segmentation is translation consistent") {
  const auto& font = dataset::GlyphFont::standard();
  dataset::SceneOptions opts;
  opts.width = 260;
  const auto base = dataset::synth_scene(font, "w0rd5", opts);
  const auto ref = segment_characters(base.image);
  for (int t : {1, 3, 7, 20}) {
    auto shifted_opts = opts;
    shifted_opts.x_shift = t;
    const auto moved = segment_characters(dataset::synth_scene(font, "w0rd5", shifted_opts).image);
    REQUIRE(moved.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(moved[i].x == ref[i].x + t);
      CHECK(moved[i].y == ref[i].y);
      CHECK(moved[i].w == ref[i].w);
      CHECK(moved[i].h == ref[i].h);
    }
  }
}
