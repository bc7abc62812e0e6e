#include <doctest.h>

#include <sstream>

#include "glyphforge/dataset.hpp"
#include "glyphforge/font.hpp"
#include "glyphforge/nn/presets.hpp"
#include "glyphforge/pipeline.hpp"

using namespace glyphforge;
using namespace glyphforge::pipeline;

TEST_CASE("character accuracy") {
  const auto over = char_accuracy("OVER", "OVET");
  CHECK(over.correct == 3);
  CHECK(over.total == 4);
  CHECK(over.value() == 0.75);
  CHECK(char_accuracy("COLOR", "COLOR").value() == 1.0);
  CHECK(char_accuracy("COLOR", "color").value() == 1.0);
  const auto none = char_accuracy("AB", "");
  CHECK(none.correct == 0);
  CHECK(none.total == 2);
  CHECK(char_accuracy("ab", "abc").value() == 1.0);
  CHECK(char_accuracy("abc", "ab").value() == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(char_accuracy("", "x"), MetricError);
  for (const char* p : {"", "a", "ab", "abd", "abcd", "xbc"}) {
    const double v = char_accuracy("abc", p).value();
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(format_percent(0.75) == "75.00");
  CHECK(format_percent(8.0 / 9.0) == "88.89");
}

TEST_CASE("scene set pooling and csv") {
  SceneSetResult set;
  set.names = {"a.ppm", "b.ppm"};
  RecognitionResult r1, r2;
  r1.predicted = "ovet";
  r1.actual = "over";
  r1.accuracy = char_accuracy("over", "ovet");
  r2.predicted = "color";
  r2.actual = "color";
  r2.accuracy = char_accuracy("color", "color");
  set.results = {r1, r2};
  set.total = {8, 9};
  CHECK(set.total.value() == doctest::Approx(0.8889).epsilon(1e-4));
  std::ostringstream out;
  write_results_csv(out, set);
  CHECK(out.str() ==
        "image,actual,predicted,correct,total\n"
        "a.ppm,over,ovet,3,4\n"
        "b.ppm,color,color,5,5\n"
        "TOTAL,,88.89,8,9\n");
}

TEST_CASE("recognition on blank and single glyph scenes") {
  const auto& font = dataset::GlyphFont::standard();
  augment::AugmentConfig eval;
  eval.image_size = 32;
  eval.channels = 1;
  const nn::Network net = nn::build_network(nn::Preset::vanilla, {1, 32, 32}, 36, 3);

  const auto blank = recognize_word(ImageU8(80, 40, 3, 210), net, {}, eval, std::string("x"));
  CHECK(blank.predicted.empty());
  CHECK(blank.boxes.empty());
  REQUIRE(blank.accuracy.has_value());
  CHECK(blank.accuracy->correct == 0);

  const auto scene = dataset::synth_scene(font, "q");
  const auto one = recognize_word(scene.image, net, {}, eval);
  CHECK(one.boxes.size() == 1);
  CHECK(one.predicted.size() == 1);
  CHECK(one.confidences.size() == 1);
  CHECK_FALSE(one.accuracy.has_value());
  const char c = one.predicted[0];
  CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z')));

  const auto word = dataset::synth_scene(font, "w0rds");
  const auto first = recognize_word(word.image, net, {}, eval);
  const auto second = recognize_word(word.image, net, {}, eval);
  CHECK(first.predicted == second.predicted);
  CHECK(first.predicted.size() == first.boxes.size());
}

TEST_CASE("character crop") {
  ImageU8 img(30, 20, 1, 200);
  for (std::size_t y = 5; y < 15; ++y)
    for (std::size_t x = 10; x < 14; ++x) img.at(x, y) = 20;
  const ImageU8 c = character_crop(img, {10, 5, 4, 10});
  CHECK(c.width() == c.height());
  CHECK(c.width() == 14);
  CHECK(c.at(0, 0) == 200);
  CHECK(c.at(7, 7) == 20);
}
