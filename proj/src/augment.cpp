#include "glyphforge/augment.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "glyphforge/imgproc.hpp"

namespace glyphforge::augment {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void validate(const Step& step) {
  std::visit(overloaded{
                 [](const RandomRotation& s) {
                   if (!(s.max_degrees >= 0.0f)) throw ConfigError("rotation degrees must be >= 0");
                 },
                 [](const RandomScaleCrop& s) {
                   if (!(s.lo > 0.0f && s.lo <= s.hi && s.hi <= 1.0f)) {
                     throw ConfigError("scale range must satisfy 0 < lo <= hi <= 1");
                   }
                   if (s.target_size < 1) throw ConfigError("scale-crop target size must be >= 1");
                 },
                 [](const RandomEffect& s) {
                   auto prob = [](float p) { return p >= 0.0f && p <= 1.0f; };
                   if (!prob(s.blur_prob) || !prob(s.grayscale_prob)) {
                     throw ConfigError("effect probabilities must lie in [0, 1]");
                   }
                   if (s.blur_kernel < 1 || s.blur_kernel % 2 == 0) {
                     throw ConfigError("blur kernel must be odd and positive");
                   }
                 },
                 [](const Resize& s) {
                   if (s.size < 1) throw ConfigError("resize target must be >= 1");
                 },
                 [](const ConvertChannels& s) {
                   if (s.channels != 1 && s.channels != 3) throw ConfigError("channels must be 1 or 3");
                 },
                 [](const Normalize& s) {
                   if (s.mean.empty() || s.mean.size() != s.std.size()) {
                     throw ConfigError("normalize mean/std must be non-empty and equally long");
                   }
                   for (float v : s.std) {
                     if (!(v > 0.0f)) throw ConfigError("normalize std must be positive");
                   }
                 },
             },
             step);
}

}  // namespace

ImageU8 rotate(const ImageU8& img, double degrees) {
  if (!std::isfinite(degrees)) throw ConfigError("rotation angle must be finite");
  if (degrees == 0.0) return img;
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
  const double max_x = static_cast<double>(img.width()) - 1.0;
  const double max_y = static_cast<double>(img.height()) - 1.0;
  constexpr double slack = 1e-6;
  ImageU8 out(img.width(), img.height(), img.channels(), 0);
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
      double sx = cx + c * dx - s * dy;
      double sy = cy + s * dx + c * dy;
      if (sx < -slack || sy < -slack || sx > max_x + slack || sy > max_y + slack) continue;
      sx = std::clamp(sx, 0.0, max_x);
      sy = std::clamp(sy, 0.0, max_y);
      const auto x0 = static_cast<std::size_t>(sx), y0 = static_cast<std::size_t>(sy);
      const std::size_t x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
      const double fx = sx - static_cast<double>(x0), fy = sy - static_cast<double>(y0);
      for (std::size_t ch = 0; ch < img.channels(); ++ch) {
        const double top = img.at(x0, y0, ch) * (1.0 - fx) + img.at(x1, y0, ch) * fx;
        const double bottom = img.at(x0, y1, ch) * (1.0 - fx) + img.at(x1, y1, ch) * fx;
        out.at(x, y, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(top * (1.0 - fy) + bottom * fy), 0L, 255L));
      }
    }
  }
  return out;
}

ImageU8 random_rotation(const RandomRotation& step, const ImageU8& img, Rng& rng) {
  validate(step);
  const float theta = rng.uniform(-step.max_degrees, step.max_degrees);
  return rotate(img, theta);
}

ImageU8 random_scale_crop(const RandomScaleCrop& step, const ImageU8& img, Rng& rng) {
  validate(step);
  const float s = rng.uniform(step.lo, step.hi);
  auto side = [&](std::size_t full) {
    const auto v = static_cast<std::size_t>(std::lround(static_cast<double>(s) * static_cast<double>(full)));
    return std::clamp<std::size_t>(v, 1, full);
  };
  const std::size_t cw = side(img.width()), ch = side(img.height());
  const int ox = rng.between(0, static_cast<int>(img.width() - cw));
  const int oy = rng.between(0, static_cast<int>(img.height() - ch));
  const ImageU8 window = imgproc::crop(img, {ox, oy, static_cast<int>(cw), static_cast<int>(ch)}, 0);
  return imgproc::resize_bilinear(window, step.target_size, step.target_size);
}

ImageU8 random_effect(const RandomEffect& step, const ImageU8& img, Rng& rng) {
  validate(step);
  // Both draws are always consumed so the stream does not depend on outcomes.
  const bool blur = rng.unit() < step.blur_prob;
  const bool gray = rng.unit() < step.grayscale_prob;
  ImageU8 out = blur ? imgproc::gaussian_blur(img, step.blur_kernel) : img;
  if (gray && out.channels() == 3) out = imgproc::gray_to_rgb(imgproc::to_grayscale(out));
  return out;
}

Tensor to_tensor_normalize(const ImageU8& img, std::span<const float> mean, std::span<const float> std) {
  const std::size_t c = img.channels();
  auto pick = [&](std::span<const float> v, std::size_t ch) {
    if (v.size() == 1) return v[0];
    if (v.size() != c) throw ConfigError("normalize expects 1 or " + std::to_string(c) + " values per statistic");
    return v[ch];
  };
  const std::size_t plane = img.width() * img.height();
  Tensor out({c, img.height(), img.width()});
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float m = pick(mean, ch);
    const float s = pick(std, ch);
    if (!(s > 0.0f)) throw ConfigError("normalize std must be positive");
    for (std::size_t i = 0; i < plane; ++i) {
      out[ch * plane + i] = (static_cast<float>(img.pixels()[i * c + ch]) / 255.0f - m) / s;
    }
  }
  return out;
}

std::vector<Step> training_steps(const AugmentConfig& cfg) {
  std::vector<Step> steps;
  if (cfg.rotation_degrees > 0.0f) steps.emplace_back(RandomRotation{cfg.rotation_degrees});
  if (!(cfg.scale_lo == 1.0f && cfg.scale_hi == 1.0f)) {
    steps.emplace_back(RandomScaleCrop{cfg.scale_lo, cfg.scale_hi, cfg.image_size});
  }
  if (cfg.blur_prob > 0.0f || cfg.grayscale_prob > 0.0f) {
    steps.emplace_back(RandomEffect{cfg.blur_prob, cfg.grayscale_prob, cfg.blur_kernel});
  }
  auto tail = eval_steps(cfg);
  steps.insert(steps.end(), tail.begin(), tail.end());
  return steps;
}

std::vector<Step> eval_steps(const AugmentConfig& cfg) {
  return {Resize{cfg.image_size}, ConvertChannels{cfg.channels}, Normalize{cfg.norm_mean, cfg.norm_std}};
}

AugmentPipeline::AugmentPipeline(std::vector<Step> steps, std::uint64_t seed)
    : steps_(std::move(steps)), rng_(seed, /*stream=*/0xA06) {
  if (steps_.empty() || !std::holds_alternative<Normalize>(steps_.back())) {
    throw ConfigError("an augmentation pipeline must end with normalization");
  }
  for (const Step& s : steps_) validate(s);
}

bool AugmentPipeline::randomized() const {
  for (const Step& s : steps_) {
    if (std::holds_alternative<RandomRotation>(s) || std::holds_alternative<RandomScaleCrop>(s) ||
        std::holds_alternative<RandomEffect>(s)) {
      return true;
    }
  }
  return false;
}

Tensor AugmentPipeline::apply(const ImageU8& img) {
  ImageU8 current = img;
  for (std::size_t i = 0; i + 1 < steps_.size(); ++i) {
    current = std::visit(overloaded{
                             [&](const RandomRotation& s) { return random_rotation(s, current, rng_); },
                             [&](const RandomScaleCrop& s) { return random_scale_crop(s, current, rng_); },
                             [&](const RandomEffect& s) { return random_effect(s, current, rng_); },
                             [&](const Resize& s) { return imgproc::resize_bilinear(current, s.size, s.size); },
                             [&](const ConvertChannels& s) { return imgproc::to_channels(current, s.channels); },
                             [&](const Normalize&) -> ImageU8 {
                               throw ConfigError("normalization must be the final step");
                             },
                         },
                         steps_[i]);
  }
  const auto& norm = std::get<Normalize>(steps_.back());
  return to_tensor_normalize(current, norm.mean, norm.std);
}

}  // namespace glyphforge::augment
