#include "glyphforge/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace glyphforge::imgproc {

namespace {

std::uint8_t clamp_round(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void require_gray(const ImageU8& img, const char* op) {
  if (img.channels() != 1) throw PreconditionError(std::string(op) + " expects a 1-channel image");
}

void require_binary(const ImageU8& img, const char* op) {
  require_gray(img, op);
  for (std::uint8_t p : img.pixels()) {
    if (p != 0 && p != 255) throw PreconditionError(std::string(op) + " expects a binary {0,255} image");
  }
}

void require_odd(int k, const char* what) {
  if (k < 1 || k % 2 == 0) {
    throw ConfigError(std::string(what) + " must be an odd positive integer, got " + std::to_string(k));
  }
}

// Square min (erode) or max (dilate) filter, done as a row pass then a column pass.
ImageU8 rank_filter(const ImageU8& img, int se, bool take_max) {
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  const int r = se / 2;
  const std::uint8_t outside = take_max ? 0 : 255;
  auto pick = [&](std::uint8_t a, std::uint8_t b) { return take_max ? std::max(a, b) : std::min(a, b); };
  ImageU8 rows(img.width(), img.height(), 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = take_max ? 0 : 255;
      for (int dx = -r; dx <= r; ++dx) {
        const int sx = x + dx;
        v = pick(v, (sx < 0 || sx >= w) ? outside : img.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(y)));
      }
      rows.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = v;
    }
  }
  ImageU8 out(img.width(), img.height(), 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = take_max ? 0 : 255;
      for (int dy = -r; dy <= r; ++dy) {
        const int sy = y + dy;
        v = pick(v, (sy < 0 || sy >= h) ? outside : rows.at(static_cast<std::size_t>(x), static_cast<std::size_t>(sy)));
      }
      out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = v;
    }
  }
  return out;
}

}  // namespace

ImageU8 to_grayscale(const ImageU8& img) {
  if (img.channels() == 1) return img;
  ImageU8 out(img.width(), img.height(), 1);
  const auto& src = img.pixels();
  auto& dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double luma = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    dst[i] = clamp_round(luma);
  }
  return out;
}

ImageU8 gray_to_rgb(const ImageU8& img) {
  if (img.channels() == 3) return img;
  ImageU8 out(img.width(), img.height(), 3);
  for (std::size_t i = 0; i < img.pixels().size(); ++i) {
    std::fill_n(out.pixels().begin() + static_cast<std::ptrdiff_t>(3 * i), 3, img.pixels()[i]);
  }
  return out;
}

ImageU8 to_channels(const ImageU8& img, std::size_t channels) {
  if (channels == 1) return to_grayscale(img);
  if (channels == 3) return gray_to_rgb(img);
  throw ConfigError("channel count must be 1 or 3");
}

double gaussian_sigma(int k) { return 0.3 * ((k - 1) * 0.5 - 1.0) + 0.8; }

GaussianKernel gaussian_kernel(int k) {
  require_odd(k, "Gaussian kernel size");
  GaussianKernel kernel{k, gaussian_sigma(k), std::vector<float>(static_cast<std::size_t>(k * k))};
  const int r = k / 2;
  const double two_s2 = 2.0 * kernel.sigma * kernel.sigma;
  std::vector<double> raw(kernel.weights.size());
  double total = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double v = std::exp(-(x * x + y * y) / two_s2);
      raw[static_cast<std::size_t>((y + r) * k + (x + r))] = v;
      total += v;
    }
  }
  for (std::size_t i = 0; i < raw.size(); ++i) kernel.weights[i] = static_cast<float>(raw[i] / total);
  return kernel;
}

ImageU8 gaussian_blur(const ImageU8& img, int k) {
  const GaussianKernel kernel = gaussian_kernel(k);
  if (k == 1) return img;
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  const int ch = static_cast<int>(img.channels());
  const int r = k / 2;
  ImageU8 out(img.width(), img.height(), img.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int ky = -r; ky <= r; ++ky) {
          const auto sy = static_cast<std::size_t>(std::clamp(y + ky, 0, h - 1));
          for (int kx = -r; kx <= r; ++kx) {
            const auto sx = static_cast<std::size_t>(std::clamp(x + kx, 0, w - 1));
            acc += static_cast<double>(kernel.at(kx + r, ky + r)) * img.at(sx, sy, static_cast<std::size_t>(c));
          }
        }
        out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(c)) =
            clamp_round(acc);
      }
    }
  }
  return out;
}

std::optional<ThresholdMode> parse_threshold_mode(std::string_view text) {
  if (text == "binary") return ThresholdMode::binary;
  if (text == "inverse") return ThresholdMode::inverse;
  return std::nullopt;
}

ImageU8 threshold(const ImageU8& img, std::uint8_t limit, ThresholdMode mode) {
  require_gray(img, "threshold");
  ImageU8 out = img;
  const std::uint8_t above = mode == ThresholdMode::binary ? 255 : 0;
  for (std::uint8_t& p : out.pixels()) p = p > limit ? above : static_cast<std::uint8_t>(255 - above);
  return out;
}

ImageU8 morphology(const ImageU8& img, MorphOp op, int se) {
  require_binary(img, "morphology");
  require_odd(se, "structuring element size");
  switch (op) {
    case MorphOp::erode: return rank_filter(img, se, false);
    case MorphOp::dilate: return rank_filter(img, se, true);
    case MorphOp::open: return rank_filter(rank_filter(img, se, false), se, true);
    case MorphOp::close: return rank_filter(rank_filter(img, se, true), se, false);
  }
  return img;
}

std::vector<BoundingBox> connected_components(const ImageU8& img) {
  require_binary(img, "connected_components");
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  std::vector<std::uint8_t> seen(img.pixels().size(), 0);
  std::vector<BoundingBox> boxes;
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto idx = static_cast<std::size_t>(y * w + x);
      if (seen[idx] || img.pixels()[idx] != 255) continue;
      int x0 = x, x1 = x, y0 = y, y1 = y;
      seen[idx] = 1;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        x0 = std::min(x0, cx);
        x1 = std::max(x1, cx);
        y0 = std::min(y0, cy);
        y1 = std::max(y1, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const auto n = static_cast<std::size_t>(ny * w + nx);
            if (seen[n] || img.pixels()[n] != 255) continue;
            seen[n] = 1;
            queue.emplace_back(nx, ny);
          }
        }
      }
      boxes.push_back({x0, y0, x1 - x0 + 1, y1 - y0 + 1});
    }
  }
  std::sort(boxes.begin(), boxes.end(), [](const BoundingBox& a, const BoundingBox& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  return boxes;
}

std::vector<BoundingBox> segment_characters(const ImageU8& img, const SegmentParams& params) {
  const ImageU8 gray = to_grayscale(img);
  const ImageU8 blurred = gaussian_blur(gray, params.blur_k);
  const ImageU8 binary = threshold(blurred, params.limit, params.mode);
  const ImageU8 opened = morphology(binary, MorphOp::open, params.se);
  const double min_area = params.min_area_frac * static_cast<double>(img.width() * img.height());
  std::vector<BoundingBox> boxes;
  for (const BoundingBox& b : connected_components(opened)) {
    if (static_cast<double>(b.area()) < min_area || std::min(b.w, b.h) < params.min_dim) continue;
    boxes.push_back(b);
  }
  return boxes;
}

ImageU8 crop(const ImageU8& img, const BoundingBox& box, int pad) {
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  if (box.x < 0 || box.y < 0 || box.w <= 0 || box.h <= 0 || box.x + box.w > w || box.y + box.h > h) {
    throw BoundsError("box (" + std::to_string(box.x) + "," + std::to_string(box.y) + "," +
                      std::to_string(box.w) + "," + std::to_string(box.h) + ") outside " +
                      std::to_string(w) + "x" + std::to_string(h) + " image");
  }
  if (pad < 0) throw BoundsError("negative crop padding");
  const int x0 = std::max(0, box.x - pad), y0 = std::max(0, box.y - pad);
  const int x1 = std::min(w, box.x + box.w + pad), y1 = std::min(h, box.y + box.h + pad);
  ImageU8 out(static_cast<std::size_t>(x1 - x0), static_cast<std::size_t>(y1 - y0), img.channels());
  const std::size_t row = out.width() * img.channels();
  for (int y = y0; y < y1; ++y) {
    const auto src = img.pixels().begin() +
                     static_cast<std::ptrdiff_t>((static_cast<std::size_t>(y) * img.width() + static_cast<std::size_t>(x0)) * img.channels());
    std::copy_n(src, row, out.pixels().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(y - y0) * row));
  }
  return out;
}

ImageU8 resize_bilinear(const ImageU8& img, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw ConfigError("resize target must be at least 1x1");
  if (width == img.width() && height == img.height()) return img;
  ImageU8 out(width, height, img.channels());
  const double sx_scale = static_cast<double>(img.width()) / static_cast<double>(width);
  const double sy_scale = static_cast<double>(img.height()) / static_cast<double>(height);
  const double max_x = static_cast<double>(img.width() - 1), max_y = static_cast<double>(img.height() - 1);
  for (std::size_t y = 0; y < height; ++y) {
    const double sy = std::clamp((static_cast<double>(y) + 0.5) * sy_scale - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double sx = std::clamp((static_cast<double>(x) + 0.5) * sx_scale - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(sx);
      const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < img.channels(); ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
        const double bottom = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
        out.at(x, y, c) = clamp_round(top * (1.0 - fy) + bottom * fy);
      }
    }
  }
  return out;
}

ImageU8 pad_to_square(const ImageU8& img, std::uint8_t fill) {
  const std::size_t side = std::max(img.width(), img.height());
  if (img.width() == side && img.height() == side) return img;
  ImageU8 out(side, side, img.channels(), fill);
  const std::size_t ox = (side - img.width()) / 2, oy = (side - img.height()) / 2;
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      for (std::size_t c = 0; c < img.channels(); ++c) out.at(x + ox, y + oy, c) = img.at(x, y, c);
    }
  }
  return out;
}

}  // namespace glyphforge::imgproc
