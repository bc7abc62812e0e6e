#pragma once

// Brute-force reference implementations used by the tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "glyphforge/image.hpp"
#include "glyphforge/tensor.hpp"

namespace oracle {

using glyphforge::BasicTensor;
using glyphforge::ImageU8;
using glyphforge::Shape;

template <typename T>
BasicTensor<T> random_tensor(const Shape& shape, std::mt19937& gen, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  BasicTensor<T> t(shape);
  for (auto& v : t.data()) v = static_cast<T>(dist(gen));
  return t;
}

template <typename T>
double max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

// Direct six-loop cross-correlation with zero padding.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b, std::size_t stride,
                      std::size_t pad) {
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1, ow = (wd + 2 * pad - kw) / stride + 1;
  BasicTensor<T> out({n, cout, oh, ow});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = b[o];
          for (std::size_t c = 0; c < cin; ++c)
            for (std::size_t u = 0; u < kh; ++u)
              for (std::size_t v = 0; v < kw; ++v) {
                const long yy = long(i * stride + u) - long(pad), xx = long(j * stride + v) - long(pad);
                if (yy < 0 || xx < 0 || yy >= long(h) || xx >= long(wd)) continue;
                acc += double(x(s, c, std::size_t(yy), std::size_t(xx))) * double(w(o, c, u, v));
              }
          out(s, o, i, j) = static_cast<T>(acc);
        }
  return out;
}

template <typename T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& x, std::size_t window, std::size_t stride) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = (h - window) / stride + 1, ow = (w - window) / stride + 1;
  BasicTensor<T> out({n, c, oh, ow});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          T m = x(s, ch, i * stride, j * stride);
          for (std::size_t u = 0; u < window; ++u)
            for (std::size_t v = 0; v < window; ++v) m = std::max(m, x(s, ch, i * stride + u, j * stride + v));
          out(s, ch, i, j) = m;
        }
  return out;
}

inline double gaussian_sigma(int k) { return 0.3 * ((k - 1) * 0.5 - 1.0) + 0.8; }

// Full 2-D Gaussian evaluated from the formula, replicated borders.
inline ImageU8 gaussian_blur(const ImageU8& img, int k) {
  const double sigma = gaussian_sigma(k);
  const int r = k / 2;
  std::vector<double> wts;
  double z = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      wts.push_back(v);
      z += v;
    }
  ImageU8 out(img.width(), img.height(), img.channels(), 0);
  const int w = int(img.width()), h = int(img.height());
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        std::size_t idx = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx, ++idx) {
            const int yy = std::clamp(y + dy, 0, h - 1), xx = std::clamp(x + dx, 0, w - 1);
            acc += wts[idx] / z * img.at(std::size_t(xx), std::size_t(yy), c);
          }
        out.at(std::size_t(x), std::size_t(y), c) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
      }
  return out;
}

// Square-window min (erode) or max (dilate) scan; outside pixels are neutral.
inline ImageU8 morph_scan(const ImageU8& img, int se, bool dilate) {
  const int r = se / 2, w = int(img.width()), h = int(img.height());
  ImageU8 out(img.width(), img.height(), 1, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int v = dilate ? 0 : 255;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || xx < 0 || yy >= h || xx >= w) continue;
          const int p = img.at(std::size_t(xx), std::size_t(yy), 0);
          v = dilate ? std::max(v, p) : std::min(v, p);
        }
      out.at(std::size_t(x), std::size_t(y), 0) = static_cast<std::uint8_t>(v);
    }
  return out;
}

inline ImageU8 random_binary(std::size_t w, std::size_t h, double density, std::mt19937& gen) {
  std::bernoulli_distribution on(density);
  ImageU8 img(w, h, 1, 0);
  for (auto& p : img.pixels()) p = on(gen) ? 255 : 0;
  return img;
}

inline ImageU8 random_image(std::size_t w, std::size_t h, std::size_t c, std::mt19937& gen) {
  std::uniform_int_distribution<int> d(0, 255);
  ImageU8 img(w, h, c, 0);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(d(gen));
  return img;
}

}  // namespace oracle
