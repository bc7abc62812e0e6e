#include "glyphforge/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace glyphforge::nn {

namespace {

void require_rank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                     to_string(s));
  }
}

// Unfolds one (C, H, W) sample into a [C*kh*kw, Ho*Wo] column matrix.
template <typename T>
void im2col(std::span<const T> img, std::size_t channels, std::size_t height, std::size_t width,
            std::size_t kh, std::size_t kw, ConvGeometry g, std::size_t out_h, std::size_t out_w,
            std::span<T> col) {
  const std::size_t plane = out_h * out_w;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        T* row = col.data() + ((c * kh + ky) * kw + kx) * plane;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.padding);
          T* dst = row + oy * out_w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(height)) {
            std::fill(dst, dst + out_w, T{0});
            continue;
          }
          const T* src = img.data() + (c * height + static_cast<std::size_t>(iy)) * width;
          for (std::size_t ox = 0; ox < out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                            static_cast<std::ptrdiff_t>(g.padding);
            dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(width)) ? T{0} : src[ix];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters column gradients back into the image.
template <typename T>
void col2im(std::span<const T> col, std::size_t channels, std::size_t height, std::size_t width,
            std::size_t kh, std::size_t kw, ConvGeometry g, std::size_t out_h, std::size_t out_w,
            std::span<T> img) {
  const std::size_t plane = out_h * out_w;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        const T* row = col.data() + ((c * kh + ky) * kw + kx) * plane;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(height)) continue;
          T* dst = img.data() + (c * height + static_cast<std::size_t>(iy)) * width;
          const T* src = row + oy * out_w;
          for (std::size_t ox = 0; ox < out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                            static_cast<std::ptrdiff_t>(g.padding);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(width)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

struct ConvDims {
  std::size_t n, cin, h, w, cout, kh, kw, out_h, out_w;
};

template <typename T>
ConvDims conv_dims(const BasicTensor<T>& x, const BasicTensor<T>& weight, ConvGeometry g) {
  require_rank(x.shape(), 4, "conv2d input");
  require_rank(weight.shape(), 4, "conv2d weight");
  if (weight.dim(1) != x.dim(1)) {
    throw ShapeError("conv2d: weight " + to_string(weight.shape()) + " expects " +
                     std::to_string(weight.dim(1)) + " input channels, input has " +
                     std::to_string(x.dim(1)));
  }
  if (g.stride == 0) throw ShapeError("conv2d: stride must be positive");
  ConvDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), weight.dim(0), weight.dim(2), weight.dim(3),
             0, 0};
  d.out_h = conv_output_size(d.h, d.kh, g.stride, g.padding);
  d.out_w = conv_output_size(d.w, d.kw, g.stride, g.padding);
  return d;
}

}  // namespace

std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                             std::size_t padding) {
  const std::size_t span = in + 2 * padding;
  if (stride == 0 || kernel == 0 || kernel > span || (span - kernel) % stride != 0) {
    throw ShapeError("window " + std::to_string(kernel) + " with stride " + std::to_string(stride) +
                     " and padding " + std::to_string(padding) + " does not tile extent " +
                     std::to_string(in));
  }
  return (span - kernel) / stride + 1;
}

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x) {
  BasicTensor<T> out = x;
  for (T& v : out.data()) v = std::max(v, T{0});
  return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& d_out) {
  if (x.shape() != d_out.shape()) {
    throw ShapeError("relu_backward: shape mismatch " + to_string(x.shape()) + " vs " +
                     to_string(d_out.shape()));
  }
  BasicTensor<T> dx = d_out;
  auto xs = x.data();
  auto ds = dx.data();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!(xs[i] > T{0})) ds[i] = T{0};
  }
  return dx;
}

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& z) {
  require_rank(z.shape(), 1, "softmax");
  for (T v : z.data()) {
    if (!std::isfinite(v)) throw NumericError("softmax: non-finite input");
  }
  BasicTensor<T> out = z;
  auto o = out.data();
  const T peak = *std::max_element(o.begin(), o.end());
  T total{0};
  for (T& v : o) {
    v = std::exp(v - peak);
    total += v;
  }
  for (T& v : o) v /= total;
  return out;
}

template <typename T>
LossResult<T> cross_entropy_loss(const BasicTensor<T>& logits, std::span<const int> targets) {
  require_rank(logits.shape(), 2, "cross_entropy_loss logits");
  const std::size_t n = logits.dim(0);
  const std::size_t k = logits.dim(1);
  if (targets.size() != n) {
    throw LabelError("cross_entropy_loss: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(n) + " rows");
  }
  LossResult<T> result{T{0}, BasicTensor<T>(logits.shape())};
  double total = 0.0;
  const T inv_n = T{1} / static_cast<T>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const int t = targets[r];
    if (t < 0 || static_cast<std::size_t>(t) >= k) {
      throw LabelError("cross_entropy_loss: target " + std::to_string(t) + " outside [0, " +
                       std::to_string(k) + ")");
    }
    const T* z = logits.data().data() + r * k;
    T* g = result.d_logits.data().data() + r * k;
    T peak = z[0];
    for (std::size_t j = 0; j < k; ++j) {
      if (!std::isfinite(z[j])) throw NumericError("cross_entropy_loss: non-finite logit");
      peak = std::max(peak, z[j]);
    }
    T sum{0};
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(z[j] - peak);
    const T log_sum = peak + std::log(sum);
    total += static_cast<double>(log_sum - z[t]);
    for (std::size_t j = 0; j < k; ++j) {
      const T p = std::exp(z[j] - log_sum);
      g[j] = (p - (static_cast<std::size_t>(t) == j ? T{1} : T{0})) * inv_n;
    }
  }
  result.loss = static_cast<T>(total / static_cast<double>(n));
  return result;
}

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                              const BasicTensor<T>& bias, ConvGeometry geom) {
  const ConvDims d = conv_dims(x, weight, geom);
  if (bias.rank() != 1 || bias.dim(0) != d.cout) {
    throw ShapeError("conv2d: bias shape " + to_string(bias.shape()) + " does not match " +
                     std::to_string(d.cout) + " output channels");
  }
  const std::size_t plane = d.out_h * d.out_w;
  const std::size_t patch = d.cin * d.kh * d.kw;
  BasicTensor<T> out({d.n, d.cout, d.out_h, d.out_w});
  std::vector<T> col(patch * plane);
  for (std::size_t s = 0; s < d.n; ++s) {
    im2col<T>(x.data().subspan(s * d.cin * d.h * d.w, d.cin * d.h * d.w), d.cin, d.h, d.w, d.kh,
              d.kw, geom, d.out_h, d.out_w, col);
    auto dst = out.data().subspan(s * d.cout * plane, d.cout * plane);
    for (std::size_t c = 0; c < d.cout; ++c) {
      std::fill(dst.begin() + static_cast<std::ptrdiff_t>(c * plane),
                dst.begin() + static_cast<std::ptrdiff_t>((c + 1) * plane), bias[c]);
    }
    gemm<T>(Transpose::no, Transpose::no, d.cout, plane, patch, weight.data(),
            std::span<const T>(col), dst, true);
  }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                             const BasicTensor<T>& d_out, ConvGeometry geom, bool need_input_grad) {
  const ConvDims d = conv_dims(x, weight, geom);
  const Shape expected{d.n, d.cout, d.out_h, d.out_w};
  if (d_out.shape() != expected) {
    throw ShapeError("conv2d_backward: d_out " + to_string(d_out.shape()) + ", expected " +
                     to_string(expected));
  }
  const std::size_t plane = d.out_h * d.out_w;
  const std::size_t patch = d.cin * d.kh * d.kw;
  ConvGrads<T> g{need_input_grad ? BasicTensor<T>(x.shape()) : BasicTensor<T>{},
                 BasicTensor<T>(weight.shape()), BasicTensor<T>({d.cout})};
  std::vector<T> col(patch * plane);
  std::vector<T> d_col(need_input_grad ? patch * plane : 0);
  for (std::size_t s = 0; s < d.n; ++s) {
    const auto sample = x.data().subspan(s * d.cin * d.h * d.w, d.cin * d.h * d.w);
    const auto grad = d_out.data().subspan(s * d.cout * plane, d.cout * plane);
    im2col<T>(sample, d.cin, d.h, d.w, d.kh, d.kw, geom, d.out_h, d.out_w, col);
    gemm<T>(Transpose::no, Transpose::yes, d.cout, patch, plane, grad, std::span<const T>(col),
            g.d_weight.data(), true);
    for (std::size_t c = 0; c < d.cout; ++c) {
      T acc{0};
      for (std::size_t i = 0; i < plane; ++i) acc += grad[c * plane + i];
      g.d_bias[c] += acc;
    }
    if (need_input_grad) {
      gemm<T>(Transpose::yes, Transpose::no, patch, plane, d.cout, weight.data(), grad,
              std::span<T>(d_col), false);
      col2im<T>(d_col, d.cin, d.h, d.w, d.kh, d.kw, geom, d.out_h, d.out_w,
                g.d_input.data().subspan(s * d.cin * d.h * d.w, d.cin * d.h * d.w));
    }
  }
  return g;
}

template <typename T>
PoolResult<T> maxpool2d_forward(const BasicTensor<T>& x, PoolGeometry geom) {
  require_rank(x.shape(), 4, "maxpool2d input");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (geom.window > h || geom.window > w) {
    throw ShapeError("maxpool2d: window " + std::to_string(geom.window) + " larger than input " +
                     to_string(x.shape()));
  }
  const std::size_t out_h = conv_output_size(h, geom.window, geom.stride, 0);
  const std::size_t out_w = conv_output_size(w, geom.window, geom.stride, 0);
  PoolResult<T> r{BasicTensor<T>({n, c, out_h, out_w}), PoolIndices{x.shape(), {}}};
  r.indices.offsets.resize(r.out.numel());
  const T* src = x.data().data();
  std::size_t o = 0;
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox, ++o) {
        std::size_t best = base + (oy * geom.stride) * w + ox * geom.stride;
        for (std::size_t ky = 0; ky < geom.window; ++ky) {
          for (std::size_t kx = 0; kx < geom.window; ++kx) {
            const std::size_t idx = base + (oy * geom.stride + ky) * w + ox * geom.stride + kx;
            if (src[idx] > src[best]) best = idx;
          }
        }
        r.out[o] = src[best];
        r.indices.offsets[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return r;
}

template <typename T>
BasicTensor<T> maxpool2d_backward(const PoolIndices& indices, const BasicTensor<T>& d_out) {
  if (d_out.numel() != indices.offsets.size()) {
    throw ShapeError("maxpool2d_backward: d_out has " + std::to_string(d_out.numel()) +
                     " elements, indices " + std::to_string(indices.offsets.size()));
  }
  BasicTensor<T> dx(indices.input_shape);
  for (std::size_t i = 0; i < indices.offsets.size(); ++i) dx[indices.offsets[i]] += d_out[i];
  return dx;
}

template <typename T>
BasicTensor<T> fc_forward(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                          const BasicTensor<T>& bias) {
  require_rank(x.shape(), 2, "fc input");
  require_rank(weight.shape(), 2, "fc weight");
  if (x.dim(1) != weight.dim(0) || bias.rank() != 1 || bias.dim(0) != weight.dim(1)) {
    throw ShapeError("fc: incompatible shapes x " + to_string(x.shape()) + ", W " +
                     to_string(weight.shape()) + ", b " + to_string(bias.shape()));
  }
  const std::size_t n = x.dim(0), m = weight.dim(1);
  BasicTensor<T> out({n, m});
  for (std::size_t r = 0; r < n; ++r) {
    std::copy(bias.data().begin(), bias.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(r * m));
  }
  gemm<T>(Transpose::no, Transpose::no, n, m, x.dim(1), x.data(), weight.data(), out.data(), true);
  return out;
}

template <typename T>
FcGrads<T> fc_backward(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                       const BasicTensor<T>& d_out, bool need_input_grad) {
  require_rank(x.shape(), 2, "fc input");
  require_rank(weight.shape(), 2, "fc weight");
  const std::size_t n = x.dim(0), f = x.dim(1), m = weight.dim(1);
  if (weight.dim(0) != f || d_out.shape() != Shape{n, m}) {
    throw ShapeError("fc_backward: incompatible shapes x " + to_string(x.shape()) + ", W " +
                     to_string(weight.shape()) + ", d_out " + to_string(d_out.shape()));
  }
  FcGrads<T> g{BasicTensor<T>{}, BasicTensor<T>(weight.shape()), BasicTensor<T>({m})};
  gemm<T>(Transpose::yes, Transpose::no, f, m, n, x.data(), d_out.data(), g.d_weight.data(), false);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < m; ++j) g.d_bias[j] += d_out[r * m + j];
  }
  if (need_input_grad) {
    g.d_input = BasicTensor<T>(x.shape());
    gemm<T>(Transpose::no, Transpose::yes, n, f, m, d_out.data(), weight.data(), g.d_input.data(),
            false);
  }
  return g;
}

template <typename T>
BasicTensor<T> flatten_forward(const BasicTensor<T>& x) {
  require_rank(x.shape(), 4, "flatten input");
  return x.reshaped({x.dim(0), x.dim(1) * x.dim(2) * x.dim(3)});
}

template <typename T>
BasicTensor<T> flatten_backward(const BasicTensor<T>& d_out, const Shape& input_shape) {
  require_rank(input_shape, 4, "flatten input");
  return d_out.reshaped(input_shape);
}

template <typename T>
BasicTensor<T> merge_forward(MergeKind kind, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (kind == MergeKind::residual_add) {
    if (a.shape() != b.shape()) {
      throw ShapeError("residual-add: shape mismatch " + to_string(a.shape()) + " vs " +
                       to_string(b.shape()));
    }
    return add(a, b);
  }
  require_rank(a.shape(), 4, "concat input");
  require_rank(b.shape(), 4, "concat input");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    throw ShapeError("concat: N/H/W mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
  const std::size_t n = a.dim(0), plane = a.dim(2) * a.dim(3);
  const std::size_t ca = a.dim(1) * plane, cb = b.dim(1) * plane;
  BasicTensor<T> out({n, a.dim(1) + b.dim(1), a.dim(2), a.dim(3)});
  auto dst = out.data().begin();
  for (std::size_t s = 0; s < n; ++s) {
    dst = std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(s * ca), ca, dst);
    dst = std::copy_n(b.data().begin() + static_cast<std::ptrdiff_t>(s * cb), cb, dst);
  }
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> merge_backward(MergeKind kind, const BasicTensor<T>& d_out,
                                                         const Shape& a_shape,
                                                         const Shape& b_shape) {
  if (kind == MergeKind::residual_add) {
    if (d_out.shape() != a_shape || a_shape != b_shape) {
      throw ShapeError("residual-add backward: shape mismatch");
    }
    return {d_out, d_out};
  }
  require_rank(a_shape, 4, "concat input");
  require_rank(b_shape, 4, "concat input");
  const Shape expected{a_shape[0], a_shape[1] + b_shape[1], a_shape[2], a_shape[3]};
  if (d_out.shape() != expected) {
    throw ShapeError("concat backward: d_out " + to_string(d_out.shape()) + ", expected " +
                     to_string(expected));
  }
  BasicTensor<T> da(a_shape), db(b_shape);
  const std::size_t plane = a_shape[2] * a_shape[3];
  const std::size_t ca = a_shape[1] * plane, cb = b_shape[1] * plane;
  auto src = d_out.data().begin();
  for (std::size_t s = 0; s < a_shape[0]; ++s) {
    std::copy_n(src, ca, da.data().begin() + static_cast<std::ptrdiff_t>(s * ca));
    src += static_cast<std::ptrdiff_t>(ca);
    std::copy_n(src, cb, db.data().begin() + static_cast<std::ptrdiff_t>(s * cb));
    src += static_cast<std::ptrdiff_t>(cb);
  }
  return {std::move(da), std::move(db)};
}

#define GLYPHFORGE_INSTANTIATE(T)                                                                  \
  template BasicTensor<T> relu_forward<T>(const BasicTensor<T>&);                                  \
  template BasicTensor<T> relu_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> softmax<T>(const BasicTensor<T>&);                                       \
  template LossResult<T> cross_entropy_loss<T>(const BasicTensor<T>&, std::span<const int>);       \
  template BasicTensor<T> conv2d_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&,          \
                                            const BasicTensor<T>&, ConvGeometry);                  \
  template ConvGrads<T> conv2d_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,           \
                                           const BasicTensor<T>&, ConvGeometry, bool);             \
  template PoolResult<T> maxpool2d_forward<T>(const BasicTensor<T>&, PoolGeometry);                \
  template BasicTensor<T> maxpool2d_backward<T>(const PoolIndices&, const BasicTensor<T>&);        \
  template BasicTensor<T> fc_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&,              \
                                        const BasicTensor<T>&);                                    \
  template FcGrads<T> fc_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,                 \
                                     const BasicTensor<T>&, bool);                                 \
  template BasicTensor<T> flatten_forward<T>(const BasicTensor<T>&);                               \
  template BasicTensor<T> flatten_backward<T>(const BasicTensor<T>&, const Shape&);                \
  template BasicTensor<T> merge_forward<T>(MergeKind, const BasicTensor<T>&, const BasicTensor<T>&); \
  template std::pair<BasicTensor<T>, BasicTensor<T>> merge_backward<T>(                            \
      MergeKind, const BasicTensor<T>&, const Shape&, const Shape&);

GLYPHFORGE_INSTANTIATE(float)
GLYPHFORGE_INSTANTIATE(double)

#undef GLYPHFORGE_INSTANTIATE

}  // namespace glyphforge::nn
