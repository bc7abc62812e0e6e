#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "glyphforge/tensor.hpp"

// Forward and backward kernels for every layer kind. All kernels are
// templated on the scalar type; training runs in float, gradient checking in
// double. Image batches are (N, C, H, W).
namespace glyphforge::nn {

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x);

// Passes d_out where x > 0, zero elsewhere (subgradient 0 at x == 0).
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& d_out);

// Max-shifted softmax of a rank-1 tensor.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& z);

template <typename T>
struct LossResult {
  T loss;
  BasicTensor<T> d_logits;
};

// Mean cross entropy over the batch with the softmax fused in (log-sum-exp).
// d_logits[n] = (softmax(logits[n]) - onehot(target[n])) / N.
template <typename T>
LossResult<T> cross_entropy_loss(const BasicTensor<T>& logits, std::span<const int> targets);

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// (in + 2*padding - kernel) / stride + 1, or ShapeError when not a positive integer.
std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                             std::size_t padding);

// Cross-correlation (no kernel flip) with zero padding.
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                              const BasicTensor<T>& bias, ConvGeometry geom);

template <typename T>
struct ConvGrads {
  BasicTensor<T> d_input;  // empty when not requested
  BasicTensor<T> d_weight;
  BasicTensor<T> d_bias;
};

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                             const BasicTensor<T>& d_out, ConvGeometry geom,
                             bool need_input_grad = true);

struct PoolGeometry {
  std::size_t window = 2;
  std::size_t stride = 2;
};

// Flat input offsets of each pooled maximum, plus the input shape needed to
// scatter gradients back.
struct PoolIndices {
  Shape input_shape;
  std::vector<std::uint32_t> offsets;
};

template <typename T>
struct PoolResult {
  BasicTensor<T> out;
  PoolIndices indices;
};

// Ties resolve to the first maximum in row-major window order.
template <typename T>
PoolResult<T> maxpool2d_forward(const BasicTensor<T>& x, PoolGeometry geom);

template <typename T>
BasicTensor<T> maxpool2d_backward(const PoolIndices& indices, const BasicTensor<T>& d_out);

// out = x * W + b with x [N,F], W [F,M], b [M].
template <typename T>
BasicTensor<T> fc_forward(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                          const BasicTensor<T>& bias);

template <typename T>
struct FcGrads {
  BasicTensor<T> d_input;  // empty when not requested
  BasicTensor<T> d_weight;
  BasicTensor<T> d_bias;
};

template <typename T>
FcGrads<T> fc_backward(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                       const BasicTensor<T>& d_out, bool need_input_grad = true);

template <typename T>
BasicTensor<T> flatten_forward(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> flatten_backward(const BasicTensor<T>& d_out, const Shape& input_shape);

enum class MergeKind { residual_add, concat };

// residual_add: a + b (identical shapes). concat: [a; b] along channels.
template <typename T>
BasicTensor<T> merge_forward(MergeKind kind, const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> merge_backward(MergeKind kind, const BasicTensor<T>& d_out,
                                                         const Shape& a_shape,
                                                         const Shape& b_shape);

}  // namespace glyphforge::nn
