#include "glyphforge/tensor.hpp"

#include <Eigen/Core>

#include <cstring>

namespace glyphforge {

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t checked_numel(const Shape& shape) {
  if (shape.empty()) throw ShapeError("shape must have at least one dimension");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("shape " + to_string(shape) + " has a zero dimension");
    n *= d;
  }
  return n;
}

Tensor tensor_new(const Shape& shape, float fill) { return Tensor(shape, fill); }

template <typename T>
bool bitwise_equal(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) return false;
  return a.numel() == 0 || std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(T)) == 0;
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
  }
}

template <typename T, typename F>
BasicTensor<T> zip(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op, F f) {
  require_same_shape(a.shape(), b.shape(), op);
  BasicTensor<T> out = a;
  auto o = out.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(o[i], y[i]);
  return out;
}

}  // namespace

template <typename T>
void gemm(Transpose trans_a, Transpose trans_b, std::size_t m, std::size_t n, std::size_t k,
          std::span<const T> a, std::span<const T> b, std::span<T> c, bool accumulate) {
  if (a.size() != m * k || b.size() != k * n || c.size() != m * n) {
    throw ShapeError("gemm: buffer sizes do not match dimensions");
  }
  using Map = Eigen::Map<const RowMat<T>>;
  const auto M = static_cast<Eigen::Index>(m);
  const auto N = static_cast<Eigen::Index>(n);
  const auto K = static_cast<Eigen::Index>(k);
  Eigen::Map<RowMat<T>> out(c.data(), M, N);
  // Stored shapes: a is [m,k] or [k,m]; b is [k,n] or [n,k].
  auto run = [&](const auto& lhs, const auto& rhs) {
    if (accumulate) {
      out.noalias() += lhs * rhs;
    } else {
      out.noalias() = lhs * rhs;
    }
  };
  const bool ta = trans_a == Transpose::yes;
  const bool tb = trans_b == Transpose::yes;
  if (!ta && !tb) {
    run(Map(a.data(), M, K), Map(b.data(), K, N));
  } else if (ta && !tb) {
    run(Map(a.data(), K, M).transpose(), Map(b.data(), K, N));
  } else if (!ta && tb) {
    run(Map(a.data(), M, K), Map(b.data(), N, K).transpose());
  } else {
    run(Map(a.data(), K, M).transpose(), Map(b.data(), N, K).transpose());
  }
}

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + to_string(a.shape()) + " x " +
                     to_string(b.shape()));
  }
  BasicTensor<T> c({a.dim(0), b.dim(1)});
  gemm<T>(Transpose::no, Transpose::no, a.dim(0), b.dim(1), a.dim(1), a.data(), b.data(), c.data(),
          false);
  return c;
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return zip(a, b, "add", [](T x, T y) { return x + y; });
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return zip(a, b, "sub", [](T x, T y) { return x - y; });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return zip(a, b, "mul", [](T x, T y) { return x * y; });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor) {
  BasicTensor<T> out = a;
  for (T& v : out.data()) v *= factor;
  return out;
}

template <typename T>
std::size_t argmax(std::span<const T> values) {
  if (values.empty()) throw ShapeError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

template <typename T>
std::size_t argmax(const BasicTensor<T>& v) {
  if (v.rank() != 1) throw ShapeError("argmax expects a rank-1 tensor, got " + to_string(v.shape()));
  return argmax<T>(v.data());
}

#define GLYPHFORGE_INSTANTIATE(T)                                                              \
  template bool bitwise_equal<T>(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template void gemm<T>(Transpose, Transpose, std::size_t, std::size_t, std::size_t,           \
                        std::span<const T>, std::span<const T>, std::span<T>, bool);          \
  template BasicTensor<T> matmul<T>(const BasicTensor<T>&, const BasicTensor<T>&);             \
  template BasicTensor<T> add<T>(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template BasicTensor<T> sub<T>(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template BasicTensor<T> mul<T>(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template BasicTensor<T> scale<T>(const BasicTensor<T>&, T);                                  \
  template std::size_t argmax<T>(std::span<const T>);                                          \
  template std::size_t argmax<T>(const BasicTensor<T>&);

GLYPHFORGE_INSTANTIATE(float)
GLYPHFORGE_INSTANTIATE(double)

#undef GLYPHFORGE_INSTANTIATE

}  // namespace glyphforge
