#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "glyphforge/nn/layers.hpp"
#include "oracles.hpp"

using namespace glyphforge;
using namespace glyphforge::nn;
using TensorD = BasicTensor<double>;

namespace {

// Projects a layer output onto fixed random weights so every output element
// contributes to a scalar loss.
double project(const TensorD& out, const TensorD& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.numel(); ++i) s += out[i] * r[i];
  return s;
}

double max_rel_error(const TensorD& analytic, TensorD& param, const std::function<double()>& loss,
                     double eps = 1e-3) {
  double worst = 0.0;
  for (std::size_t i = 0; i < param.numel(); ++i) {
    const double saved = param[i];
    param[i] = saved + eps;
    const double up = loss();
    param[i] = saved - eps;
    const double down = loss();
    param[i] = saved;
    const double numeric = (up - down) / (2 * eps);
    const double a = analytic[i];
    worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8}));
  }
  return worst;
}

}  // namespace

TEST_CASE("relu examples") {
  const Tensor x({3}, std::vector<float>{-3, 0, 5});
  CHECK(relu_forward(x).values() == std::vector<float>{0, 0, 5});
  CHECK(relu_backward(Tensor({2}, std::vector<float>{-1, 2}), Tensor({2}, std::vector<float>{10, 10})).values() ==
        std::vector<float>{0, 10});
  CHECK_THROWS_AS(relu_backward(x, Tensor({2})), ShapeError);
  std::mt19937 gen(1);
  const Tensor r = oracle::random_tensor<float>({50}, gen);
  const Tensor y = relu_forward(r);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(y[i] >= 0.0f);
    if (r[i] >= 0.0f) CHECK(y[i] == r[i]);
  }
}

TEST_CASE("softmax examples and properties") {
  const Tensor s = softmax(Tensor({4}, std::vector<float>{0, 0, 0, 0}));
  for (float v : s.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-6));
  const Tensor t = softmax(Tensor({2}, std::vector<float>{std::numbers::ln2_v<float>, 0}));
  CHECK(t[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(t[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  const Tensor big = softmax(Tensor({2}, std::vector<float>{1000, 0}));
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] == doctest::Approx(0.0));
  CHECK(std::isfinite(softmax(Tensor({2}, std::vector<float>{-1e4f, 1e4f}))[1]));
  CHECK_THROWS_AS(softmax(Tensor({2}, std::vector<float>{NAN, 0})), NumericError);

  std::mt19937 gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor z = oracle::random_tensor<float>({36}, gen, -10, 10);
    const Tensor p = softmax(z);
    double sum = 0.0;
    for (float v : p.data()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-6);
    Tensor shifted = z;
    for (auto& v : shifted.data()) v += 3.5f;
    CHECK(oracle::max_abs_diff(softmax(shifted), p) <= 1e-6);
  }
}

TEST_CASE("cross-entropy examples") {
  const std::vector<int> t0{0};
  CHECK(cross_entropy_loss(Tensor({1, 3}, std::vector<float>{200, 0, 0}), t0).loss == doctest::Approx(0.0));
  const std::vector<int> t5{5};
  CHECK(cross_entropy_loss(Tensor({1, 36}, 0.0f), t5).loss == doctest::Approx(std::log(36.0)).epsilon(1e-5));
  // probabilities 0.5 and 0.25 for the targets
  const Tensor logits({2, 4}, std::vector<float>{std::log(3.0f), 0, 0, 0, 0, 0, 0, 0});
  const std::vector<int> targets{0, 1};
  CHECK(cross_entropy_loss(logits, targets).loss == doctest::Approx((std::log(2.0) + std::log(4.0)) / 2).epsilon(1e-6));
  const std::vector<int> bad{4, 0};
  CHECK_THROWS_AS(cross_entropy_loss(logits, bad), LabelError);
  CHECK_THROWS_AS(cross_entropy_loss(logits, t0), LabelError);
}

TEST_CASE("cross-entropy is non-negative and its gradient is (p - onehot) / N") {
  std::mt19937 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor z = oracle::random_tensor<float>({4, 6}, gen, -5, 5);
    const std::vector<int> targets{0, 5, 2, 2};
    const auto r = cross_entropy_loss(z, targets);
    CHECK(r.loss >= 0.0f);
    for (std::size_t n = 0; n < 4; ++n) {
      const Tensor row({6}, std::vector<float>(z.data().begin() + n * 6, z.data().begin() + n * 6 + 6));
      const Tensor p = softmax(row);
      for (std::size_t k = 0; k < 6; ++k) {
        const float want = (p[k] - (int(k) == targets[n] ? 1.0f : 0.0f)) / 4.0f;
        CHECK(r.d_logits(n, k) == doctest::Approx(want).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("conv2d examples") {
  const Tensor ones({1, 1, 3, 3}, 1.0f);
  const Tensor y = conv2d_forward(ones, Tensor({1, 1, 3, 3}, 1.0f), Tensor({1}, 0.0f), {1, 0});
  CHECK(y.shape() == Shape{1, 1, 1, 1});
  CHECK(y[0] == 9.0f);

  std::mt19937 gen(4);
  for (std::size_t k : {1, 3, 5}) {
    const Tensor x = oracle::random_tensor<float>({2, 3, 7, 7}, gen);
    Tensor w({3, 3, k, k}, 0.0f);
    for (std::size_t c = 0; c < 3; ++c) w(c, c, k / 2, k / 2) = 1.0f;
    CHECK(conv2d_forward(x, w, Tensor({3}, 0.0f), {1, (k - 1) / 2}) == x);
  }
  CHECK_THROWS_AS(conv_output_size(6, 3, 2, 0), ShapeError);
  CHECK_THROWS_AS(conv_output_size(2, 5, 1, 1), ShapeError);
  CHECK(conv_output_size(7, 3, 2, 0) == 3);
}

TEST_CASE("conv2d matches the direct summation oracle") {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t stride = 1 + trial % 2, pad = trial % 3, k = 1 + 2 * (trial % 2);
    const std::size_t h = 5 + stride * 2 - ((5 + 2 * pad - k) % stride == 0 ? 0 : 1) + (trial % 2);
    const std::size_t hh = (h + 2 * pad - k) % stride == 0 ? h : h + 1;
    const Tensor x = oracle::random_tensor<float>({1 + std::size_t(trial % 2), 2, hh, hh}, gen);
    const Tensor w = oracle::random_tensor<float>({3, 2, k, k}, gen);
    const Tensor b = oracle::random_tensor<float>({3}, gen);
    CHECK(oracle::max_abs_diff(conv2d_forward(x, w, b, {stride, pad}), oracle::conv2d(x, w, b, stride, pad)) <= 1e-5);
  }
}

TEST_CASE("conv2d backward matches finite differences") {
  std::mt19937 gen(6);
  for (auto [stride, pad] : {std::pair<std::size_t, std::size_t>{1, 0}, {1, 1}, {2, 1}}) {
    TensorD x = oracle::random_tensor<double>({2, 2, 5, 5}, gen);
    TensorD w = oracle::random_tensor<double>({3, 2, 3, 3}, gen);
    TensorD b = oracle::random_tensor<double>({3}, gen);
    const ConvGeometry g{stride, pad};
    const TensorD out = conv2d_forward(x, w, b, g);
    const TensorD r = oracle::random_tensor<double>(out.shape(), gen);
    const auto grads = conv2d_backward(x, w, r, g, true);
    const auto loss = [&] { return project(conv2d_forward(x, w, b, g), r); };
    CHECK(max_rel_error(grads.d_input, x, loss) <= 1e-2);
    CHECK(max_rel_error(grads.d_weight, w, loss) <= 1e-2);
    CHECK(max_rel_error(grads.d_bias, b, loss) <= 1e-2);
  }
}

TEST_CASE("maxpool examples") {
  const Tensor x({1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4});
  const auto r = maxpool2d_forward(x, {2, 2});
  CHECK(r.out.values() == std::vector<float>{4});
  const Tensor dx = maxpool2d_backward(r.indices, Tensor({1, 1, 1, 1}, 7.0f));
  CHECK(dx.values() == std::vector<float>{0, 0, 0, 7});
  const auto tie = maxpool2d_forward(Tensor({1, 1, 2, 2}, 1.0f), {2, 2});
  CHECK(maxpool2d_backward(tie.indices, Tensor({1, 1, 1, 1}, 1.0f)).values() == std::vector<float>{1, 0, 0, 0});
  CHECK_THROWS_AS(maxpool2d_forward(Tensor({1, 1, 1, 1}), {2, 2}), ShapeError);
}

TEST_CASE("maxpool matches the window-scan oracle exactly") {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor x = oracle::random_tensor<float>({2, 3, 8, 8}, gen);
    CHECK(maxpool2d_forward(x, {2, 2}).out == oracle::maxpool2d(x, 2, 2));
  }
}

TEST_CASE("maxpool backward matches finite differences") {
  std::mt19937 gen(8);
  TensorD x = oracle::random_tensor<double>({2, 2, 4, 4}, gen);
  const auto fwd = maxpool2d_forward(x, {2, 2});
  const TensorD r = oracle::random_tensor<double>(fwd.out.shape(), gen);
  const TensorD dx = maxpool2d_backward(fwd.indices, r);
  CHECK(max_rel_error(dx, x, [&] { return project(maxpool2d_forward(x, {2, 2}).out, r); }) <= 1e-2);
}

TEST_CASE("fully connected layer") {
  const Tensor x({1, 2}, std::vector<float>{1, 0});
  const Tensor w({2, 2}, std::vector<float>{2, 3, 4, 5});
  CHECK(fc_forward(x, w, Tensor({2}, 0.0f)).values() == std::vector<float>{2, 3});
  const Tensor b({2}, std::vector<float>{0.5f, -1});
  CHECK(fc_forward(Tensor({3, 2}, 0.0f), w, b).values() == std::vector<float>{0.5f, -1, 0.5f, -1, 0.5f, -1});
  CHECK_THROWS_AS(fc_forward(Tensor({1, 3}), w, b), ShapeError);

  std::mt19937 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor xi = oracle::random_tensor<float>({3, 4}, gen);
    const Tensor wi = oracle::random_tensor<float>({4, 2}, gen);
    const Tensor bi = oracle::random_tensor<float>({2}, gen);
    Tensor want({3, 2});
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t m = 0; m < 2; ++m) {
        double s = bi[m];
        for (std::size_t f = 0; f < 4; ++f) s += double(xi(n, f)) * wi(f, m);
        want(n, m) = float(s);
      }
    CHECK(oracle::max_abs_diff(fc_forward(xi, wi, bi), want) <= 1e-5);
  }

  TensorD xd = oracle::random_tensor<double>({3, 4}, gen);
  TensorD wd = oracle::random_tensor<double>({4, 2}, gen);
  TensorD bd = oracle::random_tensor<double>({2}, gen);
  const TensorD r = oracle::random_tensor<double>({3, 2}, gen);
  const auto g = fc_backward(xd, wd, r, true);
  const auto loss = [&] { return project(fc_forward(xd, wd, bd), r); };
  CHECK(max_rel_error(g.d_input, xd, loss) <= 1e-2);
  CHECK(max_rel_error(g.d_weight, wd, loss) <= 1e-2);
  CHECK(max_rel_error(g.d_bias, bd, loss) <= 1e-2);
}

TEST_CASE("flatten is a reshape and its backward is the inverse") {
  std::mt19937 gen(10);
  const Tensor x = oracle::random_tensor<float>({1, 2, 2, 2}, gen);
  const Tensor f = flatten_forward(x);
  CHECK(f.shape() == Shape{1, 8});
  CHECK(f.values() == x.values());
  CHECK(flatten_backward(f, x.shape()) == x);
  CHECK_THROWS_AS(flatten_forward(Tensor({2, 3})), ShapeError);
  const Tensor y = oracle::random_tensor<float>({3, 4, 5, 2}, gen);
  CHECK(flatten_forward(y).numel() == y.numel());
}

TEST_CASE("merge layers") {
  std::mt19937 gen(11);
  const Tensor a = oracle::random_tensor<float>({1, 2, 4, 4}, gen);
  CHECK(merge_forward(MergeKind::residual_add, a, Tensor(a.shape(), 0.0f)) == a);
  const Tensor b = oracle::random_tensor<float>({1, 3, 4, 4}, gen);
  const Tensor c = merge_forward(MergeKind::concat, a, b);
  CHECK(c.shape() == Shape{1, 5, 4, 4});
  CHECK(c(0, 1, 2, 3) == a(0, 1, 2, 3));
  CHECK(c(0, 4, 1, 0) == b(0, 2, 1, 0));
  CHECK_THROWS_AS(merge_forward(MergeKind::residual_add, a, b), ShapeError);
  CHECK_THROWS_AS(merge_forward(MergeKind::concat, a, Tensor({1, 3, 2, 4})), ShapeError);

  const Tensor g = oracle::random_tensor<float>(a.shape(), gen);
  const auto [ga, gb] = merge_backward(MergeKind::residual_add, g, a.shape(), a.shape());
  CHECK(ga == g);
  CHECK(gb == g);
  const auto [ca, cb] = merge_backward(MergeKind::concat, c, a.shape(), b.shape());
  CHECK(ca == a);
  CHECK(cb == b);
}
