#pragma once

#include <span>

#include "glyphforge/nn/network.hpp"

namespace glyphforge::nn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;      // parameters compared
  std::size_t kinks_skipped = 0;  // perturbation flipped a relu or moved a pool maximum
  std::string worst;            // "<param>[index]" of the largest error
};

// Compares the analytic gradient of the mean cross-entropy loss with central
// finite differences (L(w+eps) - L(w-eps)) / 2eps for every trainable
// parameter element. The whole check runs on a double-precision copy of the
// network. Relative error is |a - n| / max(|a|, |n|, 1e-8).
//
// Elements whose +-eps perturbation changes a relu on/off state or a pool's
// chosen position are counted in kinks_skipped and not compared.
GradCheckReport grad_check(const Network& net, const Tensor& batch, std::span<const int> targets,
                           double eps);

}  // namespace glyphforge::nn
