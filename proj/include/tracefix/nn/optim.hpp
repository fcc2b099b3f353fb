#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tracefix/nn/tensor.hpp"

namespace tracefix::nn {

struct AdamState {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

// One bias-corrected Adam update over `params`, then zeroes their gradients.
// Moment buffers are created on the first call.
void adam_step(std::span<Parameter> params, AdamState& state);

void zero_grad(std::span<Parameter> params);

}  // namespace tracefix::nn
