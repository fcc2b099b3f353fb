#include "tracefix/nn/optim.hpp"

#include <cmath>

#include "tracefix/error.hpp"

namespace tracefix::nn {

void adam_step(std::span<Parameter> params, AdamState& st) {
  if (st.m.empty()) {
    for (const auto& p : params) {
      st.m.emplace_back(p.value.shape());
      st.v.emplace_back(p.value.shape());
    }
  }
  if (st.m.size() != params.size()) throw ShapeError("Adam state holds moments for a different parameter set");
  ++st.step;
  const double bc1 = 1.0 - std::pow(static_cast<double>(st.beta1), static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(static_cast<double>(st.beta2), static_cast<double>(st.step));
  const auto step_size = static_cast<float>(st.lr / bc1);
  const auto inv_sqrt_bc2 = static_cast<float>(1.0 / std::sqrt(bc2));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (st.m[i].shape() != p.value.shape())
      throw ShapeError("Adam moment shape mismatch for parameter " + p.name);
    float* w = p.value.data();
    const float* g = p.grad.data();
    float* m = st.m[i].data();
    float* v = st.v[i].data();
    for (std::size_t k = 0; k < p.value.numel(); ++k) {
      m[k] = st.beta1 * m[k] + (1.0f - st.beta1) * g[k];
      v[k] = st.beta2 * v[k] + (1.0f - st.beta2) * g[k] * g[k];
      w[k] -= step_size * m[k] / (std::sqrt(v[k]) * inv_sqrt_bc2 + st.eps);
    }
    p.zero_grad();
  }
}

void zero_grad(std::span<Parameter> params) {
  for (auto& p : params) p.zero_grad();
}

}  // namespace tracefix::nn
