#include "tracefix/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tracefix/error.hpp"

namespace tracefix::nn {

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_numel(shape_))
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_str(shape_));
}

float Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size())
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

Tensor init_params(const Shape& shape, std::mt19937_64& rng, InitScheme scheme) {
  Tensor t(shape, 0.0f);
  switch (scheme) {
    case InitScheme::Zeros: break;
    case InitScheme::Ones: t.fill(1.0f); break;
    case InitScheme::UniformScaled: {
      if (shape.empty()) throw ShapeError("uniform-scaled init needs a non-scalar shape");
      const double fan_in = static_cast<double>(shape[0]);
      const double fan_out = static_cast<double>(shape.size() > 1 ? shape[1] : shape[0]);
      const auto bound = static_cast<float>(std::sqrt(6.0 / (fan_in + fan_out)));
      std::uniform_real_distribution<float> dist(-bound, bound);
      for (auto& v : t.values()) v = dist(rng);
      break;
    }
  }
  return t;
}

namespace {

std::vector<float> transposed(const float* src, std::size_t rows, std::size_t cols) {
  std::vector<float> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = src[r * cols + c];
  return out;
}

}  // namespace

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const float* a,
          const float* b, float* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0f);
  std::vector<float> bt;
  if (trans_b) {
    // B is stored N x K; bring it to K x N so the inner loop runs over contiguous columns.
    bt = transposed(b, n, k);
    b = bt.data();
  }
  if (!trans_a) {
    for (std::size_t i = 0; i < m; ++i) {
      float* __restrict crow = c + i * n;
      const float* arow = a + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const float av = arow[p];
        const float* __restrict brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else {
    // A is stored K x M.
    for (std::size_t p = 0; p < k; ++p) {
      const float* arow = a + p * m;
      const float* __restrict brow = b + p * n;
      for (std::size_t i = 0; i < m; ++i) {
        const float av = arow[i];
        float* __restrict crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

}  // namespace tracefix::nn
