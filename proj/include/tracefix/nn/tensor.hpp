#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tracefix::nn {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

// Dense row-major float32 array.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }
  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float item() const;

  // Reinterprets the data with a new shape of equal element count.
  Tensor reshaped(Shape shape) const;
  void fill(float v);

  bool operator==(const Tensor&) const = default;

private:
  Shape shape_;
  std::vector<float> data_;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
  void zero_grad() { grad.fill(0.0f); }
};

enum class InitScheme { UniformScaled, Zeros, Ones };

// UniformScaled draws from U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)) with
// fan_in = shape[0] and fan_out = shape[1] (or shape[0] for vectors).
Tensor init_params(const Shape& shape, std::mt19937_64& rng, InitScheme scheme = InitScheme::UniformScaled);

// Row-major C = op(A) * op(B) (+ C when accumulate), op = optional transpose.
// A is M x K after op, B is K x N after op.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const float* a,
          const float* b, float* c, bool accumulate);

}  // namespace tracefix::nn
