#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tracefix/nn/tape.hpp"

namespace tracefix::nn {

// Differentiable operations. Each records its output on the inputs' tape.

// a: [..., p, q], b: [q, r] -> [..., p, r]
Var matmul(const Var& a, const Var& b);
// x: [..., q], w: [q, r], bias: [r] -> [..., r]
Var linear(const Var& x, const Var& w, const Var& bias);

// Batched products over a leading batch extent. a: [n, p, q].
// bmm: b [n, q, r] -> [n, p, r]; bmm_nt: b [n, r, q] -> [n, p, r] (a * b^T).
Var bmm(const Var& a, const Var& b);
Var bmm_nt(const Var& a, const Var& b);

Var add(const Var& a, const Var& b);
// b's shape must equal the trailing extents of a; b is broadcast over the rest.
Var add_broadcast(const Var& a, const Var& b);
Var scale(const Var& x, float factor);
Var relu(const Var& x);
Var sigmoid(const Var& x);
Var softmax_lastdim(const Var& x);
Var layer_norm(const Var& x, const Var& gain, const Var& bias, float eps = 1e-5f);
// Inverted dropout; identity when rate == 0.
Var dropout(const Var& x, float rate, std::mt19937_64& rng);

// Row gather from table [V, d]; output shape is out_prefix + [d].
Var embedding_lookup(std::span<const std::int32_t> ids, const Shape& out_prefix, const Var& table);

Var reshape(const Var& x, Shape shape);
// x: [b, l, d] -> [b, len, d] taking rows start..start+len-1 of the middle extent.
Var slice_rows(const Var& x, std::size_t start, std::size_t len);
// x: [b, l, d] -> [b, d]
Var sum_rows(const Var& x);
// [b, l, h*dk] <-> [b*h, l, dk]
Var split_heads(const Var& x, std::size_t heads);
Var merge_heads(const Var& x, std::size_t heads);
Var sum(const Var& x);

// Mean binary cross-entropy; p: any shape of probabilities, labels same length.
// Probabilities are clamped to [1e-7, 1 - 1e-7].
Var bce_loss(const Var& p, std::span<const float> labels);
// Mean over positions of -log softmax(logits)[target]; logits [..., V].
Var ce_loss(const Var& logits, std::span<const std::int32_t> targets);

}  // namespace tracefix::nn
