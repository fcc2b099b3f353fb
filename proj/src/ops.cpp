#include "tracefix/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "tracefix/error.hpp"

namespace tracefix::nn {
namespace {

Tape& tape_of(const Var& v) {
  if (!v.valid()) throw TapeError("operation on a detached variable");
  return *v.tape();
}

std::size_t last_dim(const Shape& s) {
  if (s.empty()) throw ShapeError("operation needs a tensor of rank >= 1");
  return s.back();
}

void add_into(Tensor& dst, const Tensor& src) {
  float* d = dst.data();
  const float* s = src.data();
  for (std::size_t i = 0, n = dst.numel(); i < n; ++i) d[i] += s[i];
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (bv.rank() != 2 || av.rank() < 2 || av.shape().back() != bv.dim(0))
    throw ShapeError("matmul shape mismatch: " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
  const std::size_t q = bv.dim(0), r = bv.dim(1), rows = av.numel() / q;
  Shape out_shape = av.shape();
  out_shape.back() = r;
  Tensor out(out_shape);
  gemm(false, false, rows, r, q, av.data(), bv.data(), out.data(), false);
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib, rows, q, r](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.needs_grad(ia)) gemm(false, true, rows, q, r, g.data(), t.value(ib).data(), t.grad(ia).data(), true);
    if (t.needs_grad(ib)) gemm(true, false, q, r, rows, t.value(ia).data(), g.data(), t.grad(ib).data(), true);
  });
}

Var linear(const Var& x, const Var& w, const Var& bias) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = bias.value();
  if (wv.rank() != 2 || xv.rank() < 1 || xv.shape().back() != wv.dim(0) || bv.rank() != 1 ||
      bv.dim(0) != wv.dim(1))
    throw ShapeError("linear shape mismatch: x " + shape_str(xv.shape()) + ", w " + shape_str(wv.shape()) +
                     ", bias " + shape_str(bv.shape()));
  const std::size_t q = wv.dim(0), r = wv.dim(1), rows = xv.numel() / q;
  Shape out_shape = xv.shape();
  out_shape.back() = r;
  Tensor out(out_shape);
  for (std::size_t i = 0; i < rows; ++i) std::copy(bv.data(), bv.data() + r, out.data() + i * r);
  gemm(false, false, rows, r, q, xv.data(), wv.data(), out.data(), true);
  const std::size_t ix = x.id(), iw = w.id(), ib = bias.id();
  return tape.record(std::move(out), {x, w, bias}, [ix, iw, ib, rows, q, r](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.needs_grad(ix)) gemm(false, true, rows, q, r, g.data(), t.value(iw).data(), t.grad(ix).data(), true);
    if (t.needs_grad(iw)) gemm(true, false, q, r, rows, t.value(ix).data(), g.data(), t.grad(iw).data(), true);
    if (t.needs_grad(ib)) {
      float* gb = t.grad(ib).data();
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < r; ++j) gb[j] += g[i * r + j];
    }
  });
}

Var bmm(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 3 || bv.rank() != 3 || av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(1))
    throw ShapeError("bmm shape mismatch: " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
  const std::size_t n = av.dim(0), p = av.dim(1), q = av.dim(2), r = bv.dim(2);
  Tensor out({n, p, r});
  for (std::size_t i = 0; i < n; ++i)
    gemm(false, false, p, r, q, av.data() + i * p * q, bv.data() + i * q * r, out.data() + i * p * r, false);
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib, n, p, q, r](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    for (std::size_t i = 0; i < n; ++i) {
      const float* gi = g.data() + i * p * r;
      if (t.needs_grad(ia))
        gemm(false, true, p, q, r, gi, t.value(ib).data() + i * q * r, t.grad(ia).data() + i * p * q, true);
      if (t.needs_grad(ib))
        gemm(true, false, q, r, p, t.value(ia).data() + i * p * q, gi, t.grad(ib).data() + i * q * r, true);
    }
  });
}

Var bmm_nt(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 3 || bv.rank() != 3 || av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(2))
    throw ShapeError("bmm_nt shape mismatch: " + shape_str(av.shape()) + " x " + shape_str(bv.shape()) + "^T");
  const std::size_t n = av.dim(0), p = av.dim(1), q = av.dim(2), r = bv.dim(1);
  Tensor out({n, p, r});
  for (std::size_t i = 0; i < n; ++i)
    gemm(false, true, p, r, q, av.data() + i * p * q, bv.data() + i * r * q, out.data() + i * p * r, false);
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib, n, p, q, r](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    for (std::size_t i = 0; i < n; ++i) {
      const float* gi = g.data() + i * p * r;
      if (t.needs_grad(ia))
        gemm(false, false, p, q, r, gi, t.value(ib).data() + i * r * q, t.grad(ia).data() + i * p * q, true);
      if (t.needs_grad(ib))
        gemm(true, false, r, q, p, gi, t.value(ia).data() + i * p * q, t.grad(ib).data() + i * r * q, true);
    }
  });
}

Var add(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  if (a.shape() != b.shape())
    throw ShapeError("add shape mismatch: " + shape_str(a.shape()) + " + " + shape_str(b.shape()));
  Tensor out = a.value();
  add_into(out, b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.needs_grad(ia)) add_into(t.grad(ia), g);
    if (t.needs_grad(ib)) add_into(t.grad(ib), g);
  });
}

Var add_broadcast(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (bs.size() > as.size() || !std::equal(bs.begin(), bs.end(), as.end() - static_cast<std::ptrdiff_t>(bs.size())))
    throw ShapeError("add_broadcast: " + shape_str(bs) + " is not a suffix of " + shape_str(as));
  const std::size_t inner = shape_numel(bs), outer = a.value().numel() / inner;
  Tensor out = a.value();
  const float* bd = b.value().data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += bd[i];
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib, inner, outer](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.needs_grad(ia)) add_into(t.grad(ia), g);
    if (t.needs_grad(ib)) {
      float* gb = t.grad(ib).data();
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) gb[i] += g[o * inner + i];
    }
  });
}

Var scale(const Var& x, float factor) {
  Tape& tape = tape_of(x);
  Tensor out = x.value();
  for (auto& v : out.values()) v *= factor;
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix, factor](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += factor * g[i];
  });
}

Var relu(const Var& x) {
  Tape& tape = tape_of(x);
  Tensor out = x.value();
  for (auto& v : out.values()) v = v > 0.0f ? v : 0.0f;
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(ix);
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.numel(); ++i)
      if (xv[i] > 0.0f) gx[i] += g[i];
  });
}

Var sigmoid(const Var& x) {
  Tape& tape = tape_of(x);
  Tensor out = x.value();
  for (auto& v : out.values()) v = 1.0f / (1.0f + std::exp(-v));
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i] * y[i] * (1.0f - y[i]);
  });
}

Var softmax_lastdim(const Var& x) {
  Tape& tape = tape_of(x);
  const std::size_t d = last_dim(x.shape());
  Tensor out = x.value();
  const std::size_t rows = out.numel() / d;
  for (std::size_t r = 0; r < rows; ++r) {
    float* row = out.data() + r * d;
    const float mx = *std::max_element(row, row + d);
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = std::exp(row[j] - mx);
      total += row[j];
    }
    const auto inv = static_cast<float>(1.0 / total);
    for (std::size_t j = 0; j < d; ++j) row[j] *= inv;
  }
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix, rows, d](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      const float* gr = g.data() + r * d;
      const float* yr = y.data() + r * d;
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += static_cast<double>(gr[j]) * yr[j];
      const auto fdot = static_cast<float>(dot);
      float* gxr = gx.data() + r * d;
      for (std::size_t j = 0; j < d; ++j) gxr[j] += yr[j] * (gr[j] - fdot);
    }
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, float eps) {
  Tape& tape = tape_of(x);
  const std::size_t d = last_dim(x.shape());
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d})
    throw ShapeError("layer_norm: gain " + shape_str(gain.shape()) + " / bias " + shape_str(bias.shape()) +
                     " do not match feature extent of " + shape_str(x.shape()));
  const Tensor& xv = x.value();
  const std::size_t rows = xv.numel() / d;
  auto xhat = std::make_shared<std::vector<float>>(xv.numel());
  auto rstd = std::make_shared<std::vector<float>>(rows);
  Tensor out(xv.shape());
  const float* gv = gain.value().data();
  const float* bv = bias.value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const float* xr = xv.data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(d);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = static_cast<float>(rs);
    for (std::size_t j = 0; j < d; ++j) {
      const auto h = static_cast<float>((xr[j] - mean) * rs);
      (*xhat)[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return tape.record(std::move(out), {x, gain, bias}, [ix, ig, ib, rows, d, xhat, rstd](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const float* gv = t.value(ig).data();
    if (t.needs_grad(ig) || t.needs_grad(ib)) {
      float* gg = t.needs_grad(ig) ? t.grad(ig).data() : nullptr;
      float* gb = t.needs_grad(ib) ? t.grad(ib).data() : nullptr;
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) {
          if (gg) gg[j] += g[r * d + j] * (*xhat)[r * d + j];
          if (gb) gb[j] += g[r * d + j];
        }
    }
    if (!t.needs_grad(ix)) return;
    float* gx = t.grad(ix).data();
    std::vector<float> dy(d);
    for (std::size_t r = 0; r < rows; ++r) {
      double mean_dy = 0.0, mean_dy_xhat = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        dy[j] = g[r * d + j] * gv[j];
        mean_dy += dy[j];
        mean_dy_xhat += static_cast<double>(dy[j]) * (*xhat)[r * d + j];
      }
      mean_dy /= static_cast<double>(d);
      mean_dy_xhat /= static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j)
        gx[r * d + j] += (*rstd)[r] * static_cast<float>(dy[j] - mean_dy - (*xhat)[r * d + j] * mean_dy_xhat);
    }
  });
}

Var dropout(const Var& x, float rate, std::mt19937_64& rng) {
  if (rate <= 0.0f) return x;
  if (rate >= 1.0f) throw ConfigError("dropout rate must be below 1");
  Tape& tape = tape_of(x);
  auto mask = std::make_shared<std::vector<float>>(x.value().numel());
  std::bernoulli_distribution keep(1.0 - rate);
  const float scale_kept = 1.0f / (1.0f - rate);
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) {
    (*mask)[i] = keep(rng) ? scale_kept : 0.0f;
    out[i] *= (*mask)[i];
  }
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix, mask](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i] * (*mask)[i];
  });
}

Var embedding_lookup(std::span<const std::int32_t> ids, const Shape& out_prefix, const Var& table) {
  Tape& tape = tape_of(table);
  const Tensor& tv = table.value();
  if (tv.rank() != 2) throw ShapeError("embedding table must be rank 2, got " + shape_str(tv.shape()));
  if (shape_numel(out_prefix) != ids.size())
    throw ShapeError("embedding output prefix " + shape_str(out_prefix) + " does not hold " +
                     std::to_string(ids.size()) + " ids");
  const std::size_t v = tv.dim(0), d = tv.dim(1);
  for (auto id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= v)
      throw IndexError("token id " + std::to_string(id) + " outside embedding table of " + std::to_string(v) + " rows");
  Shape shape = out_prefix;
  shape.push_back(d);
  Tensor out(shape);
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy(tv.data() + static_cast<std::size_t>(ids[i]) * d, tv.data() + (static_cast<std::size_t>(ids[i]) + 1) * d,
              out.data() + i * d);
  auto saved = std::make_shared<std::vector<std::int32_t>>(ids.begin(), ids.end());
  const std::size_t it = table.id();
  return tape.record(std::move(out), {table}, [it, saved, d](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    float* gt = t.grad(it).data();
    for (std::size_t i = 0; i < saved->size(); ++i) {
      float* row = gt + static_cast<std::size_t>((*saved)[i]) * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += g[i * d + j];
    }
  });
}

Var reshape(const Var& x, Shape shape) {
  Tape& tape = tape_of(x);
  Tensor out = x.value().reshaped(std::move(shape));
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix](Tape& t, std::size_t self) { add_into(t.grad(ix), t.grad(self)); });
}

Var slice_rows(const Var& x, std::size_t start, std::size_t len) {
  Tape& tape = tape_of(x);
  const Shape& s = x.shape();
  if (s.size() != 3 || start + len > s[1])
    throw ShapeError("slice_rows [" + std::to_string(start) + ", " + std::to_string(start + len) + ") of " + shape_str(s));
  const std::size_t b = s[0], l = s[1], d = s[2];
  Tensor out({b, len, d});
  const float* xv = x.value().data();
  for (std::size_t i = 0; i < b; ++i)
    std::copy(xv + (i * l + start) * d, xv + (i * l + start + len) * d, out.data() + i * len * d);
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix, b, l, d, start, len](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    float* gx = t.grad(ix).data();
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t k = 0; k < len * d; ++k) gx[(i * l + start) * d + k] += g[i * len * d + k];
  });
}

Var sum_rows(const Var& x) {
  Tape& tape = tape_of(x);
  const Shape& s = x.shape();
  if (s.size() != 3) throw ShapeError("sum_rows needs rank 3, got " + shape_str(s));
  const std::size_t b = s[0], l = s[1], d = s[2];
  Tensor out({b, d});
  const float* xv = x.value().data();
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t r = 0; r < l; ++r)
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] += xv[(i * l + r) * d + j];
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix, b, l, d](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    float* gx = t.grad(ix).data();
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t r = 0; r < l; ++r)
        for (std::size_t j = 0; j < d; ++j) gx[(i * l + r) * d + j] += g[i * d + j];
  });
}

namespace {

// Copies between [b, l, h*dk] and [b*h, l, dk]; `to_heads` selects direction.
void permute_heads(const float* src, float* dst, std::size_t b, std::size_t l, std::size_t h, std::size_t dk,
                   bool to_heads, bool accumulate) {
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t hi = 0; hi < h; ++hi)
      for (std::size_t t = 0; t < l; ++t) {
        const std::size_t flat = (bi * l + t) * h * dk + hi * dk;
        const std::size_t head = ((bi * h + hi) * l + t) * dk;
        const float* s = src + (to_heads ? flat : head);
        float* d = dst + (to_heads ? head : flat);
        for (std::size_t k = 0; k < dk; ++k) d[k] = accumulate ? d[k] + s[k] : s[k];
      }
}

}  // namespace

Var split_heads(const Var& x, std::size_t heads) {
  Tape& tape = tape_of(x);
  const Shape& s = x.shape();
  if (s.size() != 3 || heads == 0 || s[2] % heads != 0)
    throw ShapeError("split_heads: " + shape_str(s) + " into " + std::to_string(heads) + " heads");
  const std::size_t b = s[0], l = s[1], dk = s[2] / heads;
  Tensor out({b * heads, l, dk});
  permute_heads(x.value().data(), out.data(), b, l, heads, dk, true, false);
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix, b, l, heads, dk](Tape& t, std::size_t self) {
    permute_heads(t.grad(self).data(), t.grad(ix).data(), b, l, heads, dk, false, true);
  });
}

Var merge_heads(const Var& x, std::size_t heads) {
  Tape& tape = tape_of(x);
  const Shape& s = x.shape();
  if (s.size() != 3 || heads == 0 || s[0] % heads != 0)
    throw ShapeError("merge_heads: " + shape_str(s) + " from " + std::to_string(heads) + " heads");
  const std::size_t b = s[0] / heads, l = s[1], dk = s[2];
  Tensor out({b, l, heads * dk});
  permute_heads(x.value().data(), out.data(), b, l, heads, dk, false, false);
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix, b, l, heads, dk](Tape& t, std::size_t self) {
    permute_heads(t.grad(self).data(), t.grad(ix).data(), b, l, heads, dk, true, true);
  });
}

Var sum(const Var& x) {
  Tape& tape = tape_of(x);
  double total = 0.0;
  for (float v : x.value().values()) total += v;
  Tensor out(Shape{}, static_cast<float>(total));
  const std::size_t ix = x.id();
  return tape.record(std::move(out), {x}, [ix](Tape& t, std::size_t self) {
    const float g = t.grad(self)[0];
    for (auto& v : t.grad(ix).values()) v += g;
  });
}

Var bce_loss(const Var& p, std::span<const float> labels) {
  Tape& tape = tape_of(p);
  const Tensor& pv = p.value();
  if (pv.numel() != labels.size() || labels.empty())
    throw ShapeError("bce_loss: " + std::to_string(pv.numel()) + " probabilities vs " +
                     std::to_string(labels.size()) + " labels");
  static constexpr float kLo = 1e-7f, kHi = 1.0f - 1e-7f;
  const std::size_t n = labels.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = std::clamp(pv[i], kLo, kHi);
    total -= labels[i] * std::log(q) + (1.0 - labels[i]) * std::log(1.0 - q);
  }
  Tensor out(Shape{}, static_cast<float>(total / static_cast<double>(n)));
  auto y = std::make_shared<std::vector<float>>(labels.begin(), labels.end());
  const std::size_t ip = p.id();
  return tape.record(std::move(out), {p}, [ip, y, n](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0] / static_cast<double>(n);
    const Tensor& pv = t.value(ip);
    Tensor& gp = t.grad(ip);
    for (std::size_t i = 0; i < n; ++i) {
      const double q = std::clamp(pv[i], kLo, kHi);
      gp[i] += static_cast<float>(g * (q - (*y)[i]) / (q * (1.0 - q)));
    }
  });
}

Var ce_loss(const Var& logits, std::span<const std::int32_t> targets) {
  Tape& tape = tape_of(logits);
  const Tensor& lv = logits.value();
  const std::size_t v = last_dim(lv.shape());
  const std::size_t rows = lv.numel() / v;
  if (targets.size() != rows)
    throw ShapeError("ce_loss: " + std::to_string(rows) + " positions vs " + std::to_string(targets.size()) + " targets");
  for (auto tgt : targets)
    if (tgt < 0 || static_cast<std::size_t>(tgt) >= v)
      throw IndexError("target id " + std::to_string(tgt) + " outside " + std::to_string(v) + " classes");
  auto probs = std::make_shared<std::vector<float>>(lv.numel());
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = lv.data() + r * v;
    const float mx = *std::max_element(row, row + v);
    double z = 0.0;
    for (std::size_t j = 0; j < v; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
    const double log_z = std::log(z) + mx;
    total += log_z - row[targets[r]];
    for (std::size_t j = 0; j < v; ++j) (*probs)[r * v + j] = static_cast<float>(std::exp(row[j] - log_z));
  }
  Tensor out(Shape{}, static_cast<float>(total / static_cast<double>(rows)));
  auto tg = std::make_shared<std::vector<std::int32_t>>(targets.begin(), targets.end());
  const std::size_t il = logits.id();
  return tape.record(std::move(out), {logits}, [il, probs, tg, rows, v](Tape& t, std::size_t self) {
    const float g = t.grad(self)[0] / static_cast<float>(rows);
    float* gl = t.grad(il).data();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < v; ++j) gl[r * v + j] += g * (*probs)[r * v + j];
      gl[r * v + static_cast<std::size_t>((*tg)[r])] -= g;
    }
  });
}

}  // namespace tracefix::nn
