#include "tracefix/model.hpp"

#include <cmath>
#include <cstring>

#include "tracefix/error.hpp"

namespace tracefix {

using nn::InitScheme;
using nn::Shape;
using nn::Tensor;
using nn::Var;

std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::TransformerAE: return "transformer-ae";
    case ModelVariant::EncoderOnly: return "encoder-only";
    case ModelVariant::DenseAE: return "dense-ae";
  }
  return "?";
}

ModelVariant model_variant_from_string(std::string_view name) {
  for (auto v : {ModelVariant::TransformerAE, ModelVariant::EncoderOnly, ModelVariant::DenseAE})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown model variant '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (vocab_size < 4) throw ConfigError("vocab_size must cover at least one activity and three special tokens");
  if (max_len < 2) throw ConfigError("max_len must be at least 2");
  if (!activity_names.empty() && activity_names.size() + 3 != vocab_size)
    throw ConfigError("activity_names lists " + std::to_string(activity_names.size()) + " names for vocab_size " +
                      std::to_string(vocab_size));
  if (variant == ModelVariant::DenseAE) {
    if (dense_hidden == 0 || dense_bottleneck == 0) throw ConfigError("dense-ae layer widths must be positive");
    return;
  }
  if (d_model == 0 || d_ffn == 0) throw ConfigError("d_model and d_ffn must be positive");
  if (n_heads_enc == 0 || d_model % n_heads_enc != 0)
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by " + std::to_string(n_heads_enc) +
                      " encoder heads");
  if (variant == ModelVariant::TransformerAE && (n_heads_dec == 0 || d_model % n_heads_dec != 0))
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by " + std::to_string(n_heads_dec) +
                      " decoder heads");
  if (!(dropout >= 0.0f && dropout < 1.0f)) throw ConfigError("dropout must lie in [0, 1)");
}

Var multi_head_attention(const Var& x, const Var& wq, const Var& wk, const Var& wv, const Var& wo, std::size_t heads,
                         const std::optional<Tensor>& mask) {
  const Shape& s = x.shape();
  if (s.size() != 3) throw ShapeError("attention input must be [batch, len, d_model], got " + nn::shape_str(s));
  const std::size_t d = s[2];
  if (heads == 0 || d % heads != 0)
    throw ShapeError("d_model " + std::to_string(d) + " not divisible by " + std::to_string(heads) + " heads");
  const float inv_sqrt_dk = 1.0f / std::sqrt(static_cast<float>(d / heads));
  Var q = nn::split_heads(nn::matmul(x, wq), heads);
  Var k = nn::split_heads(nn::matmul(x, wk), heads);
  Var v = nn::split_heads(nn::matmul(x, wv), heads);
  Var scores = nn::scale(nn::bmm_nt(q, k), inv_sqrt_dk);
  if (mask) scores = nn::add(scores, x.tape()->constant(*mask));
  Var ctx = nn::bmm(nn::softmax_lastdim(scores), v);
  return nn::matmul(nn::merge_heads(ctx, heads), wo);
}

Var ffn(const Var& x, const Var& w1, const Var& b1, const Var& w2, const Var& b2) {
  return nn::linear(nn::relu(nn::linear(x, w1, b1)), w2, b2);
}

Var transformer_block(const Var& x, const BlockVars& p, std::size_t heads, const std::optional<Tensor>& mask,
                      float dropout, std::mt19937_64* rng) {
  Var attn = multi_head_attention(x, p.wq, p.wk, p.wv, p.wo, heads, mask);
  if (dropout > 0.0f && rng) attn = nn::dropout(attn, dropout, *rng);
  Var z = nn::layer_norm(nn::add(attn, x), p.norm1_gain, p.norm1_bias);
  Var f = ffn(z, p.ffn_w1, p.ffn_b1, p.ffn_w2, p.ffn_b2);
  if (dropout > 0.0f && rng) f = nn::dropout(f, dropout, *rng);
  return nn::layer_norm(nn::add(f, z), p.norm2_gain, p.norm2_bias);
}

std::uint64_t parameter_checksum(const std::vector<nn::Parameter>& params) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : params) {
    mix(p.name.data(), p.name.size());
    mix(p.value.data(), p.value.numel() * sizeof(float));
  }
  return h;
}

Model::Model(ModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  build(&rng);
}

Model::Model(ModelConfig config, std::vector<nn::Parameter> params) : config_(config) {
  config_.validate();
  build(nullptr);
  if (params.size() != params_.size())
    throw ManifestShapeError("expected " + std::to_string(params_.size()) + " parameters for this configuration, got " +
                             std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != params_[i].name)
      throw ManifestShapeError("parameter " + std::to_string(i) + " is '" + params[i].name + "', expected '" +
                               params_[i].name + "'");
    if (params[i].value.shape() != params_[i].value.shape())
      throw ManifestShapeError("parameter '" + params[i].name + "' has shape " +
                               nn::shape_str(params[i].value.shape()) + ", expected " +
                               nn::shape_str(params_[i].value.shape()));
    params_[i].value = std::move(params[i].value);
  }
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

nn::Parameter& Model::parameter(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw IndexError("no parameter named '" + std::string(name) + "'");
}

const nn::Parameter& Model::parameter(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return p;
  throw IndexError("no parameter named '" + std::string(name) + "'");
}

std::size_t Model::add_param(const std::string& name, const Shape& shape, std::mt19937_64* rng, InitScheme scheme) {
  Tensor value = rng ? nn::init_params(shape, *rng, scheme) : Tensor(shape);
  params_.emplace_back(name, std::move(value));
  return params_.size() - 1;
}

Model::BlockIndex Model::add_block(const std::string& prefix, std::mt19937_64* rng) {
  const std::size_t d = config_.d_model, f = config_.d_ffn;
  BlockIndex b{};
  b.wq = add_param(prefix + ".attn.wq", {d, d}, rng, InitScheme::UniformScaled);
  b.wk = add_param(prefix + ".attn.wk", {d, d}, rng, InitScheme::UniformScaled);
  b.wv = add_param(prefix + ".attn.wv", {d, d}, rng, InitScheme::UniformScaled);
  b.wo = add_param(prefix + ".attn.wo", {d, d}, rng, InitScheme::UniformScaled);
  b.norm1_gain = add_param(prefix + ".norm1.gain", {d}, rng, InitScheme::Ones);
  b.norm1_bias = add_param(prefix + ".norm1.bias", {d}, rng, InitScheme::Zeros);
  b.ffn_w1 = add_param(prefix + ".ffn.w1", {d, f}, rng, InitScheme::UniformScaled);
  b.ffn_b1 = add_param(prefix + ".ffn.b1", {f}, rng, InitScheme::Zeros);
  b.ffn_w2 = add_param(prefix + ".ffn.w2", {f, d}, rng, InitScheme::UniformScaled);
  b.ffn_b2 = add_param(prefix + ".ffn.b2", {d}, rng, InitScheme::Zeros);
  b.norm2_gain = add_param(prefix + ".norm2.gain", {d}, rng, InitScheme::Ones);
  b.norm2_bias = add_param(prefix + ".norm2.bias", {d}, rng, InitScheme::Zeros);
  return b;
}

void Model::build(std::mt19937_64* rng) {
  const std::size_t v = config_.vocab_size, l = config_.max_len, d = config_.d_model;
  params_.clear();
  encoder_.clear();
  decoder_.clear();
  if (config_.variant == ModelVariant::DenseAE) {
    const std::size_t h = config_.dense_hidden, z = config_.dense_bottleneck;
    dense_in_w_ = add_param("dense.input.w", {l * v, h}, rng, InitScheme::UniformScaled);
    dense_in_b_ = add_param("dense.input.b", {h}, rng, InitScheme::Zeros);
    dense_mid_w_ = add_param("dense.bottleneck.w", {h, z}, rng, InitScheme::UniformScaled);
    dense_mid_b_ = add_param("dense.bottleneck.b", {z}, rng, InitScheme::Zeros);
    detect_w_ = add_param("head.detect.w", {z, 1}, rng, InitScheme::UniformScaled);
    detect_b_ = add_param("head.detect.b", {1}, rng, InitScheme::Zeros);
    correct_w1_ = add_param("dense.expand.w", {z, h}, rng, InitScheme::UniformScaled);
    correct_b1_ = add_param("dense.expand.b", {h}, rng, InitScheme::Zeros);
    correct_w2_ = add_param("dense.output.w", {h, (l - 1) * v}, rng, InitScheme::UniformScaled);
    correct_b2_ = add_param("dense.output.b", {(l - 1) * v}, rng, InitScheme::Zeros);
    return;
  }
  token_embed_ = add_param("embed.token", {v, d}, rng, InitScheme::UniformScaled);
  enc_position_ = add_param("embed.position", {l, d}, rng, InitScheme::UniformScaled);
  for (std::size_t i = 0; i < config_.n_layers_enc; ++i)
    encoder_.push_back(add_block("encoder." + std::to_string(i), rng));
  detect_w_ = add_param("head.detect.w", {d, 1}, rng, InitScheme::UniformScaled);
  detect_b_ = add_param("head.detect.b", {1}, rng, InitScheme::Zeros);
  if (config_.variant == ModelVariant::TransformerAE) {
    dec_position_ = add_param("decoder.position", {l - 1, d}, rng, InitScheme::UniformScaled);
    for (std::size_t i = 0; i < config_.n_layers_dec; ++i)
      decoder_.push_back(add_block("decoder." + std::to_string(i), rng));
    correct_w1_ = add_param("head.correct.w", {d, v}, rng, InitScheme::UniformScaled);
    correct_b1_ = add_param("head.correct.b", {v}, rng, InitScheme::Zeros);
  } else {
    const std::size_t f = config_.d_ffn;
    correct_w1_ = add_param("head.correct.w1", {d, f}, rng, InitScheme::UniformScaled);
    correct_b1_ = add_param("head.correct.b1", {f}, rng, InitScheme::Zeros);
    correct_w2_ = add_param("head.correct.w2", {f, v}, rng, InitScheme::UniformScaled);
    correct_b2_ = add_param("head.correct.b2", {v}, rng, InitScheme::Zeros);
  }
}

Model::Bound Model::bind(nn::Tape& tape) {
  Bound b{&tape, {}};
  b.vars.reserve(params_.size());
  for (auto& p : params_) b.vars.push_back(tape.parameter(p));
  return b;
}

Model::Bound Model::bind_frozen(nn::Tape& tape) const {
  Bound b{&tape, {}};
  b.vars.reserve(params_.size());
  for (const auto& p : params_) b.vars.push_back(tape.view(p.value));
  return b;
}

void Model::check_tokens(std::span<const TokenSeq> tokens) const {
  if (tokens.empty()) throw ShapeError("empty batch");
  const auto cls = static_cast<Token>(config_.vocab_size - 2);
  for (const auto& seq : tokens) {
    if (seq.size() != config_.max_len)
      throw ShapeError("input sequence has length " + std::to_string(seq.size()) + ", model expects " +
                       std::to_string(config_.max_len));
    if (seq.front() != cls) throw DataError("input sequence does not start with the [CLS] token");
  }
}

std::optional<Tensor> Model::padding_mask(std::span<const TokenSeq> tokens, std::size_t heads,
                                          std::size_t offset) const {
  if (!config_.mask_padding) return std::nullopt;
  const auto pad = static_cast<Token>(config_.vocab_size - 3);
  const std::size_t l = config_.max_len - offset, b = tokens.size();
  Tensor mask({b * heads, l, l});
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t key = 0; key < l; ++key) {
      if (tokens[i][key + offset] != pad) continue;
      for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t q = 0; q < l; ++q) mask[((i * heads + h) * l + q) * l + key] = -1e9f;
    }
  return mask;
}

Var Model::block(const Bound& b, const BlockIndex& idx, const Var& x, std::size_t heads,
                 const std::optional<Tensor>& mask, std::mt19937_64* rng) const {
  const auto& v = b.vars;
  BlockVars p{v[idx.wq],     v[idx.wk],     v[idx.wv],     v[idx.wo],         v[idx.norm1_gain], v[idx.norm1_bias],
              v[idx.ffn_w1], v[idx.ffn_b1], v[idx.ffn_w2], v[idx.ffn_b2], v[idx.norm2_gain], v[idx.norm2_bias]};
  return transformer_block(x, p, heads, mask, config_.dropout, rng);
}

Var Model::encode(const Bound& b, std::span<const TokenSeq> tokens, std::mt19937_64* rng) const {
  check_tokens(tokens);
  const std::size_t batch = tokens.size(), l = config_.max_len, v = config_.vocab_size;
  std::vector<std::int32_t> ids;
  ids.reserve(batch * l);
  if (config_.variant == ModelVariant::DenseAE) {
    // One-hot rows flattened position-major: row index = position * V + token.
    for (const auto& seq : tokens)
      for (std::size_t pos = 0; pos < l; ++pos) ids.push_back(static_cast<std::int32_t>(pos * v) + seq[pos]);
    Var summed = nn::sum_rows(nn::embedding_lookup(ids, {batch, l}, b.vars[dense_in_w_]));
    Var hidden = nn::relu(nn::add_broadcast(summed, b.vars[dense_in_b_]));
    return nn::relu(nn::linear(hidden, b.vars[dense_mid_w_], b.vars[dense_mid_b_]));
  }
  for (const auto& seq : tokens) ids.insert(ids.end(), seq.begin(), seq.end());
  Var x = nn::add_broadcast(nn::embedding_lookup(ids, {batch, l}, b.vars[token_embed_]), b.vars[enc_position_]);
  const auto mask = padding_mask(tokens, config_.n_heads_enc, 0);
  for (const auto& blk : encoder_) x = block(b, blk, x, config_.n_heads_enc, mask, rng);
  return x;
}

Var Model::detect(const Bound& b, const Var& hidden) const {
  Var features = hidden;
  if (config_.variant != ModelVariant::DenseAE) {
    const std::size_t batch = hidden.shape().at(0);
    features = nn::reshape(nn::slice_rows(hidden, 0, 1), {batch, config_.d_model});
  }
  Var p = nn::sigmoid(nn::linear(features, b.vars[detect_w_], b.vars[detect_b_]));
  return nn::reshape(p, {features.shape()[0]});
}

Var Model::decode(const Bound& b, const Var& hidden, std::span<const TokenSeq> tokens, std::mt19937_64* rng) const {
  const std::size_t l = config_.max_len, v = config_.vocab_size;
  const std::size_t batch = hidden.shape().at(0);
  switch (config_.variant) {
    case ModelVariant::DenseAE: {
      Var h = nn::relu(nn::linear(hidden, b.vars[correct_w1_], b.vars[correct_b1_]));
      return nn::reshape(nn::linear(h, b.vars[correct_w2_], b.vars[correct_b2_]), {batch, l - 1, v});
    }
    case ModelVariant::EncoderOnly: {
      Var rows = nn::slice_rows(hidden, 1, l - 1);
      return ffn(rows, b.vars[correct_w1_], b.vars[correct_b1_], b.vars[correct_w2_], b.vars[correct_b2_]);
    }
    case ModelVariant::TransformerAE: break;
  }
  Var x = nn::add_broadcast(nn::slice_rows(hidden, 1, l - 1), b.vars[dec_position_]);
  const auto mask = tokens.empty() ? std::nullopt : padding_mask(tokens, config_.n_heads_dec, 1);
  for (const auto& blk : decoder_) x = block(b, blk, x, config_.n_heads_dec, mask, rng);
  return nn::linear(x, b.vars[correct_w1_], b.vars[correct_b1_]);
}

BatchOutput Model::forward(const Bound& b, std::span<const TokenSeq> tokens, std::mt19937_64* rng) const {
  Var hidden = encode(b, tokens, rng);
  return BatchOutput{detect(b, hidden), decode(b, hidden, tokens, rng)};
}

std::vector<ForwardOutput> Model::infer(std::span<const TokenSeq> tokens, std::size_t chunk) const {
  if (chunk == 0) chunk = 1;
  std::vector<ForwardOutput> out;
  out.reserve(tokens.size());
  const std::size_t rows = config_.max_len - 1, v = config_.vocab_size;
  for (std::size_t start = 0; start < tokens.size(); start += chunk) {
    const auto part = tokens.subspan(start, std::min(chunk, tokens.size() - start));
    nn::Tape tape(false);
    const Bound b = bind_frozen(tape);
    const BatchOutput res = forward(b, part);
    const Tensor& probs = res.probs.value();
    const Tensor& logits = res.logits.value();
    for (std::size_t i = 0; i < part.size(); ++i) {
      ForwardOutput f;
      f.anomaly_prob = probs[i];
      f.logits = Tensor({rows, v});
      std::memcpy(f.logits.data(), logits.data() + i * rows * v, rows * v * sizeof(float));
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace tracefix
