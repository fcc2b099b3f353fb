#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tracefix/anomaly.hpp"
#include "tracefix/nn/ops.hpp"
#include "tracefix/nn/tape.hpp"

namespace tracefix {

enum class ModelVariant { TransformerAE, EncoderOnly, DenseAE };

std::string_view to_string(ModelVariant v);
ModelVariant model_variant_from_string(std::string_view name);

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t n_heads_enc = 8;
  std::size_t n_heads_dec = 8;
  std::size_t n_layers_enc = 2;
  std::size_t n_layers_dec = 2;
  std::size_t d_ffn = 64;
  std::size_t vocab_size = 0;  // activities + [PAD], [CLS], [MISSING]
  std::size_t max_len = 0;     // encoder sequence length, [CLS] included
  ModelVariant variant = ModelVariant::TransformerAE;
  // Ablation switches; both off by default.
  bool mask_padding = false;
  float dropout = 0.0f;
  // DenseAE only.
  std::size_t dense_hidden = 128;
  std::size_t dense_bottleneck = 32;
  // Optional activity names for ids 0..vocab_size-4, carried into checkpoints.
  std::vector<std::string> activity_names;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct ForwardOutput {
  float anomaly_prob = 0.5f;
  nn::Tensor logits;  // [max_len - 1, vocab_size]
};

// Anomaly probabilities [B] and correction logits [B, max_len - 1, V].
struct BatchOutput {
  nn::Var probs;
  nn::Var logits;
};

// The detection + correction network and its two baselines. Parameters are
// stored flat in a fixed order; names follow "encoder.0.attn.wq" style paths.
class Model {
public:
  Model(ModelConfig config, std::uint64_t seed);
  Model(ModelConfig config, std::vector<nn::Parameter> params);

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<nn::Parameter>& parameters() noexcept { return params_; }
  const std::vector<nn::Parameter>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;
  nn::Parameter& parameter(std::string_view name);
  const nn::Parameter& parameter(std::string_view name) const;

  // Parameters recorded as tape leaves, in params_ order.
  struct Bound {
    nn::Tape* tape = nullptr;
    std::vector<nn::Var> vars;
  };
  // Trainable leaves: backward() accumulates into the parameters' gradients.
  Bound bind(nn::Tape& tape);
  // Read-only views for inference; safe to use concurrently on separate tapes.
  Bound bind_frozen(nn::Tape& tape) const;

  // tokens: B sequences of length max_len, each starting with [CLS].
  // TransformerAE / EncoderOnly: [B, max_len, d_model]. DenseAE: [B, bottleneck].
  nn::Var encode(const Bound& b, std::span<const TokenSeq> tokens, std::mt19937_64* rng = nullptr) const;
  // sigmoid(Linear(hidden[:, 0])) -> [B]
  nn::Var detect(const Bound& b, const nn::Var& hidden) const;
  // Uses hidden rows 1..max_len-1 only -> [B, max_len - 1, V]
  nn::Var decode(const Bound& b, const nn::Var& hidden, std::span<const TokenSeq> tokens,
                 std::mt19937_64* rng = nullptr) const;
  BatchOutput forward(const Bound& b, std::span<const TokenSeq> tokens, std::mt19937_64* rng = nullptr) const;

  // Frozen forward pass, evaluated in chunks of `chunk` sequences.
  std::vector<ForwardOutput> infer(std::span<const TokenSeq> tokens, std::size_t chunk = 64) const;

private:
  struct BlockIndex {
    std::size_t wq, wk, wv, wo, norm1_gain, norm1_bias, ffn_w1, ffn_b1, ffn_w2, ffn_b2, norm2_gain, norm2_bias;
  };

  std::size_t add_param(const std::string& name, const nn::Shape& shape, std::mt19937_64* rng, nn::InitScheme scheme);
  void build(std::mt19937_64* rng);
  BlockIndex add_block(const std::string& prefix, std::mt19937_64* rng);
  nn::Var block(const Bound& b, const BlockIndex& idx, const nn::Var& x, std::size_t heads,
                const std::optional<nn::Tensor>& mask, std::mt19937_64* rng) const;
  std::optional<nn::Tensor> padding_mask(std::span<const TokenSeq> tokens, std::size_t heads, std::size_t offset) const;
  void check_tokens(std::span<const TokenSeq> tokens) const;

  ModelConfig config_;
  std::vector<nn::Parameter> params_;

  std::size_t token_embed_ = 0, enc_position_ = 0, dec_position_ = 0;
  std::vector<BlockIndex> encoder_, decoder_;
  std::size_t detect_w_ = 0, detect_b_ = 0;
  std::size_t correct_w1_ = 0, correct_b1_ = 0, correct_w2_ = 0, correct_b2_ = 0;
  std::size_t dense_in_w_ = 0, dense_in_b_ = 0, dense_mid_w_ = 0, dense_mid_b_ = 0;
};

// Multi-head self-attention without masking unless `mask` is given
// ([B*heads, L, L] additive). x: [B, L, d]; wq/wk/wv/wo: [d, d], head i owns
// columns i*dk..(i+1)*dk-1 of wq/wk/wv.
nn::Var multi_head_attention(const nn::Var& x, const nn::Var& wq, const nn::Var& wk, const nn::Var& wv,
                             const nn::Var& wo, std::size_t heads, const std::optional<nn::Tensor>& mask = std::nullopt);

// Feed-forward: relu(x W1 + b1) W2 + b2.
nn::Var ffn(const nn::Var& x, const nn::Var& w1, const nn::Var& b1, const nn::Var& w2, const nn::Var& b2);

struct BlockVars {
  nn::Var wq, wk, wv, wo;
  nn::Var norm1_gain, norm1_bias;
  nn::Var ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  nn::Var norm2_gain, norm2_bias;
};

// Post-norm residual block: Z = Norm(MHA(X) + X); out = Norm(FFN(Z) + Z).
nn::Var transformer_block(const nn::Var& x, const BlockVars& p, std::size_t heads,
                          const std::optional<nn::Tensor>& mask = std::nullopt, float dropout = 0.0f,
                          std::mt19937_64* rng = nullptr);

// FNV-1a over parameter names and raw value bytes.
std::uint64_t parameter_checksum(const std::vector<nn::Parameter>& params);

}  // namespace tracefix
