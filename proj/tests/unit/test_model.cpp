#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "tracefix/error.hpp"
#include "tracefix/model.hpp"

using namespace tracefix;
using namespace tracefix::nn;

namespace {

ModelConfig small_config(ModelVariant variant = ModelVariant::TransformerAE) {
  ModelConfig c;
  c.d_model = 8;
  c.n_heads_enc = 2;
  c.n_heads_dec = 2;
  c.n_layers_enc = 1;
  c.n_layers_dec = 1;
  c.d_ffn = 12;
  c.vocab_size = 7;  // 4 activities
  c.max_len = 6;
  c.variant = variant;
  c.dense_hidden = 16;
  c.dense_bottleneck = 4;
  return c;
}

std::vector<TokenSeq> random_inputs(std::size_t n, std::uint64_t seed, const ModelConfig& c) {
  std::mt19937_64 rng(seed);
  const TokenVocab vocab{c.vocab_size - 3};
  std::uniform_int_distribution<std::size_t> len(1, c.max_len - 1);
  std::uniform_int_distribution<Token> act(0, static_cast<Token>(vocab.num_activities) - 1);
  std::vector<TokenSeq> out;
  for (std::size_t i = 0; i < n; ++i) {
    ActivitySeq s(len(rng));
    for (auto& t : s) t = act(rng);
    out.push_back(encode_input(s, vocab, c.max_len));
  }
  return out;
}

std::vector<double> layer_norm_ref(const std::vector<double>& row) {
  double mean = 0, var = 0;
  for (double v : row) mean += v;
  mean /= static_cast<double>(row.size());
  for (double v : row) var += (v - mean) * (v - mean);
  var /= static_cast<double>(row.size());
  std::vector<double> out;
  for (double v : row) out.push_back((v - mean) / std::sqrt(var + 1e-5));
  return out;
}

}  // namespace

TEST_CASE("forward shapes for every variant") {
  for (auto variant : {ModelVariant::TransformerAE, ModelVariant::EncoderOnly, ModelVariant::DenseAE}) {
    const ModelConfig c = small_config(variant);
    Model m(c, 3);
    const auto inputs = random_inputs(3, 1, c);
    Tape tape(false);
    const auto out = m.forward(m.bind_frozen(tape), inputs);
    CHECK(out.probs.shape() == Shape{3});
    CHECK(out.logits.shape() == Shape{3, 5, 7});
    CHECK(model_variant_from_string(to_string(variant)) == variant);
  }
  CHECK_THROWS_AS(model_variant_from_string("rnn"), ConfigError);
}

TEST_CASE("model input checks") {
  const ModelConfig c = small_config();
  Model m(c, 3);
  Tape tape(false);
  const auto b = m.bind_frozen(tape);
  std::vector<TokenSeq> no_cls{{0, 1, 4, 4, 4, 4}};
  CHECK_THROWS_AS(m.forward(b, no_cls), DataError);
  std::vector<TokenSeq> short_seq{{5, 0, 1}};
  CHECK_THROWS_AS(m.forward(b, short_seq), ShapeError);
  std::vector<TokenSeq> bad_id{{5, 9, 4, 4, 4, 4}};
  CHECK_THROWS_AS(m.forward(b, bad_id), IndexError);
}

TEST_CASE("config validation") {
  ModelConfig c = small_config();
  c.n_heads_enc = 3;
  CHECK_THROWS_AS(Model(c, 1), ConfigError);
  c = small_config();
  c.vocab_size = 3;
  CHECK_THROWS_AS(Model(c, 1), ConfigError);
  c = small_config();
  c.activity_names = {"a", "b"};
  CHECK_THROWS_AS(Model(c, 1), ConfigError);
  c.activity_names = {"a", "b", "c", "d"};
  CHECK_NOTHROW(Model(c, 1));
}

TEST_CASE("detection reads row 0 only; decoding ignores row 0") {
  const ModelConfig c = small_config();
  Model m(c, 4);
  std::mt19937_64 rng(8);
  Tensor hidden = tftest::random_tensor({2, 6, 8}, rng);
  Tensor rows_changed = hidden, row0_changed = hidden;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t r = 1; r < 6; ++r) rows_changed[(b * 6 + r) * 8 + i] += 0.7f;
      row0_changed[b * 48 + i] -= 0.9f;
    }
  Tape tape(false);
  const auto bound = m.bind_frozen(tape);
  const Tensor p1 = m.detect(bound, tape.constant(hidden)).value();
  const Tensor p2 = m.detect(bound, tape.constant(rows_changed)).value();
  const Tensor p3 = m.detect(bound, tape.constant(row0_changed)).value();
  CHECK(p1 == p2);
  CHECK(p1 != p3);
  const Tensor l1 = m.decode(bound, tape.constant(hidden), {}).value();
  const Tensor l2 = m.decode(bound, tape.constant(row0_changed), {}).value();
  const Tensor l3 = m.decode(bound, tape.constant(rows_changed), {}).value();
  CHECK(l1 == l2);
  CHECK(l1 != l3);
}

TEST_CASE("attention on a hand-sized example") {
  // d = 2, one head, identity projections: softmax(X X^T / sqrt 2) X
  const std::vector<double> x = {1.0, 0.0, 0.0, 2.0, 1.0, 1.0};
  Tape tape(false);
  Var xv = tape.constant(Tensor({1, 3, 2}, std::vector<float>(x.begin(), x.end())));
  Var eye = tape.constant(Tensor({2, 2}, {1, 0, 0, 1}));
  const Tensor out = multi_head_attention(xv, eye, eye, eye, eye, 1).value();
  for (std::size_t q = 0; q < 3; ++q) {
    double w[3], z = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      w[k] = std::exp((x[q * 2] * x[k * 2] + x[q * 2 + 1] * x[k * 2 + 1]) / std::sqrt(2.0));
      z += w[k];
    }
    for (std::size_t j = 0; j < 2; ++j) {
      double want = 0;
      for (std::size_t k = 0; k < 3; ++k) want += w[k] / z * x[k * 2 + j];
      CHECK(out[q * 2 + j] == doctest::Approx(want).epsilon(1e-5));
    }
  }

  // two heads of width 1 each see only their own column
  const Tensor two = multi_head_attention(xv, eye, eye, eye, eye, 2).value();
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t q = 0; q < 3; ++q) {
      double w[3], z = 0, want = 0;
      for (std::size_t k = 0; k < 3; ++k) z += (w[k] = std::exp(x[q * 2 + j] * x[k * 2 + j]));
      for (std::size_t k = 0; k < 3; ++k) want += w[k] / z * x[k * 2 + j];
      CHECK(two[q * 2 + j] == doctest::Approx(want).epsilon(1e-5));
    }
}

TEST_CASE("a block with zero weights reduces to Norm(Norm(X))") {
  std::mt19937_64 rng(6);
  const Tensor x = tftest::random_tensor({2, 3, 4}, rng, -2, 2);
  Tape tape(false);
  Var z44 = tape.constant(Tensor({4, 4}));
  Var one = tape.constant(Tensor({4}, 1.0f)), zero = tape.constant(Tensor({4}));
  Var w1 = tape.constant(Tensor({4, 5})), b1 = tape.constant(Tensor({5})), w2 = tape.constant(Tensor({5, 4}));
  BlockVars p{z44, z44, z44, z44, one, zero, w1, b1, w2, zero, one, zero};
  const Tensor out = transformer_block(tape.constant(x), p, 2).value();
  for (std::size_t r = 0; r < 6; ++r) {
    std::vector<double> row(x.data() + r * 4, x.data() + r * 4 + 4);
    const auto want = layer_norm_ref(layer_norm_ref(row));
    for (std::size_t i = 0; i < 4; ++i) CHECK(out[r * 4 + i] == doctest::Approx(want[i]).epsilon(1e-4));
  }
}

TEST_CASE("embedding lookup equals one-hot times table") {
  std::mt19937_64 rng(2);
  const Tensor table = tftest::random_tensor({5, 3}, rng);
  const std::vector<std::int32_t> ids{4, 0, 2, 2};
  Tensor onehot({4, 5});
  for (std::size_t i = 0; i < ids.size(); ++i) onehot[i * 5 + static_cast<std::size_t>(ids[i])] = 1.0f;
  Tape tape(false);
  Var t = tape.constant(table);
  const Tensor a = embedding_lookup(ids, {4}, t).value();
  const Tensor b = matmul(tape.constant(onehot), t).value();
  CHECK(a == b);
}

TEST_CASE("every parameter receives a gradient") {
  for (auto variant : {ModelVariant::TransformerAE, ModelVariant::EncoderOnly, ModelVariant::DenseAE}) {
    const ModelConfig c = small_config(variant);
    Model m(c, 5);
    const auto inputs = random_inputs(4, 3, c);
    Tape tape;
    const auto out = m.forward(m.bind(tape), inputs);
    std::vector<std::int32_t> targets;
    for (const auto& s : inputs) targets.insert(targets.end(), s.begin() + 1, s.end());
    const std::vector<float> labels{1, 0, 1, 0};
    tape.backward(add(bce_loss(out.probs, labels), ce_loss(out.logits, targets)));
    for (const auto& p : m.parameters()) {
      bool nonzero = false;
      for (float g : p.grad.values()) nonzero = nonzero || g != 0.0f;
      INFO(to_string(variant) << " " << p.name);
      CHECK(nonzero);
    }
  }
}

TEST_CASE("fresh models start undecided") {
  ModelConfig c = small_config();
  c.d_model = 16;
  c.n_heads_enc = c.n_heads_dec = 4;
  c.n_layers_enc = c.n_layers_dec = 2;
  c.max_len = 12;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Model m(c, seed);
    const auto inputs = random_inputs(64, seed, c);
    double mean = 0;
    for (const auto& o : m.infer(inputs)) mean += o.anomaly_prob;
    mean /= 64;
    CHECK(mean > 0.2);
    CHECK(mean < 0.8);
  }
}

TEST_CASE("infer matches forward and is chunk independent") {
  const ModelConfig c = small_config();
  Model m(c, 9);
  const auto inputs = random_inputs(7, 4, c);
  const auto a = m.infer(inputs, 64);
  const auto b = m.infer(inputs, 3);
  Tape tape(false);
  const auto out = m.forward(m.bind_frozen(tape), inputs);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    CHECK(a[i].anomaly_prob == doctest::Approx(out.probs.value()[i]).epsilon(1e-6));
    CHECK(a[i].anomaly_prob == doctest::Approx(b[i].anomaly_prob).epsilon(1e-6));
    for (std::size_t j = 0; j < a[i].logits.numel(); ++j)
      CHECK(a[i].logits[j] == doctest::Approx(out.logits.value()[i * 35 + j]).epsilon(1e-5));
  }
}

TEST_CASE("padding mask keeps real rows independent of padded content") {
  ModelConfig c = small_config();
  c.mask_padding = true;
  Model m(c, 2);
  std::vector<TokenSeq> a{{5, 0, 1, 4, 4, 4}};
  Tape tape(false);
  const auto bound = m.bind_frozen(tape);
  const Tensor h1 = m.encode(bound, a).value();
  m.parameter("embed.position").value[5 * 8] += 3.0f;  // perturb only a padded slot
  const Tensor h2 = m.encode(m.bind_frozen(tape), a).value();
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t i = 0; i < 8; ++i) CHECK(h1[r * 8 + i] == doctest::Approx(h2[r * 8 + i]).epsilon(1e-5));
}

TEST_CASE("parameter lookup and checksum") {
  Model a(small_config(), 1), b(small_config(), 1), c(small_config(), 2);
  CHECK(parameter_checksum(a.parameters()) == parameter_checksum(b.parameters()));
  CHECK(parameter_checksum(a.parameters()) != parameter_checksum(c.parameters()));
  CHECK(a.parameter("head.detect.b").value.numel() == 1);
  CHECK_THROWS_AS(a.parameter("nope"), IndexError);
  CHECK(a.parameter_count() > 0);
}
