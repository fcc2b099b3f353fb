#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "test_support.hpp"
#include "tracefix/error.hpp"
#include "tracefix/training.hpp"

using namespace tracefix;

namespace {

LabeledDataset toy_dataset(std::size_t n = 40) {
  std::vector<std::vector<std::string>> seqs;
  for (std::size_t i = 0; i < n; ++i)
    seqs.push_back(i % 2 ? std::vector<std::string>{"a", "b", "c"} : std::vector<std::string>{"a", "c", "b", "d"});
  const EventLog log = EventLog::from_sequences(seqs);
  InjectionConfig c;
  c.r_case = 0.5;
  c.seed = 3;
  return build_dataset(log, c, extract_variants(log), compute_behavioral_profile(log), max_padded_length(log, c));
}

ModelConfig model_config(const LabeledDataset& ds) {
  ModelConfig c;
  c.d_model = 8;
  c.n_heads_enc = c.n_heads_dec = 2;
  c.n_layers_enc = c.n_layers_dec = 1;
  c.d_ffn = 16;
  c.vocab_size = ds.vocab.size();
  c.max_len = ds.max_len;
  return c;
}

TrainConfig quick(std::size_t epochs = 3) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 8;
  t.lr = 5e-3f;
  t.seed = 17;
  t.patience = 0;
  return t;
}

}  // namespace

TEST_CASE("train config validation and json") {
  TrainConfig t;
  CHECK_NOTHROW(t.validate());
  t.batch_size = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = {};
  t.validation_fraction = 0.6;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = {};
  t.max_steps = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = quick();
  t.max_steps = 9;
  const TrainConfig back = train_config_from_json(to_json(t));
  CHECK(back.epochs == t.epochs);
  CHECK(back.lr == t.lr);
  CHECK(back.max_steps == 9);
  CHECK(back.patience == 0);
}

TEST_CASE("loss of a model with zeroed heads is ln 2 + ln V") {
  const LabeledDataset ds = toy_dataset();
  Model m(model_config(ds), 1);
  for (const char* name : {"head.detect.w", "head.detect.b", "head.correct.w", "head.correct.b"})
    m.parameter(name).value.fill(0.0f);
  const EpochMetrics e = evaluate_split(m, ds, 16);
  const double v = static_cast<double>(ds.vocab.size());
  CHECK(e.detect_loss == doctest::Approx(std::log(2.0)).epsilon(1e-5));
  CHECK(e.reconstruct_loss == doctest::Approx(std::log(v)).epsilon(1e-5));
  CHECK(e.total_loss == doctest::Approx(std::log(2.0) + std::log(v)).epsilon(1e-5));

  const auto out = m.infer(std::vector<TokenSeq>{ds.items[0].input_tokens});
  const LossValues lv = joint_loss(out[0], ds.items[0]);
  CHECK(lv.detect == doctest::Approx(std::log(2.0)).epsilon(1e-5));
  CHECK(lv.reconstruct == doctest::Approx(std::log(v)).epsilon(1e-5));
}

TEST_CASE("joint loss is the sum of its parts") {
  const LabeledDataset ds = toy_dataset();
  Model m(model_config(ds), 2);
  nn::Tape tape;
  std::vector<TokenSeq> inputs;
  std::vector<const LabeledTrace*> items;
  for (std::size_t i = 0; i < 5; ++i) {
    inputs.push_back(ds.items[i].input_tokens);
    items.push_back(&ds.items[i]);
  }
  const auto out = m.forward(m.bind(tape), inputs);
  const JointLoss l = joint_loss(out, items);
  CHECK(l.total.value().item() == doctest::Approx(l.detect.value().item() + l.reconstruct.value().item()));
}

TEST_CASE("zero epochs leave the model untouched") {
  const LabeledDataset ds = toy_dataset();
  Model m(model_config(ds), 4);
  const auto before = parameter_checksum(m.parameters());
  const TrainResult r = train(m, ds, quick(0));
  CHECK(r.history.empty());
  CHECK(r.best_epoch == 0);
  CHECK(r.steps == 0);
  CHECK(parameter_checksum(m.parameters()) == before);
}

TEST_CASE("training lowers the loss and is deterministic") {
  const LabeledDataset ds = toy_dataset();
  Model a(model_config(ds), 5), b(model_config(ds), 5);
  const double start = evaluate_split(a, ds).total_loss;
  std::ostringstream metrics;
  TrainHooks hooks;
  hooks.metrics_jsonl = &metrics;
  std::size_t callbacks = 0;
  hooks.on_epoch = [&](const EpochRecord&) { ++callbacks; };
  const TrainResult ra = train(a, ds, quick(), hooks);
  const TrainResult rb = train(b, ds, quick());
  CHECK(parameter_checksum(a.parameters()) == parameter_checksum(b.parameters()));
  CHECK(ra.history.size() == 3);
  CHECK(callbacks == 3);
  CHECK(ra.history.back().train.total_loss == rb.history.back().train.total_loss);
  CHECK(evaluate_split(a, ds).total_loss < start);
  // 36 training items after a 10% validation split, batches of 8
  CHECK(ra.steps == 3 * 5);
  REQUIRE(ra.history[0].validation);
  std::istringstream lines(metrics.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("epoch") == ++n);
  }
  CHECK(n == 3);
}

TEST_CASE("max_steps caps optimizer steps") {
  const LabeledDataset ds = toy_dataset();
  Model m(model_config(ds), 5);
  TrainConfig t = quick(10);
  t.max_steps = 7;
  const TrainResult r = train(m, ds, t);
  CHECK(r.steps == 7);
  CHECK(r.history.size() == 2);
}

TEST_CASE("early stopping restores the best epoch") {
  const LabeledDataset ds = toy_dataset();
  Model m(model_config(ds), 6);
  TrainConfig t = quick(40);
  t.patience = 2;
  t.lr = 0.05f;
  const TrainResult r = train(m, ds, t);
  REQUIRE(r.best_epoch >= 1);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : r.history) best = std::min(best, e.validation->total_loss);
  CHECK(r.history[r.best_epoch - 1].validation->total_loss == best);
  CHECK(r.history.size() <= r.best_epoch + 2);
}

TEST_CASE("evaluate_split does not modify parameters") {
  const LabeledDataset ds = toy_dataset();
  Model m(model_config(ds), 7);
  const auto before = parameter_checksum(m.parameters());
  const EpochMetrics e = evaluate_split(m, ds, 7);
  CHECK(parameter_checksum(m.parameters()) == before);
  CHECK(e.detection_accuracy >= 0.0);
  CHECK(e.detection_accuracy <= 1.0);
  CHECK(e.token_accuracy >= 0.0);
  CHECK(e.token_accuracy <= 1.0);
  const EpochMetrics f = evaluate_split(m, ds, 64);
  CHECK(e.total_loss == doctest::Approx(f.total_loss).epsilon(1e-6));
}

TEST_CASE("non-finite loss raises NumericError with its location") {
  const LabeledDataset ds = toy_dataset();
  Model m(model_config(ds), 8);
  m.parameter("head.detect.b").value[0] = std::numeric_limits<float>::quiet_NaN();
  try {
    train(m, ds, quick());
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string what = e.what();
    CHECK(what.find("epoch 1") != std::string::npos);
    CHECK(what.find("detect") != std::string::npos);
  }
}

TEST_CASE("dataset and model must agree") {
  const LabeledDataset ds = toy_dataset();
  ModelConfig c = model_config(ds);
  c.max_len += 1;
  Model m(c, 1);
  CHECK_THROWS_AS(train(m, ds, quick()), ConfigError);
  CHECK_THROWS_AS(train(m, LabeledDataset{}, quick()), Error);
}
