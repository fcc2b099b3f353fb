#include "tracefix/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "tracefix/checkpoint.hpp"
#include "tracefix/error.hpp"
#include "tracefix/nn/optim.hpp"

namespace tracefix {

using nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(lr > 0.0f)) throw ConfigError("learning rate must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction <= 0.5))
    throw ConfigError("validation fraction must lie in [0, 0.5]");
  if (max_steps && *max_steps == 0) throw ConfigError("max_steps must be positive when set");
}

JointLoss joint_loss(const BatchOutput& out, std::span<const LabeledTrace* const> items) {
  std::vector<float> labels;
  std::vector<std::int32_t> targets;
  labels.reserve(items.size());
  for (const auto* it : items) {
    labels.push_back(it->label == Label::Anomalous ? 1.0f : 0.0f);
    targets.insert(targets.end(), it->target_tokens.begin(), it->target_tokens.end());
  }
  JointLoss l;
  l.detect = nn::bce_loss(out.probs, labels);
  l.reconstruct = nn::ce_loss(out.logits, targets);
  l.total = nn::add(l.detect, l.reconstruct);
  return l;
}

LossValues joint_loss(const ForwardOutput& out, const LabeledTrace& item) {
  nn::Tape tape(false);
  BatchOutput b{tape.constant(nn::Tensor({1}, {out.anomaly_prob})),
                tape.constant(out.logits.reshaped({1, out.logits.dim(0), out.logits.dim(1)}))};
  const LabeledTrace* ptr = &item;
  const JointLoss l = joint_loss(b, std::span<const LabeledTrace* const>(&ptr, 1));
  return {l.total.value().item(), l.detect.value().item(), l.reconstruct.value().item()};
}

namespace {

// Running sums for one pass over a set of batches.
struct MetricAccumulator {
  double detect = 0.0, reconstruct = 0.0;
  std::size_t items = 0, correct_labels = 0;
  std::size_t tokens = 0, correct_tokens = 0;

  void add(const JointLoss& loss, const BatchOutput& out, std::span<const LabeledTrace* const> batch, Token pad) {
    const double n = static_cast<double>(batch.size());
    detect += loss.detect.value().item() * n;
    reconstruct += loss.reconstruct.value().item() * n;
    items += batch.size();
    const nn::Tensor& probs = out.probs.value();
    const nn::Tensor& logits = out.logits.value();
    const std::size_t rows = logits.dim(1), v = logits.dim(2);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const bool predicted = probs[i] > 0.5f;
      if (predicted == (batch[i]->label == Label::Anomalous)) ++correct_labels;
      for (std::size_t r = 0; r < rows; ++r) {
        const Token target = batch[i]->target_tokens[r];
        if (target == pad) continue;
        const float* row = logits.data() + (i * rows + r) * v;
        const auto arg = static_cast<Token>(std::max_element(row, row + v) - row);
        ++tokens;
        if (arg == target) ++correct_tokens;
      }
    }
  }

  EpochMetrics finish(double seconds) const {
    EpochMetrics m;
    if (items) {
      m.detect_loss = detect / static_cast<double>(items);
      m.reconstruct_loss = reconstruct / static_cast<double>(items);
      m.total_loss = m.detect_loss + m.reconstruct_loss;
      m.detection_accuracy = static_cast<double>(correct_labels) / static_cast<double>(items);
    }
    m.token_accuracy = tokens ? static_cast<double>(correct_tokens) / static_cast<double>(tokens) : 1.0;
    m.seconds = seconds;
    return m;
  }
};

std::vector<TokenSeq> gather_inputs(std::span<const LabeledTrace* const> batch) {
  std::vector<TokenSeq> inputs;
  inputs.reserve(batch.size());
  for (const auto* it : batch) inputs.push_back(it->input_tokens);
  return inputs;
}

void check_compatible(const Model& model, const LabeledDataset& ds) {
  if (ds.max_len != model.config().max_len)
    throw ConfigError("dataset max_len " + std::to_string(ds.max_len) + " does not match model max_len " +
                      std::to_string(model.config().max_len));
  if (ds.vocab.size() != model.config().vocab_size)
    throw ConfigError("dataset vocabulary size " + std::to_string(ds.vocab.size()) +
                      " does not match model vocab_size " + std::to_string(model.config().vocab_size));
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t a, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), tag};
  return std::mt19937_64(seq);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

EpochMetrics evaluate_split(const Model& model, std::span<const LabeledTrace* const> items, std::size_t batch_size) {
  const auto t0 = std::chrono::steady_clock::now();
  if (batch_size == 0) batch_size = 1;
  const auto pad = static_cast<Token>(model.config().vocab_size - 3);
  MetricAccumulator acc;
  for (std::size_t start = 0; start < items.size(); start += batch_size) {
    const auto batch = items.subspan(start, std::min(batch_size, items.size() - start));
    const auto inputs = gather_inputs(batch);
    nn::Tape tape(false);
    const auto bound = model.bind_frozen(tape);
    const BatchOutput out = model.forward(bound, inputs);
    acc.add(joint_loss(out, batch), out, batch, pad);
  }
  return acc.finish(seconds_since(t0));
}

EpochMetrics evaluate_split(const Model& model, const LabeledDataset& dataset, std::size_t batch_size) {
  check_compatible(model, dataset);
  std::vector<const LabeledTrace*> items;
  for (const auto& it : dataset.items) items.push_back(&it);
  return evaluate_split(model, items, batch_size);
}

TrainResult train(Model& model, const LabeledDataset& dataset, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (dataset.items.empty()) throw DataError("cannot train on an empty dataset");
  check_compatible(model, dataset);

  // Seeded train/validation partition of the dataset.
  std::vector<std::size_t> order(dataset.items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto split_rng = stream_rng(cfg.seed, 0, 0x5b117u);
  std::shuffle(order.begin(), order.end(), split_rng);
  auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(order.size()) + 1e-9));
  if (n_val >= order.size()) n_val = 0;
  std::vector<const LabeledTrace*> val_items, train_items;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_val ? val_items : train_items).push_back(&dataset.items[order[i]]);

  TrainResult result;
  nn::AdamState adam;
  adam.lr = cfg.lr;
  nn::zero_grad(model.parameters());
  const auto pad = static_cast<Token>(dataset.vocab.pad());
  std::vector<nn::Parameter> best = model.parameters();
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  auto dropout_rng = stream_rng(cfg.seed, 0, 0xd120u);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto epoch_rng = stream_rng(cfg.seed, epoch, 0xe90cu);
    std::vector<const LabeledTrace*> shuffled = train_items;
    std::shuffle(shuffled.begin(), shuffled.end(), epoch_rng);

    MetricAccumulator acc;
    bool step_cap_hit = false;
    for (std::size_t start = 0, batch_no = 0; start < shuffled.size(); start += cfg.batch_size, ++batch_no) {
      const auto batch = std::span<const LabeledTrace* const>(shuffled).subspan(
          start, std::min(cfg.batch_size, shuffled.size() - start));
      const auto inputs = gather_inputs(batch);
      nn::Tape tape;
      const auto bound = model.bind(tape);
      const BatchOutput out = model.forward(bound, inputs, &dropout_rng);
      const JointLoss loss = joint_loss(out, batch);
      for (const auto& [name, var] : {std::pair{"detect", loss.detect}, std::pair{"reconstruct", loss.reconstruct}})
        if (!std::isfinite(var.value().item()))
          throw NumericError("non-finite " + std::string(name) + " loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_no + 1));
      acc.add(loss, out, batch, pad);
      tape.backward(loss.total);
      nn::adam_step(model.parameters(), adam);
      ++result.steps;
      if (cfg.max_steps && result.steps >= *cfg.max_steps) {
        step_cap_hit = true;
        break;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.steps = result.steps;
    rec.train = acc.finish(seconds_since(t0));
    if (!val_items.empty()) rec.validation = evaluate_split(model, val_items, cfg.batch_size);
    const double monitored = rec.validation ? rec.validation->total_loss : rec.train.total_loss;
    if (!std::isfinite(monitored))
      throw NumericError("non-finite monitored loss after epoch " + std::to_string(epoch));
    if (monitored < best_loss) {
      best_loss = monitored;
      best = model.parameters();
      result.best_epoch = epoch;
      since_best = 0;
      if (hooks.best_checkpoint) save_checkpoint(model, *hooks.best_checkpoint);
    } else {
      ++since_best;
    }
    result.history.push_back(rec);
    if (hooks.metrics_jsonl) *hooks.metrics_jsonl << to_json(rec).dump() << '\n' << std::flush;
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (step_cap_hit) break;
    if (cfg.patience > 0 && since_best >= cfg.patience) break;
  }

  if (result.best_epoch > 0) {
    for (std::size_t i = 0; i < best.size(); ++i) model.parameters()[i].value = std::move(best[i].value);
  }
  nn::zero_grad(model.parameters());
  return result;
}

json to_json(const EpochMetrics& m) {
  return json{{"detect_loss", m.detect_loss},
              {"reconstruct_loss", m.reconstruct_loss},
              {"total_loss", m.total_loss},
              {"detection_accuracy", m.detection_accuracy},
              {"token_accuracy", m.token_accuracy},
              {"seconds", m.seconds}};
}

json to_json(const EpochRecord& r) {
  json j{{"epoch", r.epoch}, {"steps", r.steps}, {"train", to_json(r.train)}};
  if (r.validation) j["validation"] = to_json(*r.validation);
  return j;
}

json to_json(const TrainConfig& c) {
  json j{{"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"lr", c.lr},
         {"seed", c.seed},
         {"patience", c.patience},
         {"validation_fraction", c.validation_fraction}};
  if (c.max_steps) j["max_steps"] = *c.max_steps;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr = j.value("lr", c.lr);
    c.seed = j.value("seed", c.seed);
    c.patience = j.value("patience", c.patience);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    if (j.contains("max_steps") && !j.at("max_steps").is_null()) c.max_steps = j.at("max_steps").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed train config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace tracefix
