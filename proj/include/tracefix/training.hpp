#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "tracefix/anomaly.hpp"
#include "tracefix/model.hpp"

namespace tracefix {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  float lr = 1e-3f;
  std::uint64_t seed = 0;
  std::size_t patience = 5;            // epochs without validation improvement; 0 disables
  double validation_fraction = 0.1;    // of the training dataset, in [0, 0.5]
  std::optional<std::size_t> max_steps;  // stop after this many optimizer steps

  void validate() const;
};

struct EpochMetrics {
  double detect_loss = 0.0;
  double reconstruct_loss = 0.0;
  double total_loss = 0.0;
  double detection_accuracy = 0.0;
  double token_accuracy = 0.0;  // over non-[PAD] target positions
  double seconds = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t steps = 0;  // cumulative optimizer steps
  EpochMetrics train;
  std::optional<EpochMetrics> validation;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  std::size_t steps = 0;
};

struct JointLoss {
  nn::Var total;
  nn::Var detect;
  nn::Var reconstruct;
};

// L = L_detect + L_reconstruct; both mean-reduced over the batch (and positions).
JointLoss joint_loss(const BatchOutput& out, std::span<const LabeledTrace* const> items);

struct LossValues {
  double total = 0.0;
  double detect = 0.0;
  double reconstruct = 0.0;
};
LossValues joint_loss(const ForwardOutput& out, const LabeledTrace& item);

struct TrainHooks {
  std::ostream* metrics_jsonl = nullptr;                   // one JSON object per epoch
  std::optional<std::filesystem::path> best_checkpoint;    // rewritten whenever validation improves
  std::function<void(const EpochRecord&)> on_epoch;
};

// Mini-batch Adam on the joint loss. On return `model` holds the parameters of
// the best epoch (lowest validation total loss, or training loss without a
// validation split).
TrainResult train(Model& model, const LabeledDataset& dataset, const TrainConfig& cfg, const TrainHooks& hooks = {});

// Forward-only metrics; never touches parameters.
EpochMetrics evaluate_split(const Model& model, const LabeledDataset& dataset, std::size_t batch_size = 64);
EpochMetrics evaluate_split(const Model& model, std::span<const LabeledTrace* const> items, std::size_t batch_size = 64);

nlohmann::json to_json(const EpochMetrics& m);
nlohmann::json to_json(const EpochRecord& r);
nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace tracefix
