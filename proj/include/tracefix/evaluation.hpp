#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracefix/anomaly.hpp"
#include "tracefix/edit_distance.hpp"
#include "tracefix/model.hpp"

namespace tracefix {

// Positive class = anomalous.
struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  void add(Label predicted, Label actual);
  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct FScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

FScore f_score(const ConfusionCounts& counts);

// Anomalous iff prob > 0.5.
Label classify(float prob);

struct CorrectedTrace {
  TokenSeq tokens;          // [PAD] removed; may still hold [MISSING]
  bool flagged = false;     // contains [MISSING] or came out empty
};

// logits: [L, V]. Argmax per row, ties to the lowest id.
CorrectedTrace correct_trace(const nn::Tensor& logits, const TokenVocab& vocab);

struct TraceEvaluation {
  std::string case_id;
  float anomaly_prob = 0.0f;
  Label predicted = Label::Normal;
  Label actual = Label::Normal;
  CorrectedTrace corrected;
  double similarity_corrected = 0.0;  // S_DL(corrected, original)
  double similarity_input = 0.0;      // S_DL(input, original)
};

struct EvalReport {
  ConfusionCounts counts;
  double f_score = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double similarity_corrected_anomalous = 0.0;
  double similarity_input_anomalous = 0.0;
  double similarity_corrected_normal = 0.0;
  std::size_t anomalous_traces = 0;
  std::size_t normal_traces = 0;
  std::size_t flagged_traces = 0;
  double inference_seconds = 0.0;
  nlohmann::json config;  // injection / model settings echoed back
};

// Runs batched inference over the whole dataset; `details`, when given,
// receives one entry per item in dataset order.
EvalReport evaluate_model(const Model& model, const LabeledDataset& dataset, std::size_t chunk = 64,
                          std::vector<TraceEvaluation>* details = nullptr);

// Aggregation alone, for callers that already hold per-trace results.
EvalReport summarize(std::span<const TraceEvaluation> traces);

// timing=false drops inference_seconds so repeated runs compare byte-equal.
nlohmann::json to_json(const EvalReport& r, bool timing = true);
EvalReport eval_report_from_json(const nlohmann::json& j);
std::string eval_csv_header();
std::string eval_csv_row(const EvalReport& r, const std::string& label);

// Per-position decoding: one single-sequence forward pass per output position,
// each contributing only that position's argmax. Used as the iterative baseline.
CorrectedTrace sequential_correct(const Model& model, const TokenSeq& input, const TokenVocab& vocab);

}  // namespace tracefix
