#include "tracefix/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "tracefix/csv.hpp"
#include "tracefix/error.hpp"

namespace tracefix {

using nlohmann::json;

void ConfusionCounts::add(Label predicted, Label actual) {
  const bool p = predicted == Label::Anomalous, a = actual == Label::Anomalous;
  if (p && a) ++tp;
  else if (p) ++fp;
  else if (a) ++fn;
  else ++tn;
}

FScore f_score(const ConfusionCounts& c) {
  FScore s;
  if (c.tp + c.fp) s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn) s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

Label classify(float prob) { return prob > 0.5f ? Label::Anomalous : Label::Normal; }

namespace {

CorrectedTrace correct_rows(const float* data, std::size_t rows, std::size_t v, const TokenVocab& vocab) {
  CorrectedTrace out;
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = data + r * v;
    const auto tok = static_cast<Token>(std::max_element(row, row + v) - row);
    if (tok == vocab.pad() || tok == vocab.cls()) continue;
    if (tok == vocab.missing()) out.flagged = true;
    out.tokens.push_back(tok);
  }
  if (out.tokens.empty()) out.flagged = true;
  return out;
}

double mean(double sum, std::size_t n) { return n ? sum / static_cast<double>(n) : 0.0; }

}  // namespace

CorrectedTrace correct_trace(const nn::Tensor& logits, const TokenVocab& vocab) {
  if (logits.rank() != 2 || logits.dim(1) != vocab.size())
    throw ShapeError("correction logits must be [L, " + std::to_string(vocab.size()) + "], got " +
                     nn::shape_str(logits.shape()));
  return correct_rows(logits.data(), logits.dim(0), logits.dim(1), vocab);
}

EvalReport summarize(std::span<const TraceEvaluation> traces) {
  EvalReport r;
  double corr_anom = 0.0, input_anom = 0.0, corr_norm = 0.0;
  for (const auto& t : traces) {
    r.counts.add(t.predicted, t.actual);
    if (t.corrected.flagged) ++r.flagged_traces;
    if (t.actual == Label::Anomalous) {
      ++r.anomalous_traces;
      corr_anom += t.similarity_corrected;
      input_anom += t.similarity_input;
    } else {
      ++r.normal_traces;
      corr_norm += t.similarity_corrected;
    }
  }
  const FScore s = f_score(r.counts);
  r.precision = s.precision;
  r.recall = s.recall;
  r.f_score = s.f1;
  r.similarity_corrected_anomalous = mean(corr_anom, r.anomalous_traces);
  r.similarity_input_anomalous = mean(input_anom, r.anomalous_traces);
  r.similarity_corrected_normal = mean(corr_norm, r.normal_traces);
  return r;
}

EvalReport evaluate_model(const Model& model, const LabeledDataset& dataset, std::size_t chunk,
                          std::vector<TraceEvaluation>* details) {
  if (dataset.max_len != model.config().max_len)
    throw ConfigError("dataset max_len " + std::to_string(dataset.max_len) + " does not match model max_len " +
                      std::to_string(model.config().max_len));
  if (dataset.vocab.size() != model.config().vocab_size)
    throw ConfigError("dataset vocabulary does not match the model's");

  std::vector<TokenSeq> inputs;
  inputs.reserve(dataset.items.size());
  for (const auto& it : dataset.items) inputs.push_back(it.input_tokens);

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<ForwardOutput> outputs = model.infer(inputs, chunk);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<TraceEvaluation> traces;
  traces.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const LabeledTrace& item = dataset.items[i];
    TraceEvaluation t;
    t.case_id = item.case_id;
    t.anomaly_prob = outputs[i].anomaly_prob;
    t.predicted = classify(t.anomaly_prob);
    t.actual = item.label;
    t.corrected = correct_trace(outputs[i].logits, dataset.vocab);
    const TokenSeq original = item.original();
    t.similarity_corrected = dl_similarity(t.corrected.tokens, original);
    t.similarity_input = dl_similarity(item.mutated(), original);
    traces.push_back(std::move(t));
  }
  EvalReport r = summarize(traces);
  r.inference_seconds = seconds;
  r.config = json{{"injection", json{{"r_case", dataset.config.r_case},
                                     {"r_act", dataset.config.r_act ? json(*dataset.config.r_act) : json(nullptr)},
                                     {"fixed_count", dataset.config.fixed_count ? json(*dataset.config.fixed_count)
                                                                                : json(nullptr)},
                                     {"seed", dataset.config.seed}}},
                  {"variant", std::string(to_string(model.config().variant))},
                  {"max_len", model.config().max_len},
                  {"traces", dataset.items.size()}};
  if (details) *details = std::move(traces);
  return r;
}

json to_json(const EvalReport& r, bool timing) {
  json j{{"f_score", r.f_score},
         {"precision", r.precision},
         {"recall", r.recall},
         {"confusion", json{{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
         {"similarity_corrected_anomalous", r.similarity_corrected_anomalous},
         {"similarity_input_anomalous", r.similarity_input_anomalous},
         {"similarity_corrected_normal", r.similarity_corrected_normal},
         {"anomalous_traces", r.anomalous_traces},
         {"normal_traces", r.normal_traces},
         {"flagged_traces", r.flagged_traces},
         {"config", r.config}};
  if (timing) j["inference_seconds"] = r.inference_seconds;
  return j;
}

EvalReport eval_report_from_json(const json& j) {
  EvalReport r;
  try {
    r.f_score = j.at("f_score").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    const json& c = j.at("confusion");
    r.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
                c.at("fn").get<std::size_t>()};
    r.similarity_corrected_anomalous = j.at("similarity_corrected_anomalous").get<double>();
    r.similarity_input_anomalous = j.at("similarity_input_anomalous").get<double>();
    r.similarity_corrected_normal = j.at("similarity_corrected_normal").get<double>();
    r.anomalous_traces = j.at("anomalous_traces").get<std::size_t>();
    r.normal_traces = j.at("normal_traces").get<std::size_t>();
    r.flagged_traces = j.value("flagged_traces", std::size_t{0});
    r.inference_seconds = j.value("inference_seconds", 0.0);
    r.config = j.value("config", json::object());
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

std::string eval_csv_header() {
  return "run,f_score,precision,recall,tp,fp,tn,fn,sim_corrected_anomalous,sim_input_anomalous,"
         "sim_corrected_normal,anomalous_traces,normal_traces,flagged_traces,inference_seconds";
}

std::string eval_csv_row(const EvalReport& r, const std::string& label) {
  std::ostringstream out;
  out.precision(6);
  out << csv::quote(label) << ',' << r.f_score << ',' << r.precision << ',' << r.recall << ',' << r.counts.tp << ','
      << r.counts.fp << ',' << r.counts.tn << ',' << r.counts.fn << ',' << r.similarity_corrected_anomalous << ','
      << r.similarity_input_anomalous << ',' << r.similarity_corrected_normal << ',' << r.anomalous_traces << ','
      << r.normal_traces << ',' << r.flagged_traces << ',' << r.inference_seconds;
  return out.str();
}

CorrectedTrace sequential_correct(const Model& model, const TokenSeq& input, const TokenVocab& vocab) {
  const std::size_t rows = model.config().max_len - 1, v = model.config().vocab_size;
  std::vector<float> picked(rows * v);
  const std::vector<TokenSeq> one{input};
  for (std::size_t pos = 0; pos < rows; ++pos) {
    nn::Tape tape(false);
    const auto bound = model.bind_frozen(tape);
    const BatchOutput out = model.forward(bound, one);
    const float* row = out.logits.value().data() + pos * v;
    std::copy(row, row + v, picked.begin() + static_cast<std::ptrdiff_t>(pos * v));
  }
  return correct_rows(picked.data(), rows, v, vocab);
}

}  // namespace tracefix
