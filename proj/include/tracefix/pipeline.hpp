#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tracefix/anomaly.hpp"
#include "tracefix/evaluation.hpp"
#include "tracefix/eventlog.hpp"
#include "tracefix/model.hpp"
#include "tracefix/training.hpp"

namespace tracefix {

enum class LogFormat { Auto, Csv, Xes };

LogFormat log_format_from_string(std::string_view name);
std::string_view to_string(LogFormat f);

// Reads a CSV or XES log; Auto picks by extension (.xes -> XES, else CSV).
// A missing file is a configuration error naming the path.
EventLog load_log(const std::filesystem::path& path, LogFormat format = LogFormat::Auto,
                  const CsvMapping& mapping = {});

// Independent 64-bit seed for a named stage of a run.
std::uint64_t stage_seed(std::uint64_t root, std::string_view stage);

// "rc0.5-ra0.3" or "rc0.5-fc2".
std::string cell_label(const InjectionConfig& c);

// r_case in {0.1, 0.3, 0.5, 0.7} crossed with r_act in {0.1, 0.3, 0.5, 0.7}
// and fixed counts {1, 2}: 24 cells.
std::vector<InjectionConfig> default_test_grid();

struct RunConfig {
  std::filesystem::path log_path;
  LogFormat log_format = LogFormat::Auto;
  CsvMapping csv;
  double test_fraction = 0.2;
  InjectionConfig train_injection;
  std::vector<InjectionConfig> test_grid = default_test_grid();
  ModelConfig model;
  TrainConfig train;
  std::filesystem::path output_dir = "run";
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
// Keys present in `j` replace the corresponding fields of `base`.
RunConfig merge_run_config(RunConfig base, const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// Split plus the log-wide artifacts shared by every injection.
struct PreparedLogs {
  EventLog train;
  EventLog test;
  VariantSet variants;
  BehavioralProfile profile;
  std::size_t max_len = 0;  // largest L_max over the train config and the test grid
};

PreparedLogs prepare_logs(const EventLog& log, const RunConfig& cfg);
LabeledDataset make_train_dataset(const PreparedLogs& p, const RunConfig& cfg);
LabeledDataset make_test_dataset(const PreparedLogs& p, const RunConfig& cfg, const InjectionConfig& cell);

// Model sized for `ds` with the run's architecture and a stage-derived seed.
Model make_model(const RunConfig& cfg, const LabeledDataset& ds);
TrainConfig effective_train_config(const RunConfig& cfg);

struct CellResult {
  std::string label;
  InjectionConfig config;
  EvalReport report;
};

struct PipelineResult {
  TrainResult training;
  std::vector<CellResult> cells;
};

// In-process inject -> train -> evaluate on every grid cell.
PipelineResult run_pipeline(const EventLog& log, const RunConfig& cfg, Model* trained = nullptr,
                            std::ostream* metrics = nullptr);

}  // namespace tracefix
