#include "tracefix/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tracefix/checkpoint.hpp"
#include "tracefix/dataset_io.hpp"
#include "tracefix/error.hpp"

namespace tracefix {

using nlohmann::json;

LogFormat log_format_from_string(std::string_view name) {
  if (name == "auto") return LogFormat::Auto;
  if (name == "csv") return LogFormat::Csv;
  if (name == "xes") return LogFormat::Xes;
  throw ConfigError("unknown log format '" + std::string(name) + "' (expected auto, csv or xes)");
}

std::string_view to_string(LogFormat f) {
  switch (f) {
    case LogFormat::Auto: return "auto";
    case LogFormat::Csv: return "csv";
    case LogFormat::Xes: return "xes";
  }
  return "?";
}

EventLog load_log(const std::filesystem::path& path, LogFormat format, const CsvMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open log file '" + path.string() + "'");
  if (format == LogFormat::Auto) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    format = ext == ".xes" ? LogFormat::Xes : LogFormat::Csv;
  }
  return format == LogFormat::Xes ? parse_xes(in) : parse_csv(in, mapping);
}

std::uint64_t stage_seed(std::uint64_t root, std::string_view stage) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 1099511628211ull;
  }
  // splitmix64 finalizer over the mixed pair
  std::uint64_t z = root ^ (h + 0x9e3779b97f4a7c15ull + (root << 6) + (root >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::string cell_label(const InjectionConfig& c) {
  char buf[64];
  if (c.fixed_count)
    std::snprintf(buf, sizeof buf, "rc%g-fc%d", c.r_case, *c.fixed_count);
  else
    std::snprintf(buf, sizeof buf, "rc%g-ra%g", c.r_case, c.r_act.value_or(0.0));
  return buf;
}

std::vector<InjectionConfig> default_test_grid() {
  std::vector<InjectionConfig> grid;
  for (double rc : {0.1, 0.3, 0.5, 0.7}) {
    for (double ra : {0.1, 0.3, 0.5, 0.7}) {
      InjectionConfig c;
      c.r_case = rc;
      c.r_act = ra;
      grid.push_back(c);
    }
    for (int fc : {1, 2}) {
      InjectionConfig c;
      c.r_case = rc;
      c.r_act.reset();
      c.fixed_count = fc;
      grid.push_back(c);
    }
  }
  return grid;
}

void RunConfig::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  train_injection.validate();
  for (const auto& c : test_grid) c.validate();
  train.validate();
}

json to_json(const RunConfig& c) {
  json grid = json::array();
  for (const auto& g : c.test_grid) grid.push_back(to_json(g));
  json model = to_json(c.model);
  model.erase("vocab_size");
  model.erase("max_len");
  model.erase("activity_names");
  return json{{"log", c.log_path.string()},
              {"log_format", to_string(c.log_format)},
              {"csv", json{{"case_column", c.csv.case_column},
                           {"activity_column", c.csv.activity_column},
                           {"timestamp_column", c.csv.timestamp_column ? json(*c.csv.timestamp_column)
                                                                       : json(nullptr)}}},
              {"test_fraction", c.test_fraction},
              {"train_injection", to_json(c.train_injection)},
              {"test_grid", grid},
              {"model", model},
              {"train", to_json(c.train)},
              {"output_dir", c.output_dir.string()},
              {"seed", c.seed}};
}

RunConfig merge_run_config(RunConfig c, const json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  try {
    if (j.contains("log")) c.log_path = j.at("log").get<std::string>();
    if (j.contains("log_format")) c.log_format = log_format_from_string(j.at("log_format").get<std::string>());
    if (j.contains("csv")) {
      const json& m = j.at("csv");
      c.csv.case_column = m.value("case_column", c.csv.case_column);
      c.csv.activity_column = m.value("activity_column", c.csv.activity_column);
      if (m.contains("timestamp_column")) {
        if (m.at("timestamp_column").is_null()) c.csv.timestamp_column.reset();
        else c.csv.timestamp_column = m.at("timestamp_column").get<std::string>();
      }
    }
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    if (j.contains("train_injection")) {
      json merged = to_json(c.train_injection);
      const json& over = j.at("train_injection");
      // A given r_act and fixed_count are mutually exclusive; whichever is present wins.
      if (over.contains("fixed_count") && !over.at("fixed_count").is_null()) merged["r_act"] = nullptr;
      if (over.contains("r_act") && !over.at("r_act").is_null()) merged["fixed_count"] = nullptr;
      merged.update(over);
      c.train_injection = injection_config_from_json(merged);
    }
    if (j.contains("test_grid")) {
      c.test_grid.clear();
      for (const auto& g : j.at("test_grid")) c.test_grid.push_back(injection_config_from_json(g));
    }
    if (j.contains("model")) {
      json merged = to_json(c.model);
      merged.update(j.at("model"));
      c.model = model_config_from_json(merged);
    }
    if (j.contains("train")) {
      json merged = to_json(c.train);
      merged.update(j.at("train"));
      c.train = train_config_from_json(merged);
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return merge_run_config(std::move(base), j);
}

PreparedLogs prepare_logs(const EventLog& log, const RunConfig& cfg) {
  if (log.empty()) throw EmptyLogError();
  PreparedLogs p;
  auto [train, test] = train_test_split(log, 1.0 - cfg.test_fraction, stage_seed(cfg.seed, "split"));
  if (train.empty() || test.empty())
    throw DataError("log of " + std::to_string(log.size()) + " traces is too small for a test fraction of " +
                    std::to_string(cfg.test_fraction));
  p.train = std::move(train);
  p.test = std::move(test);
  p.variants = extract_variants(log);
  p.profile = compute_behavioral_profile(log);
  p.max_len = max_padded_length(log, cfg.train_injection);
  for (const auto& c : cfg.test_grid) p.max_len = std::max(p.max_len, max_padded_length(log, c));
  return p;
}

LabeledDataset make_train_dataset(const PreparedLogs& p, const RunConfig& cfg) {
  InjectionConfig c = cfg.train_injection;
  c.seed = stage_seed(cfg.seed, "inject:train");
  return build_dataset(p.train, c, p.variants, p.profile, p.max_len);
}

LabeledDataset make_test_dataset(const PreparedLogs& p, const RunConfig& cfg, const InjectionConfig& cell) {
  InjectionConfig c = cell;
  c.seed = stage_seed(cfg.seed, "inject:test:" + cell_label(cell));
  return build_dataset(p.test, c, p.variants, p.profile, p.max_len);
}

Model make_model(const RunConfig& cfg, const LabeledDataset& ds) {
  ModelConfig mc = cfg.model;
  mc.vocab_size = ds.vocab.size();
  mc.max_len = ds.max_len;
  mc.activity_names = ds.activity_names;
  return Model(mc, stage_seed(cfg.seed, "model"));
}

TrainConfig effective_train_config(const RunConfig& cfg) {
  TrainConfig t = cfg.train;
  t.seed = stage_seed(cfg.seed, "train");
  return t;
}

PipelineResult run_pipeline(const EventLog& log, const RunConfig& cfg, Model* trained, std::ostream* metrics) {
  cfg.validate();
  const PreparedLogs p = prepare_logs(log, cfg);
  const LabeledDataset train_ds = make_train_dataset(p, cfg);
  Model model = make_model(cfg, train_ds);
  PipelineResult result;
  TrainHooks hooks;
  hooks.metrics_jsonl = metrics;
  result.training = train(model, train_ds, effective_train_config(cfg), hooks);
  for (const auto& cell : cfg.test_grid) {
    const LabeledDataset test_ds = make_test_dataset(p, cfg, cell);
    result.cells.push_back({cell_label(cell), test_ds.config, evaluate_model(model, test_ds)});
  }
  if (trained) *trained = std::move(model);
  return result;
}

}  // namespace tracefix
