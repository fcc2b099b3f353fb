#include "tracefix/dataset_io.hpp"

#include <fstream>
#include <string>

#include "tracefix/error.hpp"

namespace tracefix {

using nlohmann::json;

namespace {

constexpr const char* kDatasetMagic = "tracefix-dataset";

json record_to_json(const AnomalyRecord& r) {
  json j{{"kind", to_string(r.kind)}, {"position", r.position}};
  if (r.original_activity) j["original"] = *r.original_activity;
  if (r.new_activity) j["new"] = *r.new_activity;
  return j;
}

AnomalyRecord record_from_json(const json& j) {
  AnomalyRecord r;
  r.kind = anomaly_kind_from_string(j.at("kind").get<std::string>());
  r.position = j.at("position").get<std::size_t>();
  if (j.contains("original")) r.original_activity = j.at("original").get<Token>();
  if (j.contains("new")) r.new_activity = j.at("new").get<Token>();
  return r;
}

}  // namespace

json to_json(const InjectionConfig& c) {
  json kinds = json::array();
  for (auto k : c.enabled_kinds) kinds.push_back(to_string(k));
  json j{{"r_case", c.r_case}, {"seed", c.seed}, {"enabled_kinds", kinds},
         {"relabel_by_variant", c.relabel_by_variant}};
  if (c.r_act) j["r_act"] = *c.r_act;
  if (c.fixed_count) j["fixed_count"] = *c.fixed_count;
  return j;
}

InjectionConfig injection_config_from_json(const json& j) {
  InjectionConfig c;
  try {
    c.r_case = j.value("r_case", c.r_case);
    c.seed = j.value("seed", c.seed);
    c.relabel_by_variant = j.value("relabel_by_variant", c.relabel_by_variant);
    c.r_act.reset();
    if (j.contains("r_act") && !j.at("r_act").is_null()) c.r_act = j.at("r_act").get<double>();
    if (j.contains("fixed_count") && !j.at("fixed_count").is_null())
      c.fixed_count = j.at("fixed_count").get<int>();
    if (!c.r_act && !c.fixed_count) c.r_act = 0.3;
    if (j.contains("enabled_kinds")) {
      c.enabled_kinds.clear();
      for (const auto& k : j.at("enabled_kinds")) c.enabled_kinds.push_back(anomaly_kind_from_string(k.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed injection config: ") + e.what());
  }
  c.validate();
  return c;
}

void write_dataset(std::ostream& out, const LabeledDataset& ds) {
  json header{{"format", kDatasetMagic},
              {"version", kDatasetFormatVersion},
              {"activities", ds.activity_names},
              {"num_activities", ds.vocab.num_activities},
              {"max_len", ds.max_len},
              {"config", to_json(ds.config)},
              {"counts",
               {{"traces", ds.items.size()},
                {"injected", ds.injected_count()},
                {"anomalous", ds.count(Label::Anomalous)},
                {"normal", ds.count(Label::Normal)}}}};
  out << header.dump() << '\n';
  for (const auto& it : ds.items) {
    json records = json::array();
    for (const auto& r : it.records) records.push_back(record_to_json(r));
    json row{{"case_id", it.case_id},
             {"label", static_cast<int>(it.label)},
             {"input", it.input_tokens},
             {"target", it.target_tokens},
             {"original_length", it.original_length},
             {"mutated_length", it.mutated_length},
             {"records", records}};
    out << row.dump() << '\n';
  }
}

LabeledDataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset file is empty");
  LabeledDataset ds;
  std::size_t expected = 0;
  try {
    const json header = json::parse(line);
    if (header.value("format", std::string()) != kDatasetMagic) throw FormatError("not a tracefix dataset file");
    const int version = header.at("version").get<int>();
    if (version != kDatasetFormatVersion)
      throw VersionError("dataset format version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kDatasetFormatVersion) + ")");
    ds.activity_names = header.at("activities").get<std::vector<std::string>>();
    ds.vocab.num_activities = header.at("num_activities").get<std::size_t>();
    ds.max_len = header.at("max_len").get<std::size_t>();
    ds.config = injection_config_from_json(header.at("config"));
    expected = header.at("counts").at("traces").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed dataset header: ") + e.what());
  }
  if (ds.activity_names.size() != ds.vocab.num_activities)
    throw FormatError("dataset header activity list does not match num_activities");

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    LabeledTrace it;
    try {
      const json row = json::parse(line);
      it.case_id = row.at("case_id").get<std::string>();
      it.label = row.at("label").get<int>() ? Label::Anomalous : Label::Normal;
      it.input_tokens = row.at("input").get<TokenSeq>();
      it.target_tokens = row.at("target").get<TokenSeq>();
      it.original_length = row.at("original_length").get<std::size_t>();
      it.mutated_length = row.at("mutated_length").get<std::size_t>();
      for (const auto& r : row.at("records")) it.records.push_back(record_from_json(r));
    } catch (const json::exception& e) {
      throw RowError(line_no, std::string("malformed dataset row: ") + e.what());
    }
    if (it.input_tokens.size() != ds.max_len || it.target_tokens.size() + 1 != ds.max_len ||
        it.mutated_length + 1 > ds.max_len || it.original_length + 1 > ds.max_len)
      throw RowError(line_no, "row length does not match max_len " + std::to_string(ds.max_len));
    ds.items.push_back(std::move(it));
  }
  if (ds.items.size() != expected)
    throw TruncatedError("dataset declares " + std::to_string(expected) + " rows but contains " +
                         std::to_string(ds.items.size()));
  return ds;
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset file " + path.string());
  write_dataset(out, ds);
  if (!out) throw DataError("failed writing dataset file " + path.string());
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset file " + path.string());
  return read_dataset(in);
}

}  // namespace tracefix
