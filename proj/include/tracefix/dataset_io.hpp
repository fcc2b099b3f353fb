#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "tracefix/anomaly.hpp"

namespace tracefix {

inline constexpr int kDatasetFormatVersion = 1;

nlohmann::json to_json(const InjectionConfig& config);
InjectionConfig injection_config_from_json(const nlohmann::json& j);

// JSON-lines file: a header object (format, version, vocabulary, max_len,
// config, counts) followed by one object per labeled trace.
void write_dataset(std::ostream& out, const LabeledDataset& ds);
LabeledDataset read_dataset(std::istream& in);

void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace tracefix
