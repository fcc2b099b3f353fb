#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "tracefix/model.hpp"

namespace tracefix {

inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Layout: 8-byte magic "TFXCKPT1", u64 little-endian manifest length, UTF-8
// JSON manifest (format_version, config, tensors[name, shape, offset, length]),
// then the row-major little-endian float32 blob.
void write_checkpoint(std::ostream& out, const Model& model);
Model read_checkpoint(std::istream& in);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace tracefix
