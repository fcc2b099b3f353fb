#include "tracefix/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "tracefix/error.hpp"

namespace tracefix {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'F', 'X', 'C', 'K', 'P', 'T', '1'};

}  // namespace

json to_json(const ModelConfig& c) {
  return json{{"d_model", c.d_model},
              {"n_heads_enc", c.n_heads_enc},
              {"n_heads_dec", c.n_heads_dec},
              {"n_layers_enc", c.n_layers_enc},
              {"n_layers_dec", c.n_layers_dec},
              {"d_ffn", c.d_ffn},
              {"vocab_size", c.vocab_size},
              {"max_len", c.max_len},
              {"variant", to_string(c.variant)},
              {"mask_padding", c.mask_padding},
              {"dropout", c.dropout},
              {"dense_hidden", c.dense_hidden},
              {"dense_bottleneck", c.dense_bottleneck},
              {"activity_names", c.activity_names}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  try {
    c.d_model = j.value("d_model", c.d_model);
    c.n_heads_enc = j.value("n_heads_enc", c.n_heads_enc);
    c.n_heads_dec = j.value("n_heads_dec", c.n_heads_dec);
    c.n_layers_enc = j.value("n_layers_enc", c.n_layers_enc);
    c.n_layers_dec = j.value("n_layers_dec", c.n_layers_dec);
    c.d_ffn = j.value("d_ffn", c.d_ffn);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.max_len = j.value("max_len", c.max_len);
    c.variant = model_variant_from_string(j.value("variant", std::string("transformer-ae")));
    c.mask_padding = j.value("mask_padding", c.mask_padding);
    c.dropout = j.value("dropout", c.dropout);
    c.dense_hidden = j.value("dense_hidden", c.dense_hidden);
    c.dense_bottleneck = j.value("dense_bottleneck", c.dense_bottleneck);
    c.activity_names = j.value("activity_names", c.activity_names);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  return c;
}

void write_checkpoint(std::ostream& out, const Model& model) {
  json tensors = json::array();
  std::uint64_t offset = 0;
  for (const auto& p : model.parameters()) {
    const std::uint64_t bytes = p.value.numel() * sizeof(float);
    tensors.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"offset", offset}, {"length", p.value.numel()}});
    offset += bytes;
  }
  const json manifest{{"format_version", kCheckpointFormatVersion},
                      {"config", to_json(model.config())},
                      {"tensors", tensors},
                      {"blob_bytes", offset}};
  const std::string text = manifest.dump();
  const std::uint64_t len = text.size();
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : model.parameters())
    out.write(reinterpret_cast<const char*>(p.value.data()), static_cast<std::streamsize>(p.value.numel() * sizeof(float)));
}

Model read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size())) throw TruncatedError("checkpoint shorter than its header");
  if (magic != kMagic) throw FormatError("not a tracefix checkpoint (bad magic bytes)");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (in.gcount() != sizeof len) throw TruncatedError("checkpoint truncated in manifest length");
  if (len > (1u << 30)) throw FormatError("implausible checkpoint manifest length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (static_cast<std::uint64_t>(in.gcount()) != len) throw TruncatedError("checkpoint truncated in manifest");

  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint manifest is not valid JSON: ") + e.what());
  }
  const int version = manifest.value("format_version", -1);
  if (version != kCheckpointFormatVersion)
    throw VersionError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointFormatVersion) + ")");
  const ModelConfig config = model_config_from_json(manifest.at("config"));

  std::vector<nn::Parameter> params;
  std::uint64_t expected_offset = 0;
  try {
    for (const auto& t : manifest.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      const auto shape = t.at("shape").get<nn::Shape>();
      const auto length = t.at("length").get<std::uint64_t>();
      const auto offset = t.at("offset").get<std::uint64_t>();
      if (length != nn::shape_numel(shape))
        throw ManifestShapeError("tensor '" + name + "' declares length " + std::to_string(length) + " for shape " +
                                 nn::shape_str(shape));
      if (offset != expected_offset) throw ManifestShapeError("tensor '" + name + "' has a non-contiguous offset");
      std::vector<float> data(length);
      in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(length * sizeof(float)));
      if (static_cast<std::uint64_t>(in.gcount()) != length * sizeof(float))
        throw TruncatedError("checkpoint blob truncated in tensor '" + name + "'");
      params.emplace_back(name, nn::Tensor(shape, std::move(data)));
      expected_offset += length * sizeof(float);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint manifest: ") + e.what());
  }
  if (manifest.value("blob_bytes", std::uint64_t{0}) != expected_offset)
    throw ManifestShapeError("checkpoint blob size does not match its tensors");
  return Model(config, std::move(params));
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  write_checkpoint(out, model);
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace tracefix
