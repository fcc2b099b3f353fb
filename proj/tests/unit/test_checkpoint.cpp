#include <doctest.h>

#include <cstring>
#include <sstream>

#include "test_support.hpp"
#include "tracefix/checkpoint.hpp"
#include "tracefix/error.hpp"

using namespace tracefix;

namespace {

ModelConfig config() {
  ModelConfig c;
  c.d_model = 8;
  c.n_heads_enc = 2;
  c.n_heads_dec = 4;
  c.n_layers_enc = 2;
  c.n_layers_dec = 1;
  c.d_ffn = 16;
  c.vocab_size = 6;
  c.max_len = 5;
  c.mask_padding = true;
  c.activity_names = {"a", "b", "c"};
  return c;
}

std::string bytes_of(const Model& m) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(out, m);
  return out.str();
}

Model from_bytes(const std::string& s) {
  std::istringstream in(s, std::ios::binary);
  return read_checkpoint(in);
}

// Replaces the manifest with `edit(manifest)`, keeping the blob.
std::string with_manifest(const std::string& bytes, const std::function<std::string(std::string)>& edit) {
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 8, 8);
  const std::string manifest = edit(bytes.substr(16, len));
  std::uint64_t new_len = manifest.size();
  std::string out = bytes.substr(0, 8);
  out.append(reinterpret_cast<const char*>(&new_len), 8);
  return out + manifest + bytes.substr(16 + len);
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  for (auto variant : {ModelVariant::TransformerAE, ModelVariant::EncoderOnly, ModelVariant::DenseAE}) {
    ModelConfig c = config();
    c.variant = variant;
    const Model m(c, 11);
    const std::string bytes = bytes_of(m);
    CHECK(bytes.substr(0, 8) == "TFXCKPT1");
    const Model back = from_bytes(bytes);
    CHECK(back.config() == m.config());
    REQUIRE(back.parameters().size() == m.parameters().size());
    for (std::size_t i = 0; i < m.parameters().size(); ++i) {
      CHECK(back.parameters()[i].name == m.parameters()[i].name);
      CHECK(std::memcmp(back.parameters()[i].value.data(), m.parameters()[i].value.data(),
                        m.parameters()[i].value.numel() * sizeof(float)) == 0);
    }
    CHECK(bytes_of(back) == bytes);
  }
  tftest::TempDir dir;
  const Model m(config(), 3);
  save_checkpoint(m, dir / "m.ckpt");
  CHECK(parameter_checksum(load_checkpoint(dir / "m.ckpt").parameters()) == parameter_checksum(m.parameters()));
  CHECK_THROWS_AS(load_checkpoint(dir / "absent.ckpt"), ConfigError);
}

TEST_CASE("checkpoint corruption is reported by kind") {
  const std::string bytes = bytes_of(Model(config(), 1));
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(from_bytes(bad_magic), FormatError);
  CHECK_THROWS_AS(from_bytes(bytes.substr(0, 5)), TruncatedError);
  CHECK_THROWS_AS(from_bytes(bytes.substr(0, 30)), TruncatedError);
  CHECK_THROWS_AS(from_bytes(bytes.substr(0, bytes.size() - 4)), TruncatedError);

  auto replace = [](std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
  };
  CHECK_THROWS_AS(from_bytes(with_manifest(bytes, [&](std::string s) {
                    return replace(s, "\"format_version\":1", "\"format_version\":2");
                  })),
                  VersionError);
  CHECK_THROWS_AS(from_bytes(with_manifest(bytes, [&](std::string s) {
                    return replace(s, "embed.token", "embed.tokens");
                  })),
                  ManifestShapeError);
  CHECK_THROWS_AS(from_bytes(with_manifest(bytes, [](std::string) { return std::string("{oops"); })), FormatError);
}

TEST_CASE("model config json") {
  const ModelConfig c = config();
  CHECK(model_config_from_json(to_json(c)) == c);
  CHECK_THROWS_AS(model_config_from_json(nlohmann::json{{"variant", "cnn"}}), ConfigError);
}
