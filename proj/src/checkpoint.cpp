#include "mvts/checkpoint.hpp"

#include <json.hpp>
#include <unordered_set>

#include "binary_io.hpp"
#include "mvts/error.hpp"

namespace mvts {

namespace {

std::uint64_t seed_from_config(const std::string& config_json, std::size_t offset) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint config echo is not valid JSON: ") + e.what(), offset);
  }
  if (!j.is_object()) throw FormatError("checkpoint config echo is not a JSON object", offset);
  if (!j.contains("seed")) return 0;
  if (!j["seed"].is_number_unsigned()) throw FormatError("checkpoint config seed is not an unsigned integer", offset);
  return j["seed"].get<std::uint64_t>();
}

}  // namespace

const CheckpointTensor* ModelCheckpoint::find(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return &p;
  return nullptr;
}

ModelCheckpoint make_checkpoint(const ParameterList& params, std::string config_json, std::uint64_t seed) {
  ModelCheckpoint ckpt;
  std::unordered_set<std::string> names;
  for (const auto& p : params) {
    if (!names.insert(p.name).second) throw UsageError("duplicate parameter name " + p.name);
    CheckpointTensor t{p.name, p.tensor.shape(), {}};
    t.data.reserve(p.tensor.numel());
    for (double v : p.tensor.data()) t.data.push_back(float(v));
    ckpt.parameters.push_back(std::move(t));
  }
  ckpt.config_json = std::move(config_json);
  ckpt.seed = seed;
  return ckpt;
}

void load_parameters(const ModelCheckpoint& checkpoint, const ParameterList& targets) {
  for (const auto& target : targets) {
    const auto* src = checkpoint.find(target.name);
    if (!src) throw ConfigError("checkpoint has no parameter " + target.name);
    if (src->shape != target.tensor.shape())
      throw ConfigError("checkpoint parameter " + target.name + " has shape " + shape_string(src->shape) +
                        ", model expects " + shape_string(target.tensor.shape()));
    Tensor t = target.tensor;
    auto dst = t.mutable_data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = double(src->data[i]);
  }
}

std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& checkpoint) {
  detail::ByteWriter w;
  w.raw("CKPT");
  w.u32(checkpoint.version);
  w.u32(std::uint32_t(checkpoint.parameters.size()));
  for (const auto& p : checkpoint.parameters) {
    if (p.name.size() > 0xFFFF) throw UsageError("parameter name too long: " + p.name);
    if (p.shape.size() > 255) throw UsageError("parameter rank too large: " + p.name);
    if (shape_numel(p.shape) != p.data.size()) throw UsageError("parameter data does not match shape: " + p.name);
    w.u16(std::uint16_t(p.name.size()));
    w.raw(p.name);
    w.u8(std::uint8_t(p.shape.size()));
    for (auto d : p.shape) w.u32(std::uint32_t(d));
    for (float v : p.data) w.f32(v);
  }
  w.u32(std::uint32_t(checkpoint.config_json.size()));
  w.raw(checkpoint.config_json);
  return w.take();
}

ModelCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  if (r.remaining() < 4 || r.raw(4) != "CKPT") r.fail("bad magic, not a checkpoint file", 0);
  ModelCheckpoint ckpt;
  const std::size_t version_at = r.offset();
  ckpt.version = r.u32();
  if (ckpt.version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(ckpt.version), version_at);
  const auto count = r.u32();
  std::unordered_set<std::string> names;
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointTensor p;
    const std::size_t name_at = r.offset();
    p.name = r.raw(r.u16());
    if (!names.insert(p.name).second) r.fail("duplicate parameter name " + p.name, name_at);
    const auto rank = r.u8();
    for (std::uint8_t d = 0; d < rank; ++d) p.shape.push_back(r.u32());
    const std::size_t n = shape_numel(p.shape);
    r.need(n * 4);
    p.data.resize(n);
    for (auto& v : p.data) v = r.f32();
    ckpt.parameters.push_back(std::move(p));
  }
  const std::size_t config_at = r.offset();
  ckpt.config_json = r.raw(r.u32());
  r.expect_end();
  ckpt.seed = seed_from_config(ckpt.config_json, config_at);
  return ckpt;
}

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path) {
  detail::write_file(path, encode_checkpoint(checkpoint));
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path));
}

}  // namespace mvts
