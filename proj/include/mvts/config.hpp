#pragma once

#include <string>
#include <string_view>

#include "mvts/data.hpp"
#include "mvts/harness.hpp"

// JSON documents for run configurations. Field names match the struct members;
// absent fields keep their defaults, unknown fields are rejected with
// ConfigError, and serialization always writes every field.
namespace mvts {

std::string to_json(const EncoderConfig& config);
std::string to_json(const SynthConfig& config);
std::string to_json(const PretrainConfig& config);
std::string to_json(const FinetuneConfig& config);
std::string to_json(const SweepConfig& config);

SynthConfig parse_synth_config(std::string_view json);
PretrainConfig parse_pretrain_config(std::string_view json);
FinetuneConfig parse_finetune_config(std::string_view json);
SweepConfig parse_sweep_config(std::string_view json);

}  // namespace mvts
