#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sparseinr/bench.hpp"
#include "sparseinr/codec.hpp"
#include "sparseinr/models.hpp"
#include "sparseinr/train.hpp"
#include "sparseinr/volume.hpp"

namespace sparseinr {

struct CodecSettings {
  WeightPrecision precision = WeightPrecision::Fp32;
  bool resuppress = false;
};

/// Everything the command line can set. Seeds left unset are derived from the
/// master seed.
struct CliConfig {
  SynthConfig synth;
  ModelSpec model;
  TrainConfig train;
  SweepSpec sweep;
  CodecSettings codec;

  std::optional<std::uint64_t> master_seed;
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::uint64_t> init_seed;
  std::optional<std::uint64_t> fourier_seed;
  std::optional<std::uint64_t> train_seed;

  void validate() const;
};

/// Parses an INI document with sections [run], [synth], [model], [train],
/// [sweep], [codec] on top of `base`. Unknown sections or keys are rejected.
CliConfig parse_config(const std::string& text, CliConfig base = {});
CliConfig load_config(const std::filesystem::path& path, CliConfig base = {});

/// Seed for one consumer ("synth", "init", "train", "fourier") derived from
/// the master seed.
std::uint64_t derive_seed(std::uint64_t master, const std::string& purpose);

/// Comma-separated list helpers shared with the flag parser.
std::vector<std::string> split_list(const std::string& text);
std::vector<std::uint32_t> parse_u32_list(const std::string& text);
std::vector<std::uint64_t> parse_u64_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace sparseinr
