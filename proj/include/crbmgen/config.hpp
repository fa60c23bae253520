#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crbmgen/constraints.hpp"
#include "crbmgen/midi.hpp"
#include "crbmgen/sampler.hpp"
#include "crbmgen/train.hpp"

namespace crbmgen {

/// Every tunable of the pipeline, addressed by flat key names.
struct RunConfig {
  IngestConfig ingest;
  bool augment_keys = true;
  CrbmArchitecture arch;
  TrainConfig train;
  TemplateConfig tmpl;
  SamplerConfig sampler;
  int n_solutions = 20;
  int select = 4;
  double threshold = 0.5;
  int keyscape_levels = 5;
  int threads = 1;
  /// Randomized commands refuse to run without an explicit seed.
  std::optional<std::uint64_t> seed;

  /// Sets one key; throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  /// Applies "key = value" lines; '#' starts a comment.
  void apply_text(const std::string& text, const std::string& origin = "config");
  void apply_file(const std::filesystem::path& path);

  /// Copies the seed into the train and sampler configs; throws
  /// ConfigError when no seed was given.
  void require_seed();
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string description;
};

/// All keys with defaults and descriptions, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// A commented config file listing every key at its default.
std::string default_config_text();

}  // namespace crbmgen
