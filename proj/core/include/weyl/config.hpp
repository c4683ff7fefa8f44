#pragma once

// Experiment files: JSON documents holding named sweep configurations.

#include <cstdint>
#include <string>
#include <vector>

#include "weyl/harness.hpp"

namespace weyl {

inline constexpr int kSchemaVersion = 1;

struct ExperimentFile {
  int schema_version = kSchemaVersion;
  std::string output_dir = "weyl-out";
  std::uint64_t seed = 0;
  std::vector<SweepConfig> experiments;
};

// Throws ConfigError naming the offending field, e.g.
// "experiments[0].checks[1]: unknown check 'Foo'".
ExperimentFile parse_experiment_file(const std::string& text);
ExperimentFile load_experiment_file(const std::string& path);

// Canonical JSON of the fields that determine a sweep's numbers (not jobs,
// output paths or flags), and its 64-bit FNV-1a hash in hex.
std::string canonical_json(const SweepConfig& config);
std::string config_fingerprint(const SweepConfig& config);

// Human-readable summary of defaults in effect, printed by `validate`.
std::string resolved_defaults(const ExperimentFile& file);

}  // namespace weyl
