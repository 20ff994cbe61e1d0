#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlab/maps.hpp"

namespace vlab {

// Flat experiment configuration: one key = value per line, # comments.
// Execution details (out, workers, lane) are excluded from the config hash
// so reruns on different machines or worker counts emit identical files.
struct ExperimentConfig {
  std::string parity = "odd";
  int order = 3;
  double innerHalfWidth = 0.1;
  double outerHalfWidth = 0.3;
  double a0 = 0.0;
  bool a0Auto = false;  // key "a0 = auto": calibrate before building
  int ell = 3;          // landing time target for a0 calibration
  double slopeTarget = 1.75;

  int d = 16;
  double alpha = 1e-6;
  std::uint64_t seed = 1;
  int gridSize = 1 << 14;
  int sampleCount = 10000;
  std::vector<int> nValues = {400, 900, 1600, 2500};
  std::vector<double> rValues;  // empty: r0 + {0..6} at run time

  int censusSteps = 100000;
  int censusCount = 1000;

  std::string ccal = "one";  // one | auto | <number>
  bool lemma26ProofScaling = false;

  std::string out = "out";
  int workers = 0;  // 0: VIANA_LAB_WORKERS, then hardware
  std::string lane = "auto";
};

ExperimentConfig default_config();

// Reads a key = value file. Unknown keys and malformed values raise
// ConfigError.
ExperimentConfig load_config(const std::string& path);

// Applies one override; key names match the file format.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

// Splits "key=value" and applies it.
void apply_set(ExperimentConfig& cfg, const std::string& assignment);

// Range and consistency checks shared by every subcommand.
void validate(const ExperimentConfig& cfg);

// Canonical serialization of the science-relevant keys, and its FNV-1a
// hash; both are stable across runs.
std::string canonical_string(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Map-spec view of the config. a0 calibration is the caller's job when
// a0Auto is set.
MapSpec to_map_spec(const ExperimentConfig& cfg);

} // namespace vlab
