#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "opsynth/fock.hpp"
#include "opsynth/imperfection.hpp"

namespace opsynth::app {

inline constexpr int kSchemaVersion = 1;

enum class RunMode { kExact, kSmeared, kSampled };
std::optional<RunMode> parse_run_mode(std::string_view name);
std::string_view to_string(RunMode mode);

struct SignalConfig {
  std::optional<TestStateSpec> spec;
  std::optional<std::string> file;  // JSON or CSV matrix
};

struct ReferenceConfig {
  double mean_photons = 0.5;
  std::string model = "pure";  // pure | phase_diffused
  double sigma = 0.0;
};

struct ExperimentConfig {
  SignalConfig signal;
  ReferenceConfig reference;
  std::optional<double> bs1_t_over_r_sq;  // empty: "auto"
  int cutoff = 14;
  std::optional<int> total_cutoff;
  DetectorEfficiencies efficiency;
  RunMode mode = RunMode::kExact;
  bool invert = false;
  std::uint64_t shots = 1'000'000;
  std::uint64_t seed = 0;
  int n_max = 4;
  std::string output_dir = ".";
  unsigned threads = 0;
};

/// Coherent signal and reference with |alpha|^2 = 0.5, exact statistics.
ExperimentConfig default_config();

/// Throws Error(kValidation) on unknown keys, wrong types or bad values.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Cross-field checks, run after command-line overrides.
void validate(const ExperimentConfig& config);

/// Explicit value, or max(cutoff, n_max + n_max + ceil(|alpha|^2 + 6|alpha|)).
int resolved_total_cutoff(const ExperimentConfig& config);

}  // namespace opsynth::app
