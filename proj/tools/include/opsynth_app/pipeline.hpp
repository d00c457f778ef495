#pragma once

#include <array>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "opsynth/imperfection.hpp"
#include "opsynth/measurement.hpp"
#include "opsynth_app/config.hpp"

namespace opsynth::app {

/// Everything needed to run measurements for one configuration.
struct Pipeline {
  ExperimentConfig config;
  DensityMatrix rho_c;
  ReferenceModel reference_model;
  MeasurementPlan plan;
  int total_cutoff = 0;
  double reference_tail = 0.0;  // truncation tail of rho_a; 0 on the closed-form coherent path
  std::unique_ptr<ProbabilitySource> source;

  /// Largest intermediate of the Bernoulli inversion so far; 0 when not inverting.
  double inversion_max_intermediate() const;
};

/// Validates the config, builds the signal state and the probability source.
/// Throws kCutoff when n_max exceeds the signal cutoff.
Pipeline build_pipeline(const ExperimentConfig& config);

nlohmann::json element_json(const ElementReport& report);

/// Self-describing run report: config echo, truncation tails, BS1 policy,
/// per-element conditioning, probabilities and phase schedules.
nlohmann::json run_report(const Pipeline& pipeline, const MatrixMeasurement& measurement);

using Table = std::array<std::array<double, 5>, 5>;

/// Real parts of the 5x5 truncated matrix, ideal detectors.
const Table& golden_ideal_table();
/// Same state measured with efficiency 0.9 on every detector.
const Table& golden_eta09_table();

inline constexpr double kIdealTableTolerance = 5e-5;
inline constexpr double kEta09TableTolerance = 0.02;

ExperimentConfig ideal_table_config();
ExperimentConfig eta09_table_config();

struct TableComparison {
  Eigen::MatrixXcd computed;
  Table golden{};
  double max_abs_diff = 0.0;
  double tolerance = 0.0;
  bool pass() const { return max_abs_diff <= tolerance; }
};

TableComparison compare_table(const MatrixMeasurement& measurement, const Table& golden, double tolerance);
nlohmann::json table_json(const TableComparison& cmp);

}  // namespace opsynth::app
