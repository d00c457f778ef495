#pragma once

// Orchestration of the four cycling experiments per element and assembly of
// a full matrix estimate. Probabilities come from a ProbabilitySource so the
// same reconstruction runs on exact, detector-smeared or sampled statistics.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opsynth/errors.hpp"
#include "opsynth/fock.hpp"
#include "opsynth/optics.hpp"
#include "opsynth/scheme.hpp"

namespace opsynth {

/// One phase-shifter setting of one cycling experiment.
struct PhaseSetting {
  int lambda = 0;  // 0 for the diagonal (uncycled) experiment
  Rational beta;
  int j = 0;
  BeamSplitterSpec bs1 = BeamSplitterSpec::balanced();

  double phi() const;
  /// Stable 64-bit identifier of (lambda, beta, j, bs1); used to derive RNG substreams.
  std::uint64_t key() const;
};

struct ProbabilityEstimate {
  double value = 0.0;
  double variance = 0.0;  // zero for exact statistics
};

class ProbabilitySource {
 public:
  virtual ~ProbabilitySource() = default;
  /// Must be safe to call concurrently.
  virtual ProbabilityEstimate probability(const DetectionEvent& event, const PhaseSetting& setting) const = 0;
  virtual std::string describe() const = 0;
};

/// <q|rho_c|q> straight from the closed-form q vectors.
class ExactSource : public ProbabilitySource {
 public:
  ExactSource(DensityMatrix rho_c, ReferenceField reference);
  ProbabilityEstimate probability(const DetectionEvent& event, const PhaseSetting& setting) const override;
  std::string describe() const override { return "exact"; }

 private:
  DensityMatrix rho_c_;
  ReferenceField reference_;
};

/// Fixed BS1, or the per-element optimum (t/r)^2 = 2N/lambda with a fixed
/// compromise for the lambda = 0 diagonal.
struct Bs1Policy {
  std::optional<BeamSplitterSpec> fixed;
  double diagonal_t_over_r_sq = 1.0;

  static Bs1Policy fixed_spec(BeamSplitterSpec spec);
  static Bs1Policy automatic(int n_max);
  BeamSplitterSpec resolve(int N, int lambda) const;
};

struct MeasurementPlan {
  int n_max = 0;
  Bs1Policy bs1;
  ReferenceField reference = ReferenceField::coherent(0.0);
  double norm_floor = kDefaultNormFloor;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct ElementReport {
  int N = 0;
  int lambda = 0;
  DetectionEvent event;
  double mixing_angle = 0.0;
  Complex value{std::nan(""), std::nan("")};
  /// |4 x normalisation constant| (off-diagonal) or t^{2N} <0|rho_a|0> (diagonal).
  double conditioning = 0.0;
  std::vector<Rational> betas;
  std::vector<double> probabilities;  // one per beta, or one for the diagonal
  std::vector<double> variances;
  std::vector<std::vector<double>> phases;  // phase settings used per beta
  double std_error_re = 0.0;
  double std_error_im = 0.0;
  std::optional<ErrorKind> error;
  std::string message;

  bool ok() const { return !error.has_value(); }
  double std_error() const { return std::hypot(std_error_re, std_error_im); }
};

struct MatrixMeasurement {
  /// Row m, column n holds <m|rho|n>; failed elements are NaN.
  Eigen::MatrixXcd estimate;
  std::vector<ElementReport> elements;

  std::size_t failures() const;
  const ElementReport* find(int N, int lambda) const;
};

/// Runs the experiments for <N+lambda|rho|N>. Errors are thrown.
ElementReport measure_element(const ProbabilitySource& source, const MeasurementPlan& plan, int N, int lambda);

/// Every element with N + lambda <= n_max; conjugates filled by Hermiticity.
/// Per-element failures are recorded in the report instead of aborting.
MatrixMeasurement measure_full_matrix(const ProbabilitySource& source, const MeasurementPlan& plan);

/// Exact probabilities, pure coherent reference. Requires n_max <= rho_c.cutoff().
MatrixMeasurement measure_full_matrix(const DensityMatrix& rho_c, double alpha_mag, const BeamSplitterSpec& bs1,
                                      int n_max);

}  // namespace opsynth
