#pragma once

// Brute-force reference: the full three-mode state is propagated through
// both beam splitters and read out projectively. Slow, but shares nothing
// with the closed-form q vectors beyond the two-mode blocks.

#include <optional>

#include <Eigen/Dense>

#include "opsynth/fock.hpp"
#include "opsynth/imperfection.hpp"
#include "opsynth/optics.hpp"
#include "opsynth/scheme.hpp"

namespace opsynth {

struct OracleSetup {
  double alpha_mag = 0.0;  // pure coherent reference, used when `reference` is empty
  BeamSplitterSpec bs1 = BeamSplitterSpec::balanced();
  int total_cutoff = 0;
  std::optional<DensityMatrix> reference;  // mixed reference rho_a at phi = 0
};

/// n_max + lambda_max + ceil(|alpha|^2 + 6 |alpha|).
int default_total_cutoff(int n_max, int lambda_max, double alpha_mag);

/// Probabilities of every event with n_a + n_b + n_c <= total_cutoff.
JointDistribution forward_distribution(const DensityMatrix& rho_c, const OracleSetup& setup, double phi);

/// Single event. Throws kCutoff when the event does not fit under the total cutoff.
double forward_probability(const DensityMatrix& rho_c, const OracleSetup& setup, const DetectionEvent& event,
                           double phi);

/// |q> read off the adjoint propagation of |n_a, n_b, n_c> contracted with the
/// reference ket and the b vacuum. Levels above `cutoff` are dropped.
FockVector q_by_contraction(const DetectionEvent& event, const BeamSplitterSpec& bs1, const FockVector& reference_ket,
                            int cutoff);

/// I - sum_e Pi(e) over all events with total <= total_cutoff, restricted to
/// signal levels 0..n_max. Uses the pure coherent reference of `setup`.
Eigen::MatrixXcd pom_completeness(const OracleSetup& setup, double phi, int n_max);

}  // namespace opsynth
