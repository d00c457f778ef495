#pragma once

// Detector inefficiency (binomial thinning and its inverse), finite-shot
// sampling and noisy reference fields.
//
// Dark counts are not modelled. A dark-count stage would slot in after
// `smear` in SmearedSource/SampledSource::joint_at.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "opsynth/fock.hpp"
#include "opsynth/measurement.hpp"
#include "opsynth/scheme.hpp"

namespace opsynth {

/// Photocount distribution of one detector over 0..cutoff.
struct CountDistribution {
  std::vector<double> p;
  double tail = 0.0;  // declared probability mass above the cutoff

  int cutoff() const { return static_cast<int>(p.size()) - 1; }
  double total() const;
  double mean() const;
};

/// Joint distribution over (n_a, n_b, n_c) with n_a + n_b + n_c <= total_cutoff.
class JointDistribution {
 public:
  explicit JointDistribution(int total_cutoff);

  int total_cutoff() const { return total_cutoff_; }
  double& at(int n_a, int n_b, int n_c) { return data_[index(n_a, n_b, n_c)]; }
  double at(int n_a, int n_b, int n_c) const { return data_[index(n_a, n_b, n_c)]; }
  double operator()(const DetectionEvent& e) const;
  double total() const;
  double tail() const { return tail_; }
  void set_tail(double tail) { tail_ = tail; }

  /// Distribution of one detector, summed over the other two.
  CountDistribution marginal(Mode mode) const;

  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw() { return data_; }

 private:
  std::size_t index(int n_a, int n_b, int n_c) const;

  int total_cutoff_;
  double tail_ = 0.0;
  std::vector<double> data_;
};

struct DetectorEfficiencies {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;

  static DetectorEfficiencies uniform(double eta) { return {eta, eta, eta}; }
  bool ideal() const { return a == 1.0 && b == 1.0 && c == 1.0; }
};

/// p_n(eta) = sum_m C(n+m, n) eta^n (1-eta)^m p_{n+m}(1), truncated at the cutoff.
CountDistribution smear(const CountDistribution& dist, double efficiency);
/// Each detector thinned independently.
JointDistribution smear(const JointDistribution& dist, const DetectorEfficiencies& efficiencies);

inline constexpr double kDefaultInversionBound = 1e8;

struct InversionResult {
  CountDistribution distribution;
  double max_intermediate = 0.0;  // largest |term| met in the alternating series
};

/// Inverse Bernoulli transformation: the smearing kernel with eta -> 1/eta.
/// Throws kValidation for eta <= 0 and kConditioning when an intermediate
/// term exceeds `bound`.
InversionResult bernoulli_invert(const CountDistribution& dist, double efficiency, int cutoff,
                                 double bound = kDefaultInversionBound);

struct JointInversionResult {
  JointDistribution distribution;
  double max_intermediate = 0.0;
};
JointInversionResult bernoulli_invert(const JointDistribution& dist, const DetectorEfficiencies& efficiencies,
                                      double bound = kDefaultInversionBound);

/// Photocount histogram from a multinomial draw over the joint distribution.
/// Shots landing in the truncated tail are counted in `overflow`.
class EventCounts {
 public:
  explicit EventCounts(int total_cutoff) : counts_(total_cutoff) {}

  int total_cutoff() const { return counts_.total_cutoff(); }
  std::uint64_t count(const DetectionEvent& e) const;
  std::uint64_t shots() const { return shots_; }
  std::uint64_t overflow() const { return overflow_; }
  double frequency(const DetectionEvent& e) const;

  /// Header n_a,n_b,n_c,count; rows with a non-zero count.
  std::string to_csv() const;

 private:
  friend EventCounts sample_events(const JointDistribution&, std::uint64_t, std::mt19937_64&);
  JointDistribution counts_;  // stored as doubles, always integral
  std::uint64_t shots_ = 0;
  std::uint64_t overflow_ = 0;
};

/// Generator for substream `stream` of the root `seed`.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream);

/// Multinomial draw of `shots` events. Deterministic for a given seed.
EventCounts sample_events(const JointDistribution& joint, std::uint64_t shots, std::uint64_t seed);
EventCounts sample_events(const JointDistribution& joint, std::uint64_t shots, std::mt19937_64& rng);

/// Noise model of the reference field entering BS2.
struct ReferenceModel {
  enum class Kind { kPureCoherent, kPhaseDiffused, kExplicit };
  Kind kind = Kind::kPureCoherent;
  double alpha_mag = 0.0;
  double sigma = 0.0;  // Gaussian phase-diffusion width (radians); +inf fully diffuses
  std::optional<DensityMatrix> explicit_rho;

  static ReferenceModel pure(double alpha_mag);
  static ReferenceModel phase_diffused(double alpha_mag, double sigma);
  static ReferenceModel explicit_matrix(DensityMatrix rho_a);
};

/// rho_a on 0..cutoff. Phase-diffused: a_m a_n^* exp(-sigma^2 (m-n)^2 / 2).
DensityMatrix reference_density(const ReferenceModel& model, int cutoff);

/// <0|rho_a|lambda>.
Complex reference_offdiag(const ReferenceModel& model, int lambda);

/// Reference field for the measurement layer. Pure models stay on the
/// closed-form coherent path; others are decomposed into pure components.
ReferenceField make_reference_field(const ReferenceModel& model, int cutoff);

/// All event probabilities with total photon number <= total_cutoff at phase phi.
JointDistribution joint_distribution(const DensityMatrix& rho_c, const BeamSplitterSpec& bs1,
                                     const ReferenceField& reference, double phi, int total_cutoff);

/// Analytic detector smearing, optionally followed by Bernoulli inversion.
class SmearedSource : public ProbabilitySource {
 public:
  SmearedSource(DensityMatrix rho_c, ReferenceField reference, DetectorEfficiencies efficiencies, int total_cutoff,
                bool invert = false);

  ProbabilityEstimate probability(const DetectionEvent& event, const PhaseSetting& setting) const override;
  std::string describe() const override;

  /// Joint distribution actually observed at a setting (cached).
  std::shared_ptr<const JointDistribution> joint_at(const PhaseSetting& setting) const;
  double max_inversion_intermediate() const;

 private:
  DensityMatrix rho_c_;
  ReferenceField reference_;
  DetectorEfficiencies efficiencies_;
  int total_cutoff_;
  bool invert_;
  mutable std::mutex mutex_;
  mutable std::map<std::uint64_t, std::shared_ptr<const JointDistribution>> cache_;
  mutable double max_intermediate_ = 0.0;
};

/// Finite statistics: `shots` multinomial draws per phase setting from the
/// (smeared) joint distribution; each setting uses substream(seed, setting.key()).
class SampledSource : public ProbabilitySource {
 public:
  SampledSource(DensityMatrix rho_c, ReferenceField reference, DetectorEfficiencies efficiencies, int total_cutoff,
                std::uint64_t shots, std::uint64_t seed);

  ProbabilityEstimate probability(const DetectionEvent& event, const PhaseSetting& setting) const override;
  std::string describe() const override;

  std::shared_ptr<const EventCounts> counts_at(const PhaseSetting& setting) const;

 private:
  SmearedSource exact_;
  std::uint64_t shots_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  mutable std::map<std::uint64_t, std::shared_ptr<const EventCounts>> cache_;
};

}  // namespace opsynth
