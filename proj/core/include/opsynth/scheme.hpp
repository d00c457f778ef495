#pragma once

// Two-beam-splitter measurement of individual density-matrix elements.
//
// The signal (mode c) meets a vacuum (mode b) on BS1; the b output then
// meets a phase-shifted reference field (mode a) on a balanced BS2. For a
// photocount triple e = (n_a, n_b, n_c) the apparatus realises the POM
// element |q><q| on the signal, with
//
//     |q> = (-i)^{n_b} t^{n_c} (alpha* - r c^dag)^{n_a} (alpha* + r c^dag)^{n_b} |n_c>
//           / (2^{lambda/2} e^{|alpha|^2/2} sqrt(n_a! n_b!)),   lambda = n_a + n_b,
//
// supported on |n_c>..|n_c + lambda>. Averaging over the phase settings
// phi(beta, j) = (beta + 2 j) pi / lambda leaves only the diagonal and the
// |N><N+lambda| corners, and four choices of beta isolate <N+lambda|rho|N>.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opsynth/fock.hpp"
#include "opsynth/optics.hpp"

namespace opsynth {

struct DetectionEvent {
  int n_a = 0;
  int n_b = 0;
  int n_c = 0;

  int lambda() const { return n_a + n_b; }
  int total() const { return n_a + n_b + n_c; }

  /// (lambda/2, lambda/2, N): the even-lambda event.
  static DetectionEvent e1(int N, int lambda);
  /// ((lambda+1)/2, (lambda-1)/2, N): the odd-lambda event.
  static DetectionEvent e2(int N, int lambda);
  /// ((lambda-1)/2, (lambda+1)/2, N): companion of e2.
  static DetectionEvent e3(int N, int lambda);
  /// e1 or e2 depending on the parity of lambda; (0, 0, N) for lambda = 0.
  static DetectionEvent for_element(int N, int lambda);

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

enum class EventClass { kDiagonal, kEven, kOddE2, kOddE3, kOther };
EventClass classify(const DetectionEvent& event);

/// Exact rational with positive denominator, used for the phase offset beta.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend bool operator==(const Rational&, const Rational&) = default;
  friend auto operator<=>(const Rational& a, const Rational& b) { return a.num_ * b.den_ <=> b.num_ * a.den_; }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// beta = 0, 1, 1/2, 3/2 in the order they enter the reconstruction.
std::array<Rational, 4> reconstruction_betas();

struct PhaseSchedule {
  Rational beta;
  int lambda = 1;
  std::vector<int> j_values;

  /// j = 0..lambda/2 - 1 for even lambda, 0..lambda - 1 for odd lambda.
  static PhaseSchedule make(Rational beta, int lambda);

  /// (beta + 2 j) pi / lambda, evaluated as one rational multiple of pi.
  double phi(int j) const;
};

enum class Parity { kEven, kOdd };

/// What stands in for |a_0 a_lambda^*| in the normalisation constant.
struct NormReference {
  enum class Kind { kPureCoherent, kMixed };
  Kind kind = Kind::kPureCoherent;
  double alpha_mag = 0.0;    // pure coherent reference
  Complex offdiag{0.0, 0.0};  // <0|rho_a|lambda> for a mixed reference

  static NormReference pure(double alpha_mag);
  static NormReference mixed(Complex rho_a_0_lambda);
};

inline constexpr double kDefaultNormFloor = 1e-12;

struct NormConstant {
  Complex value;
  Parity parity;
  int N;
  int lambda;
  double t;
  double r;
  NormReference reference;

  double magnitude() const { return std::abs(value); }
};

/// Reference field entering BS2: either a pure coherent state |alpha| e^{i phi}
/// or a density matrix rho_a that the phase shifter rotates as
/// e^{i N_a phi} rho_a e^{-i N_a phi}.
class ReferenceField {
 public:
  static ReferenceField coherent(double alpha_mag);
  static ReferenceField mixed(const DensityMatrix& rho_a);

  bool is_pure_coherent() const { return !rho_.has_value(); }
  double alpha_mag() const { return alpha_mag_; }
  const std::optional<DensityMatrix>& density() const { return rho_; }
  const std::vector<std::pair<double, FockVector>>& components() const { return components_; }

  /// <0|rho_a|lambda>; a_0 a_lambda^* for the pure coherent reference.
  Complex offdiag(int lambda) const;
  NormReference norm_reference(int lambda) const;

 private:
  ReferenceField() = default;

  double alpha_mag_ = 0.0;
  std::optional<DensityMatrix> rho_;
  std::vector<std::pair<double, FockVector>> components_;
};

/// Unnormalised |q> for a pure coherent reference of magnitude `alpha_mag`
/// at phi = 0. Requires n_c + lambda <= cutoff.
FockVector q_vector(const DetectionEvent& event, const BeamSplitterSpec& bs1, double alpha_mag, int cutoff);

/// |q> for an arbitrary reference ket (at phi = 0).
FockVector q_vector_for_reference(const DetectionEvent& event, const BeamSplitterSpec& bs1,
                                  const FockVector& reference_ket, int cutoff);

/// As the two above, but amplitudes above `cutoff` are dropped instead of
/// rejected. Entries that are kept are bitwise identical.
FockVector q_vector_clipped(const DetectionEvent& event, const BeamSplitterSpec& bs1, double alpha_mag, int cutoff);
FockVector q_vector_for_reference_clipped(const DetectionEvent& event, const BeamSplitterSpec& bs1,
                                          const FockVector& reference_ket, int cutoff);

struct ProbabilityDiagnostics {
  double raw = 0.0;      // real part before clamping
  double imag = 0.0;     // residual imaginary part
  bool clamped = false;  // raw was in [-1e-12, 0) and got clamped to 0
};

/// <q_phi|rho_c|q_phi> with (q_phi)_n = e^{i n phi} q_n.
double pom_probability(const DensityMatrix& rho_c, const FockVector& q, double phi,
                       ProbabilityDiagnostics* diagnostics = nullptr);

/// Probability of `event` at reference phase `phi`, for any reference field.
double event_probability(const DensityMatrix& rho_c, const DetectionEvent& event, const BeamSplitterSpec& bs1,
                         const ReferenceField& reference, double phi);

/// Uniform average of the event probability over the schedule for (beta, lambda).
double cycled_probability(const DensityMatrix& rho_c, const DetectionEvent& event, Rational beta,
                          const BeamSplitterSpec& bs1, double alpha_mag);
double cycled_probability(const DensityMatrix& rho_c, const DetectionEvent& event, Rational beta,
                          const BeamSplitterSpec& bs1, const ReferenceField& reference);

/// f_N f_{N+lambda}^* (even lambda) or g_N g_{N+lambda}^* (odd lambda).
/// Throws kUnmeasurableElement when the magnitude is below `floor`.
NormConstant norm_constant(int N, int lambda, const BeamSplitterSpec& bs1, const NormReference& reference,
                           double floor = kDefaultNormFloor);

/// Cycled probabilities in the order beta = 0, 1, 1/2, 3/2.
struct CycledProbabilities {
  double p0 = 0.0;
  double p1 = 0.0;
  double p_half = 0.0;
  double p_three_half = 0.0;
};

/// [P0 - P1 + i (P1/2 - P3/2)] / (4 nc) = <N+lambda|rho_c|N>.
Complex reconstruct_offdiag(const CycledProbabilities& probabilities, const NormConstant& nc);

/// P / (t^{2N} e^{-|alpha|^2}) for the event (0, 0, N).
double reconstruct_diag(double probability, int N, const BeamSplitterSpec& bs1, double alpha_mag);
/// P / (t^{2N} <0|rho_a|0>).
double reconstruct_diag(double probability, int N, const BeamSplitterSpec& bs1, const ReferenceField& reference,
                        double floor = kDefaultNormFloor);

/// Proportionality constant of the (0, 0, N) POM element.
double diagonal_norm(int N, const BeamSplitterSpec& bs1, const ReferenceField& reference);

struct OptimalParams {
  double alpha_sq;
  double t_over_r_sq;
  bool diagonal;  // lambda = 0: weakest reference and t -> 1; callers pick a compromise
};

/// (lambda/2, 2N/lambda). For lambda = 0 returns (0, +inf) flagged `diagonal`.
OptimalParams optimal_params(int N, int lambda);

}  // namespace opsynth
