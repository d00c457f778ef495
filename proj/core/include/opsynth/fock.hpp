#pragma once

// Truncated single-mode Fock space: state vectors over |0>..|cutoff>,
// density matrices, and the test-state corpus.

#include <complex>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace opsynth {

using Complex = std::complex<double>;

inline constexpr double kDefaultTruncationEpsilon = 1e-12;
inline constexpr double kNormalizationTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-10;

/// Amplitudes c_0..c_cutoff of one mode. May be unnormalized; the
/// `normalized` flag is only set when the norm has been checked.
class FockVector {
 public:
  explicit FockVector(Eigen::VectorXcd amplitudes, bool normalized = false);

  static FockVector zero(int cutoff);
  static FockVector basis(int n, int cutoff);

  int cutoff() const { return static_cast<int>(amplitudes_.size()) - 1; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Complex operator[](int n) const { return amplitudes_[n]; }
  double norm_squared() const { return amplitudes_.squaredNorm(); }
  bool normalized() const { return normalized_; }

 private:
  Eigen::VectorXcd amplitudes_;
  bool normalized_;
};

/// Hermitian, positive semidefinite matrix on |0>..|cutoff>. The trace may
/// fall short of one by the truncation tail recorded at construction; it is
/// never renormalised.
class DensityMatrix {
 public:
  /// Throws Error(kNumerical) when Hermiticity, positivity or trace checks fail.
  static DensityMatrix from_entries(Eigen::MatrixXcd entries, double truncation_tail = 0.0);

  int cutoff() const { return static_cast<int>(entries_.rows()) - 1; }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  Complex operator()(int m, int n) const { return entries_(m, n); }
  double truncation_tail() const { return truncation_tail_; }
  double trace() const { return entries_.trace().real(); }

  /// Eigenpairs with eigenvalue above `floor`, largest first.
  std::vector<std::pair<double, FockVector>> pure_components(double floor = 1e-15) const;

 private:
  DensityMatrix(Eigen::MatrixXcd entries, double tail) : entries_(std::move(entries)), truncation_tail_(tail) {}

  Eigen::MatrixXcd entries_;
  double truncation_tail_;
};

struct CoherentAmplitudes {
  FockVector state;
  double tail;                // 1 - sum |c_n|^2, summed directly from the Poisson tail
  bool tail_exceeds_epsilon;  // structured warning, not an error
};

/// c_n = alpha^n exp(-|alpha|^2/2) / sqrt(n!) for n = 0..cutoff.
CoherentAmplitudes coherent_amplitudes(Complex alpha, int cutoff,
                                       double epsilon = kDefaultTruncationEpsilon);

/// Poisson tail sum_{n > cutoff} e^{-mean} mean^n / n!.
double poisson_tail(double mean, int cutoff);

/// Smallest cutoff whose coherent-state tail is below `epsilon`.
int coherent_cutoff(double alpha_mag, double epsilon = kDefaultTruncationEpsilon);

/// |psi><psi|. `declared_tail` is the norm deficit the caller vouches for.
DensityMatrix density_from_pure(const FockVector& psi, double declared_tail = 0.0);
DensityMatrix density_from_pure(const CoherentAmplitudes& coherent);

enum class TestStateKind { kFock, kCoherent, kSuperposition, kThermal, kRandom };

std::optional<TestStateKind> parse_test_state_kind(std::string_view name);
std::string_view to_string(TestStateKind kind);

struct TestStateSpec {
  TestStateKind kind = TestStateKind::kFock;
  int photon_number = 0;                                 // fock
  Complex alpha{0.0, 0.0};                               // coherent
  std::vector<std::pair<int, Complex>> components;       // superposition, renormalised
  double mean_photons = 0.0;                             // thermal
  std::optional<std::uint64_t> seed;                     // random

  static TestStateSpec fock(int n);
  static TestStateSpec coherent(Complex alpha);
  static TestStateSpec superposition(std::vector<std::pair<int, Complex>> components);
  static TestStateSpec thermal(double mean);
  static TestStateSpec random(std::uint64_t seed);
};

/// Test corpus. Random states are G G^dagger / Tr(G G^dagger) with G a
/// (cutoff+1)x(cutoff+1) matrix of independent standard complex normals
/// drawn from mt19937_64(seed).
DensityMatrix make_test_state(const TestStateSpec& spec, int cutoff);

}  // namespace opsynth
