#pragma once

// Lossless beam splitters and phase shifters in the photon-number basis.
//
// Sign convention: a beam splitter of mixing angle eta (t = cos eta,
// r = sin eta) acts on creation operators as
//
//     a^dagger -> t a^dagger - i r b^dagger,   b^dagger -> t b^dagger - i r a^dagger,
//
// and leaves the two-mode vacuum alone. In terms of R = exp[i eta (a^dagger b + b^dagger a)]
// this map is R^dagger, so `bs_block` returns the blocks of exp[-i eta G] with
// G = a^dagger b + b^dagger a. `Propagation::kEvolve` applies the adjoint, R itself.

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "opsynth/fock.hpp"

namespace opsynth {

class BeamSplitterSpec {
 public:
  /// mixing_angle in [0, pi/2].
  explicit BeamSplitterSpec(double mixing_angle);

  static BeamSplitterSpec balanced();
  static BeamSplitterSpec from_transmissivity(double t_squared);
  /// (t/r)^2 in [0, inf]; infinity gives t = 1.
  static BeamSplitterSpec from_ratio(double t_over_r_squared);

  double mixing_angle() const { return mixing_angle_; }
  double t() const { return t_; }
  double r() const { return r_; }
  double t_over_r_squared() const;

  friend bool operator==(const BeamSplitterSpec& a, const BeamSplitterSpec& b) {
    return a.mixing_angle_ == b.mixing_angle_;
  }

 private:
  double mixing_angle_;
  double t_;
  double r_;
};

/// Unitary on the (total_n + 1)-dimensional span of |total_n - i, i>, i = 0..total_n
/// (index = photons in the second mode of the pair).
struct TwoModeBlock {
  int total_n;
  Eigen::MatrixXcd matrix;
};

TwoModeBlock bs_block(const BeamSplitterSpec& spec, int total_n);

/// Generator block G = a^dagger b + b^dagger a on the same basis (real, tridiagonal).
Eigen::MatrixXd bs_generator_block(int total_n);

enum class Mode : int { kA = 0, kB = 1, kC = 2 };

struct ModePair {
  Mode first;
  Mode second;
};

enum class Propagation {
  kTransform,  // the creation-operator map above (R^dagger)
  kEvolve,     // Schroedinger evolution by R = exp[i eta G]
};

/// Amplitudes over |n_a, n_b, n_c> with n_a + n_b + n_c <= total_cutoff. Storage
/// is a dense cube; entries above the total cutoff are held at zero.
class ThreeModeState {
 public:
  explicit ThreeModeState(int total_cutoff);

  /// Product state, dropping components whose total exceeds the cutoff.
  static ThreeModeState product(const FockVector& a, const FockVector& b, const FockVector& c, int total_cutoff);
  static ThreeModeState basis(int n_a, int n_b, int n_c, int total_cutoff);

  int total_cutoff() const { return total_cutoff_; }
  Complex amplitude(int n_a, int n_b, int n_c) const;
  Complex& at(int n_a, int n_b, int n_c) { return data_[index(n_a, n_b, n_c)]; }
  Complex at(int n_a, int n_b, int n_c) const { return data_[index(n_a, n_b, n_c)]; }
  double norm_squared() const;

  /// Sum of |amplitude|^2 over the block with the given total photon number.
  double block_norm_squared(int total) const;

 private:
  std::size_t index(int n_a, int n_b, int n_c) const {
    const std::size_t side = static_cast<std::size_t>(total_cutoff_) + 1;
    return (static_cast<std::size_t>(n_a) * side + static_cast<std::size_t>(n_b)) * side +
           static_cast<std::size_t>(n_c);
  }

  int total_cutoff_;
  std::vector<Complex> data_;
};

/// Applies the beam splitter to the selected pair within every total-photon
/// block; the third mode is a spectator. Throws kValidation for a repeated mode.
ThreeModeState apply_bs(const ThreeModeState& state, ModePair pair, const BeamSplitterSpec& spec,
                        Propagation propagation = Propagation::kTransform);

/// c_n -> exp(i n phi) c_n.
FockVector apply_phase(const FockVector& state, double phi);

}  // namespace opsynth
