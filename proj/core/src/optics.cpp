#include "opsynth/optics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "opsynth/errors.hpp"

namespace opsynth {

BeamSplitterSpec::BeamSplitterSpec(double mixing_angle) : mixing_angle_(mixing_angle) {
  require(std::isfinite(mixing_angle) && mixing_angle >= 0.0 && mixing_angle <= std::numbers::pi / 2,
          ErrorKind::kValidation, "BeamSplitterSpec: mixing angle outside [0, pi/2]");
  t_ = std::cos(mixing_angle);
  r_ = std::sin(mixing_angle);
  if (mixing_angle == std::numbers::pi / 2) t_ = 0.0;
}

BeamSplitterSpec BeamSplitterSpec::balanced() { return BeamSplitterSpec(std::numbers::pi / 4); }

BeamSplitterSpec BeamSplitterSpec::from_transmissivity(double t_squared) {
  require(t_squared >= 0.0 && t_squared <= 1.0, ErrorKind::kValidation, "transmissivity outside [0, 1]");
  return BeamSplitterSpec(std::acos(std::sqrt(t_squared)));
}

BeamSplitterSpec BeamSplitterSpec::from_ratio(double t_over_r_squared) {
  require(t_over_r_squared >= 0.0 && !std::isnan(t_over_r_squared), ErrorKind::kValidation,
          "(t/r)^2 must be non-negative");
  if (std::isinf(t_over_r_squared)) return BeamSplitterSpec(0.0);
  return BeamSplitterSpec(std::atan2(1.0, std::sqrt(t_over_r_squared)));
}

double BeamSplitterSpec::t_over_r_squared() const {
  if (r_ == 0.0) return std::numeric_limits<double>::infinity();
  return (t_ * t_) / (r_ * r_);
}

Eigen::MatrixXd bs_generator_block(int total_n) {
  require(total_n >= 0, ErrorKind::kValidation, "bs_block: negative photon number");
  const int dim = total_n + 1;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
  // Index i holds |total_n - i, i>; a^dagger b maps i -> i - 1.
  for (int i = 1; i < dim; ++i) {
    const double element = std::sqrt(static_cast<double>(total_n - i + 1) * static_cast<double>(i));
    g(i - 1, i) = element;
    g(i, i - 1) = element;
  }
  return g;
}

TwoModeBlock bs_block(const BeamSplitterSpec& spec, int total_n) {
  const Eigen::MatrixXd g = bs_generator_block(total_n);
  const int dim = total_n + 1;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sub = Eigen::VectorXd::Zero(std::max(dim - 1, 0));
  for (int i = 0; i + 1 < dim; ++i) sub[i] = g(i + 1, i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  if (dim == 1 || spec.mixing_angle() == 0.0) {
    return TwoModeBlock{total_n, Eigen::MatrixXcd::Identity(dim, dim)};
  }
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const Eigen::MatrixXd& v = solver.eigenvectors();
  Eigen::VectorXcd phases(dim);
  for (int k = 0; k < dim; ++k) phases[k] = std::polar(1.0, -spec.mixing_angle() * solver.eigenvalues()[k]);
  Eigen::MatrixXcd u = v.cast<Complex>() * phases.asDiagonal() * v.transpose().cast<Complex>();
  return TwoModeBlock{total_n, std::move(u)};
}

ThreeModeState::ThreeModeState(int total_cutoff) : total_cutoff_(total_cutoff) {
  require(total_cutoff >= 0, ErrorKind::kValidation, "ThreeModeState: negative total cutoff");
  const std::size_t side = static_cast<std::size_t>(total_cutoff) + 1;
  data_.assign(side * side * side, Complex(0.0, 0.0));
}

ThreeModeState ThreeModeState::product(const FockVector& a, const FockVector& b, const FockVector& c,
                                       int total_cutoff) {
  ThreeModeState out(total_cutoff);
  for (int na = 0; na <= std::min(a.cutoff(), total_cutoff); ++na) {
    if (a[na] == Complex(0.0, 0.0)) continue;
    for (int nb = 0; nb <= std::min(b.cutoff(), total_cutoff - na); ++nb) {
      if (b[nb] == Complex(0.0, 0.0)) continue;
      const Complex ab = a[na] * b[nb];
      for (int nc = 0; nc <= std::min(c.cutoff(), total_cutoff - na - nb); ++nc) {
        out.at(na, nb, nc) = ab * c[nc];
      }
    }
  }
  return out;
}

ThreeModeState ThreeModeState::basis(int n_a, int n_b, int n_c, int total_cutoff) {
  require(n_a >= 0 && n_b >= 0 && n_c >= 0, ErrorKind::kValidation, "ThreeModeState: negative photon number");
  require(n_a + n_b + n_c <= total_cutoff, ErrorKind::kCutoff, "ThreeModeState: basis state above total cutoff");
  ThreeModeState out(total_cutoff);
  out.at(n_a, n_b, n_c) = 1.0;
  return out;
}

Complex ThreeModeState::amplitude(int n_a, int n_b, int n_c) const {
  if (n_a < 0 || n_b < 0 || n_c < 0 || n_a + n_b + n_c > total_cutoff_) return {0.0, 0.0};
  return at(n_a, n_b, n_c);
}

double ThreeModeState::norm_squared() const {
  double sum = 0.0;
  for (const auto& v : data_) sum += std::norm(v);
  return sum;
}

double ThreeModeState::block_norm_squared(int total) const {
  double sum = 0.0;
  for (int na = 0; na <= total; ++na) {
    for (int nb = 0; na + nb <= total; ++nb) sum += std::norm(amplitude(na, nb, total - na - nb));
  }
  return sum;
}

ThreeModeState apply_bs(const ThreeModeState& state, ModePair pair, const BeamSplitterSpec& spec,
                        Propagation propagation) {
  const int first = static_cast<int>(pair.first);
  const int second = static_cast<int>(pair.second);
  require(first != second, ErrorKind::kValidation, "apply_bs: mode pair must name two different modes");
  require(first >= 0 && first < 3 && second >= 0 && second < 3, ErrorKind::kValidation,
          "apply_bs: mode index out of range");
  const int spectator = 3 - first - second;
  const int cutoff = state.total_cutoff();

  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(cutoff + 1);
  for (int s = 0; s <= cutoff; ++s) {
    Eigen::MatrixXcd u = bs_block(spec, s).matrix;
    if (propagation == Propagation::kEvolve) u.adjointInPlace();
    blocks.push_back(std::move(u));
  }

  ThreeModeState out(cutoff);
  std::array<int, 3> n{};
  Eigen::VectorXcd in_block;
  for (int k = 0; k <= cutoff; ++k) {
    n[spectator] = k;
    for (int s = 0; s + k <= cutoff; ++s) {
      in_block.resize(s + 1);
      bool any = false;
      for (int i = 0; i <= s; ++i) {
        n[first] = s - i;
        n[second] = i;
        in_block[i] = state.at(n[0], n[1], n[2]);
        any = any || in_block[i] != Complex(0.0, 0.0);
      }
      if (!any) continue;
      const Eigen::VectorXcd out_block = blocks[s] * in_block;
      for (int i = 0; i <= s; ++i) {
        n[first] = s - i;
        n[second] = i;
        out.at(n[0], n[1], n[2]) = out_block[i];
      }
    }
  }
  return out;
}

FockVector apply_phase(const FockVector& state, double phi) {
  Eigen::VectorXcd c = state.amplitudes();
  for (int n = 0; n <= state.cutoff(); ++n) c[n] *= std::polar(1.0, n * phi);
  return FockVector(std::move(c), state.normalized());
}

}  // namespace opsynth
