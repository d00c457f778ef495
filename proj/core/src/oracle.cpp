#include "opsynth/oracle.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "opsynth/errors.hpp"

namespace opsynth {

namespace {

std::vector<std::pair<double, FockVector>> reference_components(const OracleSetup& setup, double phi) {
  std::vector<std::pair<double, FockVector>> out;
  if (setup.reference) {
    for (auto& [w, ket] : setup.reference->pure_components()) out.emplace_back(w, apply_phase(ket, phi));
  } else {
    out.emplace_back(1.0, coherent_amplitudes(std::polar(setup.alpha_mag, phi), setup.total_cutoff).state);
  }
  return out;
}

ThreeModeState propagate(const FockVector& a, const FockVector& c, const BeamSplitterSpec& bs1, int T) {
  ThreeModeState state = ThreeModeState::product(a, FockVector::basis(0, 0), c, T);
  state = apply_bs(state, {Mode::kB, Mode::kC}, bs1, Propagation::kEvolve);
  return apply_bs(state, {Mode::kA, Mode::kB}, BeamSplitterSpec::balanced(), Propagation::kEvolve);
}

void check_setup(const OracleSetup& setup) {
  require(setup.total_cutoff >= 0, ErrorKind::kValidation, "oracle: negative total cutoff");
  require(std::isfinite(setup.alpha_mag) && setup.alpha_mag >= 0.0, ErrorKind::kValidation,
          "oracle: reference |alpha| must be >= 0");
}

}  // namespace

int default_total_cutoff(int n_max, int lambda_max, double alpha_mag) {
  require(n_max >= 0 && lambda_max >= 0 && alpha_mag >= 0.0, ErrorKind::kValidation,
          "default_total_cutoff: negative argument");
  return n_max + lambda_max + static_cast<int>(std::ceil(alpha_mag * alpha_mag + 6.0 * alpha_mag));
}

JointDistribution forward_distribution(const DensityMatrix& rho_c, const OracleSetup& setup, double phi) {
  check_setup(setup);
  const int T = setup.total_cutoff;
  JointDistribution out(T);
  const auto signal = rho_c.pure_components();
  const auto reference = reference_components(setup, phi);
  for (const auto& [wa, ket_a] : reference) {
    for (const auto& [wc, ket_c] : signal) {
      const ThreeModeState psi = propagate(ket_a, ket_c, setup.bs1, T);
      const double w = wa * wc;
      for (int a = 0; a <= T; ++a) {
        for (int b = 0; a + b <= T; ++b) {
          for (int c = 0; a + b + c <= T; ++c) out.at(a, b, c) += w * std::norm(psi.at(a, b, c));
        }
      }
    }
  }
  out.set_tail(std::max(0.0, 1.0 - out.total()));
  return out;
}

double forward_probability(const DensityMatrix& rho_c, const OracleSetup& setup, const DetectionEvent& event,
                           double phi) {
  require(event.n_a >= 0 && event.n_b >= 0 && event.n_c >= 0, ErrorKind::kValidation,
          "forward_probability: negative photocount");
  require(event.total() <= setup.total_cutoff, ErrorKind::kCutoff,
          "forward_probability: event exceeds the total cutoff " + std::to_string(setup.total_cutoff));
  check_setup(setup);
  const int T = setup.total_cutoff;
  double p = 0.0;
  for (const auto& [wa, ket_a] : reference_components(setup, phi)) {
    for (const auto& [wc, ket_c] : rho_c.pure_components()) {
      p += wa * wc * std::norm(propagate(ket_a, ket_c, setup.bs1, T).at(event.n_a, event.n_b, event.n_c));
    }
  }
  return p;
}

FockVector q_by_contraction(const DetectionEvent& event, const BeamSplitterSpec& bs1, const FockVector& reference_ket,
                            int cutoff) {
  require(event.n_a >= 0 && event.n_b >= 0 && event.n_c >= 0, ErrorKind::kValidation,
          "q_by_contraction: negative photocount");
  require(cutoff >= 0, ErrorKind::kValidation, "q_by_contraction: negative cutoff");
  const int T = event.total();
  // U = R2 R1, so q_m = <alpha, 0, m| U^dagger |n_a, n_b, n_c>.
  ThreeModeState s = ThreeModeState::basis(event.n_a, event.n_b, event.n_c, T);
  s = apply_bs(s, {Mode::kA, Mode::kB}, BeamSplitterSpec::balanced(), Propagation::kTransform);
  s = apply_bs(s, {Mode::kB, Mode::kC}, bs1, Propagation::kTransform);
  Eigen::VectorXcd q = Eigen::VectorXcd::Zero(cutoff + 1);
  for (int m = 0; m <= std::min(cutoff, T); ++m) {
    Complex sum{0.0, 0.0};
    for (int k = 0; k + m <= T && k <= reference_ket.cutoff(); ++k) sum += std::conj(reference_ket[k]) * s.at(k, 0, m);
    q[m] = sum;
  }
  return FockVector(std::move(q));
}

Eigen::MatrixXcd pom_completeness(const OracleSetup& setup, double phi, int n_max) {
  check_setup(setup);
  require(n_max >= 0, ErrorKind::kValidation, "pom_completeness: negative n_max");
  const int T = setup.total_cutoff;
  const FockVector ket_a = coherent_amplitudes(std::polar(setup.alpha_mag, phi), T).state;
  std::vector<ThreeModeState> outputs;
  outputs.reserve(static_cast<std::size_t>(n_max + 1));
  for (int m = 0; m <= n_max; ++m) outputs.push_back(propagate(ket_a, FockVector::basis(m, n_max), setup.bs1, T));

  // <m| sum_e Pi(e) |m'> = sum_e <e|U|alpha,0,m>^* <e|U|alpha,0,m'>.
  Eigen::MatrixXcd residual = Eigen::MatrixXcd::Identity(n_max + 1, n_max + 1);
  for (int m = 0; m <= n_max; ++m) {
    for (int mp = 0; mp <= n_max; ++mp) {
      Complex sum{0.0, 0.0};
      for (int a = 0; a <= T; ++a) {
        for (int b = 0; a + b <= T; ++b) {
          for (int c = 0; a + b + c <= T; ++c) {
            sum += std::conj(outputs[m].at(a, b, c)) * outputs[mp].at(a, b, c);
          }
        }
      }
      residual(m, mp) -= sum;
    }
  }
  return residual;
}

}  // namespace opsynth
