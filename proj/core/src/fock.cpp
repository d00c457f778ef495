#include "opsynth/fock.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "opsynth/combinatorics.hpp"
#include "opsynth/errors.hpp"

namespace opsynth {

FockVector::FockVector(Eigen::VectorXcd amplitudes, bool normalized)
    : amplitudes_(std::move(amplitudes)), normalized_(normalized) {
  require(amplitudes_.size() >= 1, ErrorKind::kValidation, "FockVector: needs at least the vacuum amplitude");
  require(amplitudes_.allFinite(), ErrorKind::kValidation, "FockVector: non-finite amplitude");
  if (normalized_) {
    require(std::abs(amplitudes_.squaredNorm() - 1.0) <= kNormalizationTolerance, ErrorKind::kNumerical,
            "FockVector: flagged normalized but norm deviates from one");
  }
}

FockVector FockVector::zero(int cutoff) {
  require(cutoff >= 0, ErrorKind::kValidation, "FockVector: negative cutoff");
  return FockVector(Eigen::VectorXcd::Zero(cutoff + 1));
}

FockVector FockVector::basis(int n, int cutoff) {
  require(n >= 0 && n <= cutoff, ErrorKind::kCutoff, "FockVector::basis: level outside cutoff");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(cutoff + 1);
  v[n] = 1.0;
  return FockVector(std::move(v), true);
}

DensityMatrix DensityMatrix::from_entries(Eigen::MatrixXcd entries, double truncation_tail) {
  require(entries.rows() >= 1 && entries.rows() == entries.cols(), ErrorKind::kValidation,
          "DensityMatrix: entries must be a non-empty square matrix");
  require(entries.allFinite(), ErrorKind::kValidation, "DensityMatrix: non-finite entry");
  require(truncation_tail >= 0.0 && truncation_tail < 1.0, ErrorKind::kValidation,
          "DensityMatrix: truncation tail outside [0, 1)");
  const Eigen::Index dim = entries.rows();
  for (Eigen::Index m = 0; m < dim; ++m) {
    for (Eigen::Index n = m; n < dim; ++n) {
      if (std::abs(entries(m, n) - std::conj(entries(n, m))) > kHermitianTolerance) {
        std::ostringstream msg;
        msg << "DensityMatrix: not Hermitian at (" << m << ", " << n << ")";
        fail(ErrorKind::kNumerical, msg.str());
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < kEigenvalueFloor) {
    std::ostringstream msg;
    msg << "DensityMatrix: negative eigenvalue " << solver.eigenvalues().minCoeff();
    fail(ErrorKind::kNumerical, msg.str());
  }
  const double trace = entries.trace().real();
  if (trace > 1.0 + 1e-10 || trace < 1.0 - truncation_tail - 1e-10) {
    std::ostringstream msg;
    msg << "DensityMatrix: trace " << trace << " not within declared tail " << truncation_tail << " of one";
    fail(ErrorKind::kNumerical, msg.str());
  }
  return DensityMatrix(std::move(entries), truncation_tail);
}

std::vector<std::pair<double, FockVector>> DensityMatrix::pure_components(double floor) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries_);
  std::vector<std::pair<double, FockVector>> out;
  for (Eigen::Index k = solver.eigenvalues().size() - 1; k >= 0; --k) {
    const double weight = solver.eigenvalues()[k];
    if (weight <= floor) continue;
    out.emplace_back(weight, FockVector(solver.eigenvectors().col(k)));
  }
  return out;
}

double poisson_tail(double mean, int cutoff) {
  require(mean >= 0.0 && std::isfinite(mean), ErrorKind::kValidation, "poisson_tail: bad mean");
  if (mean == 0.0) return 0.0;
  double tail = 0.0;
  for (int n = cutoff + 1;; ++n) {
    const double term = std::exp(n * std::log(mean) - mean - log_factorial(n));
    tail += term;
    if (n > mean && term < 1e-18 * (tail + 1e-300)) break;
    if (n > cutoff + 10000) break;
  }
  return tail;
}

CoherentAmplitudes coherent_amplitudes(Complex alpha, int cutoff, double epsilon) {
  require(std::isfinite(alpha.real()) && std::isfinite(alpha.imag()), ErrorKind::kValidation,
          "coherent_amplitudes: non-finite alpha");
  require(cutoff >= 0, ErrorKind::kValidation, "coherent_amplitudes: negative cutoff");
  const double mag = std::abs(alpha);
  const double arg = std::arg(alpha);
  const double mean = mag * mag;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(cutoff + 1);
  c[0] = std::exp(-0.5 * mean);
  if (mag > 0.0) {
    for (int n = 1; n <= cutoff; ++n) {
      double modulus;
      if (n <= kExactFactorialLimit) {
        modulus = std::pow(mag, n) * std::exp(-0.5 * mean) / sqrt_factorial(n);
      } else {
        modulus = std::exp(n * std::log(mag) - 0.5 * mean - 0.5 * log_factorial(n));
      }
      c[n] = std::polar(modulus, n * arg);
    }
  }
  const double tail = poisson_tail(mean, cutoff);
  const bool normalized = tail <= kNormalizationTolerance &&
                          std::abs(c.squaredNorm() - 1.0) <= kNormalizationTolerance;
  return CoherentAmplitudes{FockVector(std::move(c), normalized), tail, tail > epsilon};
}

int coherent_cutoff(double alpha_mag, double epsilon) {
  require(alpha_mag >= 0.0 && std::isfinite(alpha_mag), ErrorKind::kValidation, "coherent_cutoff: bad |alpha|");
  require(epsilon > 0.0, ErrorKind::kValidation, "coherent_cutoff: epsilon must be positive");
  int cutoff = 0;
  while (poisson_tail(alpha_mag * alpha_mag, cutoff) >= epsilon) ++cutoff;
  return cutoff;
}

DensityMatrix density_from_pure(const FockVector& psi, double declared_tail) {
  const double deficit = 1.0 - psi.norm_squared();
  require(std::abs(deficit - declared_tail) <= 1e-9, ErrorKind::kValidation,
          "density_from_pure: input is not normalized (beyond the declared tail)");
  const Eigen::VectorXcd& c = psi.amplitudes();
  return DensityMatrix::from_entries(c * c.adjoint(), std::max(declared_tail, 0.0));
}

DensityMatrix density_from_pure(const CoherentAmplitudes& coherent) {
  return density_from_pure(coherent.state, coherent.tail);
}

std::optional<TestStateKind> parse_test_state_kind(std::string_view name) {
  if (name == "fock") return TestStateKind::kFock;
  if (name == "coherent") return TestStateKind::kCoherent;
  if (name == "superposition") return TestStateKind::kSuperposition;
  if (name == "thermal") return TestStateKind::kThermal;
  if (name == "random") return TestStateKind::kRandom;
  return std::nullopt;
}

std::string_view to_string(TestStateKind kind) {
  switch (kind) {
    case TestStateKind::kFock: return "fock";
    case TestStateKind::kCoherent: return "coherent";
    case TestStateKind::kSuperposition: return "superposition";
    case TestStateKind::kThermal: return "thermal";
    case TestStateKind::kRandom: return "random";
  }
  return "unknown";
}

TestStateSpec TestStateSpec::fock(int n) {
  TestStateSpec s;
  s.kind = TestStateKind::kFock;
  s.photon_number = n;
  return s;
}

TestStateSpec TestStateSpec::coherent(Complex alpha) {
  TestStateSpec s;
  s.kind = TestStateKind::kCoherent;
  s.alpha = alpha;
  return s;
}

TestStateSpec TestStateSpec::superposition(std::vector<std::pair<int, Complex>> components) {
  TestStateSpec s;
  s.kind = TestStateKind::kSuperposition;
  s.components = std::move(components);
  return s;
}

TestStateSpec TestStateSpec::thermal(double mean) {
  TestStateSpec s;
  s.kind = TestStateKind::kThermal;
  s.mean_photons = mean;
  return s;
}

TestStateSpec TestStateSpec::random(std::uint64_t seed) {
  TestStateSpec s;
  s.kind = TestStateKind::kRandom;
  s.seed = seed;
  return s;
}

DensityMatrix make_test_state(const TestStateSpec& spec, int cutoff) {
  require(cutoff >= 0, ErrorKind::kValidation, "make_test_state: negative cutoff");
  const int dim = cutoff + 1;
  switch (spec.kind) {
    case TestStateKind::kFock:
      return density_from_pure(FockVector::basis(spec.photon_number, cutoff));

    case TestStateKind::kCoherent:
      return density_from_pure(coherent_amplitudes(spec.alpha, cutoff));

    case TestStateKind::kSuperposition: {
      require(!spec.components.empty(), ErrorKind::kValidation, "superposition: no components");
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
      for (const auto& [n, amp] : spec.components) {
        require(n >= 0 && n <= cutoff, ErrorKind::kCutoff, "superposition: component above cutoff");
        v[n] += amp;
      }
      const double norm = v.norm();
      require(norm > 0.0, ErrorKind::kValidation, "superposition: zero vector");
      v /= norm;
      return density_from_pure(FockVector(std::move(v)));
    }

    case TestStateKind::kThermal: {
      const double mean = spec.mean_photons;
      require(mean >= 0.0 && std::isfinite(mean), ErrorKind::kValidation, "thermal: mean must be >= 0");
      Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
      const double ratio = mean / (1.0 + mean);
      for (int n = 0; n < dim; ++n) rho(n, n) = std::pow(ratio, n) / (1.0 + mean);
      return DensityMatrix::from_entries(std::move(rho), std::pow(ratio, dim));
    }

    case TestStateKind::kRandom: {
      require(spec.seed.has_value(), ErrorKind::kValidation, "random: a seed is required");
      std::mt19937_64 rng(*spec.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::MatrixXcd g(dim, dim);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          const double re = normal(rng);
          const double im = normal(rng);
          g(i, j) = Complex(re, im);
        }
      }
      Eigen::MatrixXcd rho = g * g.adjoint();
      rho /= rho.trace().real();
      rho = 0.5 * (rho + rho.adjoint()).eval();
      return DensityMatrix::from_entries(std::move(rho));
    }
  }
  fail(ErrorKind::kValidation, "make_test_state: unknown kind");
}

}  // namespace opsynth
