#include "opsynth/scheme.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "opsynth/combinatorics.hpp"
#include "opsynth/errors.hpp"

namespace opsynth {

namespace {

constexpr Complex kI{0.0, 1.0};

// i^k for integer k >= 0.
Complex i_power(int k) {
  switch (k % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

Complex minus_i_power(int k) { return i_power((4 - k % 4) % 4); }

// sqrt((N + j)! / N!)
double ladder_factor(int N, int j) {
  if (N + j <= kExactFactorialLimit) return sqrt_factorial(N + j) / sqrt_factorial(N);
  return std::exp(0.5 * (log_factorial(N + j) - log_factorial(N)));
}

void check_event(const DetectionEvent& e) {
  require(e.n_a >= 0 && e.n_b >= 0 && e.n_c >= 0, ErrorKind::kValidation, "detection event: negative photocount");
}

void check_probability(double p, const char* what) {
  require(std::isfinite(p) && p >= -1e-6 && p <= 1.0 + 1e-6, ErrorKind::kValidation,
          std::string(what) + ": probability outside [0, 1]");
}

// |a_0 a_lambda^*| for a coherent state of magnitude alpha_mag.
double coherent_corner(double alpha_mag, int lambda) {
  if (lambda == 0) return std::exp(-alpha_mag * alpha_mag);
  if (alpha_mag == 0.0) return 0.0;
  return std::exp(-alpha_mag * alpha_mag + lambda * std::log(alpha_mag) - 0.5 * log_factorial(lambda));
}

}  // namespace

DetectionEvent DetectionEvent::e1(int N, int lambda) {
  require(lambda >= 0 && lambda % 2 == 0, ErrorKind::kValidation, "e1 needs an even lambda");
  return {lambda / 2, lambda / 2, N};
}

DetectionEvent DetectionEvent::e2(int N, int lambda) {
  require(lambda >= 1 && lambda % 2 == 1, ErrorKind::kValidation, "e2 needs an odd lambda");
  return {(lambda + 1) / 2, (lambda - 1) / 2, N};
}

DetectionEvent DetectionEvent::e3(int N, int lambda) {
  require(lambda >= 1 && lambda % 2 == 1, ErrorKind::kValidation, "e3 needs an odd lambda");
  return {(lambda - 1) / 2, (lambda + 1) / 2, N};
}

DetectionEvent DetectionEvent::for_element(int N, int lambda) {
  require(N >= 0 && lambda >= 0, ErrorKind::kValidation, "element indices must be non-negative");
  if (lambda == 0) return {0, 0, N};
  return lambda % 2 == 0 ? e1(N, lambda) : e2(N, lambda);
}

EventClass classify(const DetectionEvent& event) {
  if (event.lambda() == 0) return EventClass::kDiagonal;
  if (event.n_a == event.n_b) return EventClass::kEven;
  if (event.n_a == event.n_b + 1) return EventClass::kOddE2;
  if (event.n_b == event.n_a + 1) return EventClass::kOddE3;
  return EventClass::kOther;
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  require(den != 0, ErrorKind::kValidation, "Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

std::array<Rational, 4> reconstruction_betas() {
  return {Rational(0, 1), Rational(1, 1), Rational(1, 2), Rational(3, 2)};
}

PhaseSchedule PhaseSchedule::make(Rational beta, int lambda) {
  require(lambda >= 1, ErrorKind::kValidation, "phase schedule needs lambda >= 1");
  PhaseSchedule s;
  s.beta = beta;
  s.lambda = lambda;
  const int count = lambda % 2 == 0 ? lambda / 2 : lambda;
  s.j_values.resize(count);
  std::iota(s.j_values.begin(), s.j_values.end(), 0);
  return s;
}

double PhaseSchedule::phi(int j) const {
  const std::int64_t numerator = beta.num() + 2 * static_cast<std::int64_t>(j) * beta.den();
  const std::int64_t denominator = beta.den() * lambda;
  return static_cast<double>(numerator) / static_cast<double>(denominator) * std::numbers::pi;
}

NormReference NormReference::pure(double alpha_mag) {
  require(alpha_mag >= 0.0 && std::isfinite(alpha_mag), ErrorKind::kValidation, "reference |alpha| must be >= 0");
  NormReference r;
  r.kind = Kind::kPureCoherent;
  r.alpha_mag = alpha_mag;
  return r;
}

NormReference NormReference::mixed(Complex rho_a_0_lambda) {
  NormReference r;
  r.kind = Kind::kMixed;
  r.offdiag = rho_a_0_lambda;
  return r;
}

ReferenceField ReferenceField::coherent(double alpha_mag) {
  require(alpha_mag >= 0.0 && std::isfinite(alpha_mag), ErrorKind::kValidation, "reference |alpha| must be >= 0");
  ReferenceField f;
  f.alpha_mag_ = alpha_mag;
  return f;
}

ReferenceField ReferenceField::mixed(const DensityMatrix& rho_a) {
  ReferenceField f;
  f.alpha_mag_ = std::sqrt(std::max(0.0, [&] {
    double mean = 0.0;
    for (int n = 0; n <= rho_a.cutoff(); ++n) mean += n * rho_a(n, n).real();
    return mean;
  }()));
  f.rho_ = rho_a;
  f.components_ = rho_a.pure_components();
  return f;
}

Complex ReferenceField::offdiag(int lambda) const {
  require(lambda >= 0, ErrorKind::kValidation, "offdiag: negative lambda");
  if (!rho_) return coherent_corner(alpha_mag_, lambda);
  require(lambda <= rho_->cutoff(), ErrorKind::kCutoff, "reference density matrix is truncated below lambda");
  return (*rho_)(0, lambda);
}

NormReference ReferenceField::norm_reference(int lambda) const {
  if (!rho_) return NormReference::pure(alpha_mag_);
  return NormReference::mixed(offdiag(lambda));
}

FockVector q_vector_clipped(const DetectionEvent& event, const BeamSplitterSpec& bs1, double alpha_mag, int cutoff) {
  check_event(event);
  require(alpha_mag >= 0.0 && std::isfinite(alpha_mag), ErrorKind::kValidation, "q_vector: |alpha| must be >= 0");
  require(cutoff >= 0, ErrorKind::kValidation, "q_vector: negative cutoff");
  const int N = event.n_c;
  const int lambda = event.lambda();
  const double t = bs1.t();
  const double r = bs1.r();

  // (-i)^{n_b} t^N / (2^{lambda/2} e^{|alpha|^2/2} sqrt(n_a! n_b!))
  const double magnitude = std::pow(t, N) * std::exp(-0.5 * lambda * std::numbers::ln2 - 0.5 * alpha_mag * alpha_mag -
                                                     0.5 * (log_factorial(event.n_a) + log_factorial(event.n_b)));
  const Complex prefactor = minus_i_power(event.n_b) * magnitude;

  Eigen::VectorXcd q = Eigen::VectorXcd::Zero(cutoff + 1);
  for (int j = 0; j <= lambda && N + j <= cutoff; ++j) {
    // Coefficient of x^j in (alpha - r x)^{n_a} (alpha + r x)^{n_b}.
    double sum = 0.0;
    for (int p = std::max(0, j - event.n_b); p <= std::min(j, event.n_a); ++p) {
      const double term = binomial(event.n_a, p) * binomial(event.n_b, j - p);
      sum += (p % 2 == 0) ? term : -term;
    }
    if (sum == 0.0) continue;
    const double coefficient = sum * std::pow(r, j) * std::pow(alpha_mag, lambda - j);
    q[N + j] = prefactor * (coefficient * ladder_factor(N, j));
  }
  return FockVector(std::move(q));
}

FockVector q_vector(const DetectionEvent& event, const BeamSplitterSpec& bs1, double alpha_mag, int cutoff) {
  check_event(event);
  if (event.n_c + event.lambda() > cutoff) {
    std::ostringstream msg;
    msg << "q_vector: N + lambda = " << event.n_c + event.lambda() << " exceeds cutoff " << cutoff;
    fail(ErrorKind::kCutoff, msg.str());
  }
  return q_vector_clipped(event, bs1, alpha_mag, cutoff);
}

FockVector q_vector_for_reference_clipped(const DetectionEvent& event, const BeamSplitterSpec& bs1,
                                          const FockVector& reference_ket, int cutoff) {
  check_event(event);
  require(cutoff >= 0, ErrorKind::kValidation, "q_vector: negative cutoff");
  const int N = event.n_c;
  const int lambda = event.lambda();
  const double t = bs1.t();
  const double r = bs1.r();
  const double magnitude = std::pow(t, N) * std::exp(-0.5 * lambda * std::numbers::ln2 -
                                                     0.5 * (log_factorial(event.n_a) + log_factorial(event.n_b)));

  Eigen::VectorXcd q = Eigen::VectorXcd::Zero(cutoff + 1);
  for (int j = 0; j <= lambda && N + j <= cutoff; ++j) {
    const int k = lambda - j;  // photons drawn from the reference
    if (k > reference_ket.cutoff()) continue;
    // BS2 output (a^dag - i b^dag)^{n_a} (b^dag - i a^dag)^{n_b}: pick p a^dag's from
    // the first factor and s from the second, p + s = k.
    Complex sum{0.0, 0.0};
    for (int p = std::max(0, k - event.n_b); p <= std::min(k, event.n_a); ++p) {
      const int s = k - p;
      sum += binomial(event.n_a, p) * binomial(event.n_b, s) * minus_i_power(event.n_a - p + s);
    }
    if (sum == Complex(0.0, 0.0)) continue;
    const Complex overlap = std::conj(reference_ket[k]) * sqrt_factorial(k);
    // Remaining b^dag's become -i r c^dag after BS1 and the b-vacuum projection.
    const Complex ladder = minus_i_power(j) * std::pow(r, j) * ladder_factor(N, j);
    q[N + j] = magnitude * sum * overlap * ladder;
  }
  return FockVector(std::move(q));
}

FockVector q_vector_for_reference(const DetectionEvent& event, const BeamSplitterSpec& bs1,
                                  const FockVector& reference_ket, int cutoff) {
  check_event(event);
  require(event.n_c + event.lambda() <= cutoff, ErrorKind::kCutoff, "q_vector: N + lambda exceeds cutoff");
  return q_vector_for_reference_clipped(event, bs1, reference_ket, cutoff);
}

double pom_probability(const DensityMatrix& rho_c, const FockVector& q, double phi,
                       ProbabilityDiagnostics* diagnostics) {
  require(q.cutoff() == rho_c.cutoff(), ErrorKind::kValidation, "pom_probability: q and rho_c cutoffs differ");
  int lo = 0;
  int hi = q.cutoff();
  while (lo <= hi && q[lo] == Complex(0.0, 0.0)) ++lo;
  while (hi >= lo && q[hi] == Complex(0.0, 0.0)) --hi;
  Complex sum{0.0, 0.0};
  if (lo <= hi) {
    std::vector<Complex> qphi(hi - lo + 1);
    for (int n = lo; n <= hi; ++n) qphi[n - lo] = q[n] * std::polar(1.0, n * phi);
    for (int m = lo; m <= hi; ++m) {
      Complex row{0.0, 0.0};
      for (int n = lo; n <= hi; ++n) row += rho_c(m, n) * qphi[n - lo];
      sum += std::conj(qphi[m - lo]) * row;
    }
  }
  const double raw = sum.real();
  if (diagnostics) {
    diagnostics->raw = raw;
    diagnostics->imag = sum.imag();
    diagnostics->clamped = false;
  }
  if (std::abs(sum.imag()) > 1e-10 * std::max(1.0, std::abs(raw))) {
    fail(ErrorKind::kNumerical, "pom_probability: quadratic form has a non-negligible imaginary part");
  }
  if (raw < -1e-12) {
    std::ostringstream msg;
    msg << "pom_probability: negative probability " << raw;
    fail(ErrorKind::kNumerical, msg.str());
  }
  if (raw < 0.0) {
    if (diagnostics) diagnostics->clamped = true;
    return 0.0;
  }
  return raw;
}

double event_probability(const DensityMatrix& rho_c, const DetectionEvent& event, const BeamSplitterSpec& bs1,
                         const ReferenceField& reference, double phi) {
  const int cutoff = rho_c.cutoff();
  if (reference.is_pure_coherent()) {
    return pom_probability(rho_c, q_vector_clipped(event, bs1, reference.alpha_mag(), cutoff), phi);
  }
  double total = 0.0;
  for (const auto& [weight, ket] : reference.components()) {
    total += weight * pom_probability(rho_c, q_vector_for_reference_clipped(event, bs1, ket, cutoff), phi);
  }
  return total;
}

double cycled_probability(const DensityMatrix& rho_c, const DetectionEvent& event, Rational beta,
                          const BeamSplitterSpec& bs1, const ReferenceField& reference) {
  check_event(event);
  const EventClass cls = classify(event);
  require(cls != EventClass::kDiagonal, ErrorKind::kValidation,
          "cycled_probability: lambda = 0 has no phase cycle; use the diagonal path");
  require(cls != EventClass::kOther, ErrorKind::kValidation,
          "cycled_probability: event must be of class e1, e2 or e3");
  const PhaseSchedule schedule = PhaseSchedule::make(beta, event.lambda());
  double sum = 0.0;
  for (int j : schedule.j_values) sum += event_probability(rho_c, event, bs1, reference, schedule.phi(j));
  return sum / static_cast<double>(schedule.j_values.size());
}

double cycled_probability(const DensityMatrix& rho_c, const DetectionEvent& event, Rational beta,
                          const BeamSplitterSpec& bs1, double alpha_mag) {
  return cycled_probability(rho_c, event, beta, bs1, ReferenceField::coherent(alpha_mag));
}

NormConstant norm_constant(int N, int lambda, const BeamSplitterSpec& bs1, const NormReference& reference,
                           double floor) {
  require(N >= 0, ErrorKind::kValidation, "norm_constant: negative N");
  require(lambda >= 1, ErrorKind::kValidation, "norm_constant: lambda must be >= 1");
  const Parity parity = lambda % 2 == 0 ? Parity::kEven : Parity::kOdd;
  const Complex corner = reference.kind == NormReference::Kind::kPureCoherent
                             ? Complex(coherent_corner(reference.alpha_mag, lambda), 0.0)
                             : reference.offdiag;
  const int half = parity == Parity::kEven ? lambda / 2 : (lambda - 1) / 2;
  const double t = bs1.t();
  const double r = bs1.r();
  const double magnitude = std::pow(t, 2 * N) * std::pow(0.5 * r, lambda) * binomial(lambda, half) *
                           std::sqrt(binomial(N + lambda, N));
  // even: (i r/2)^lambda;  odd: i (i r/2)^lambda
  const Complex phase = i_power(parity == Parity::kEven ? lambda : lambda + 1);
  NormConstant nc{phase * magnitude * corner, parity, N, lambda, t, r, reference};
  if (!(nc.magnitude() >= floor)) {
    std::ostringstream msg;
    msg << "element <" << N + lambda << "|rho|" << N << ">: |normalisation constant| = " << nc.magnitude()
        << " below floor " << floor;
    fail(ErrorKind::kUnmeasurableElement, msg.str());
  }
  return nc;
}

Complex reconstruct_offdiag(const CycledProbabilities& p, const NormConstant& nc) {
  check_probability(p.p0, "reconstruct_offdiag");
  check_probability(p.p1, "reconstruct_offdiag");
  check_probability(p.p_half, "reconstruct_offdiag");
  check_probability(p.p_three_half, "reconstruct_offdiag");
  require(nc.magnitude() > 0.0, ErrorKind::kUnmeasurableElement, "reconstruct_offdiag: zero normalisation constant");
  const Complex numerator = (p.p0 - p.p1) + kI * (p.p_half - p.p_three_half);
  return numerator / (4.0 * nc.value);
}

double diagonal_norm(int N, const BeamSplitterSpec& bs1, const ReferenceField& reference) {
  require(N >= 0, ErrorKind::kValidation, "diagonal_norm: negative N");
  return std::pow(bs1.t(), 2 * N) * reference.offdiag(0).real();
}

double reconstruct_diag(double probability, int N, const BeamSplitterSpec& bs1, const ReferenceField& reference,
                        double floor) {
  check_probability(probability, "reconstruct_diag");
  const double norm = diagonal_norm(N, bs1, reference);
  if (!(norm >= floor)) {
    std::ostringstream msg;
    msg << "element <" << N << "|rho|" << N << ">: diagonal normalisation " << norm << " below floor " << floor;
    fail(ErrorKind::kUnmeasurableElement, msg.str());
  }
  return probability / norm;
}

double reconstruct_diag(double probability, int N, const BeamSplitterSpec& bs1, double alpha_mag) {
  return reconstruct_diag(probability, N, bs1, ReferenceField::coherent(alpha_mag));
}

OptimalParams optimal_params(int N, int lambda) {
  require(N >= 0 && lambda >= 0, ErrorKind::kValidation, "optimal_params: negative index");
  if (lambda == 0) return {0.0, std::numeric_limits<double>::infinity(), true};
  return {0.5 * lambda, 2.0 * N / lambda, false};
}

}  // namespace opsynth
