#include "opsynth/imperfection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "opsynth/combinatorics.hpp"
#include "opsynth/errors.hpp"

namespace opsynth {

namespace {

void check_efficiency(double eta, const char* what) {
  require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0, ErrorKind::kValidation,
          std::string(what) + ": efficiency must lie in [0, 1]");
}

// out_n = sum_{k >= n} C(k, n) x^n (1 - x)^{k - n} in_k over a line of length `len`.
// Returns the largest |term|.
double thin_line(const double* in, double* out, int len, std::ptrdiff_t stride, double x) {
  double max_term = 0.0;
  for (int n = 0; n < len; ++n) {
    double sum = 0.0;
    const double xn = std::pow(x, n);
    for (int k = n; k < len; ++k) {
      const double v = in[k * stride];
      if (v == 0.0) continue;
      const double term = binomial(k, n) * xn * std::pow(1.0 - x, k - n) * v;
      max_term = std::max(max_term, std::abs(term));
      sum += term;
    }
    out[n * stride] = sum;
  }
  return max_term;
}

// Applies thin_line along one axis of the joint cube, restricted to the simplex.
double thin_axis(std::vector<double>& data, int T, Mode mode, double x) {
  const std::ptrdiff_t side = T + 1;
  const std::ptrdiff_t strides[3] = {side * side, side, 1};
  const int axis = static_cast<int>(mode);
  const int o1 = (axis + 1) % 3;
  const int o2 = (axis + 2) % 3;
  std::vector<double> line_in(static_cast<std::size_t>(side));
  std::vector<double> line_out(static_cast<std::size_t>(side));
  double max_term = 0.0;
  for (int i = 0; i <= T; ++i) {
    for (int j = 0; i + j <= T; ++j) {
      const int len = T - i - j + 1;
      const std::ptrdiff_t base = i * strides[o1] + j * strides[o2];
      for (int k = 0; k < len; ++k) line_in[k] = data[base + k * strides[axis]];
      max_term = std::max(max_term, thin_line(line_in.data(), line_out.data(), len, 1, x));
      for (int k = 0; k < len; ++k) data[base + k * strides[axis]] = line_out[k];
    }
  }
  return max_term;
}

}  // namespace

double CountDistribution::total() const { return std::accumulate(p.begin(), p.end(), 0.0); }

double CountDistribution::mean() const {
  double m = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
  return m;
}

JointDistribution::JointDistribution(int total_cutoff) : total_cutoff_(total_cutoff) {
  require(total_cutoff >= 0, ErrorKind::kValidation, "joint distribution: negative total cutoff");
  const auto side = static_cast<std::size_t>(total_cutoff + 1);
  data_.assign(side * side * side, 0.0);
}

std::size_t JointDistribution::index(int n_a, int n_b, int n_c) const {
  const auto side = static_cast<std::size_t>(total_cutoff_ + 1);
  return (static_cast<std::size_t>(n_a) * side + static_cast<std::size_t>(n_b)) * side + static_cast<std::size_t>(n_c);
}

double JointDistribution::operator()(const DetectionEvent& e) const {
  if (e.n_a < 0 || e.n_b < 0 || e.n_c < 0 || e.total() > total_cutoff_) return 0.0;
  return at(e.n_a, e.n_b, e.n_c);
}

double JointDistribution::total() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

CountDistribution JointDistribution::marginal(Mode mode) const {
  CountDistribution out;
  out.p.assign(static_cast<std::size_t>(total_cutoff_ + 1), 0.0);
  out.tail = tail_;
  for (int a = 0; a <= total_cutoff_; ++a) {
    for (int b = 0; a + b <= total_cutoff_; ++b) {
      for (int c = 0; a + b + c <= total_cutoff_; ++c) {
        const int n = mode == Mode::kA ? a : mode == Mode::kB ? b : c;
        out.p[static_cast<std::size_t>(n)] += at(a, b, c);
      }
    }
  }
  return out;
}

CountDistribution smear(const CountDistribution& dist, double efficiency) {
  check_efficiency(efficiency, "smear");
  require(!dist.p.empty(), ErrorKind::kValidation, "smear: empty distribution");
  if (efficiency == 1.0) return dist;
  CountDistribution out;
  out.p.assign(dist.p.size(), 0.0);
  out.tail = dist.tail;
  thin_line(dist.p.data(), out.p.data(), static_cast<int>(dist.p.size()), 1, efficiency);
  return out;
}

JointDistribution smear(const JointDistribution& dist, const DetectorEfficiencies& efficiencies) {
  check_efficiency(efficiencies.a, "smear");
  check_efficiency(efficiencies.b, "smear");
  check_efficiency(efficiencies.c, "smear");
  JointDistribution out = dist;
  if (efficiencies.ideal()) return out;
  auto& data = out.raw();
  const int T = out.total_cutoff();
  if (efficiencies.a != 1.0) thin_axis(data, T, Mode::kA, efficiencies.a);
  if (efficiencies.b != 1.0) thin_axis(data, T, Mode::kB, efficiencies.b);
  if (efficiencies.c != 1.0) thin_axis(data, T, Mode::kC, efficiencies.c);
  return out;
}

InversionResult bernoulli_invert(const CountDistribution& dist, double efficiency, int cutoff, double bound) {
  require(std::isfinite(efficiency) && efficiency > 0.0 && efficiency <= 1.0, ErrorKind::kValidation,
          "bernoulli_invert: efficiency must lie in (0, 1]");
  require(cutoff >= 0, ErrorKind::kValidation, "bernoulli_invert: negative cutoff");
  require(!dist.p.empty(), ErrorKind::kValidation, "bernoulli_invert: empty distribution");
  const int len = std::min(cutoff, dist.cutoff()) + 1;
  InversionResult result;
  result.distribution.p.assign(dist.p.begin(), dist.p.begin() + len);
  result.distribution.tail = dist.tail;
  if (efficiency == 1.0) return result;
  result.max_intermediate = thin_line(dist.p.data(), result.distribution.p.data(), len, 1, 1.0 / efficiency);
  require(std::isfinite(result.max_intermediate) && result.max_intermediate <= bound, ErrorKind::kConditioning,
          "bernoulli_invert: alternating series diverges (max intermediate " +
              std::to_string(result.max_intermediate) + ")");
  return result;
}

JointInversionResult bernoulli_invert(const JointDistribution& dist, const DetectorEfficiencies& efficiencies,
                                      double bound) {
  for (double eta : {efficiencies.a, efficiencies.b, efficiencies.c}) {
    require(std::isfinite(eta) && eta > 0.0 && eta <= 1.0, ErrorKind::kValidation,
            "bernoulli_invert: efficiency must lie in (0, 1]");
  }
  JointInversionResult result{dist, 0.0};
  auto& data = result.distribution.raw();
  const int T = dist.total_cutoff();
  const std::pair<Mode, double> axes[] = {
      {Mode::kA, efficiencies.a}, {Mode::kB, efficiencies.b}, {Mode::kC, efficiencies.c}};
  for (const auto& [mode, eta] : axes) {
    if (eta == 1.0) continue;
    result.max_intermediate = std::max(result.max_intermediate, thin_axis(data, T, mode, 1.0 / eta));
  }
  require(std::isfinite(result.max_intermediate) && result.max_intermediate <= bound, ErrorKind::kConditioning,
          "bernoulli_invert: alternating series diverges (max intermediate " +
              std::to_string(result.max_intermediate) + ")");
  return result;
}

std::uint64_t EventCounts::count(const DetectionEvent& e) const {
  return static_cast<std::uint64_t>(counts_(e));
}

double EventCounts::frequency(const DetectionEvent& e) const {
  if (shots_ == 0) return 0.0;
  return counts_(e) / static_cast<double>(shots_);
}

std::string EventCounts::to_csv() const {
  std::ostringstream os;
  os << "n_a,n_b,n_c,count\n";
  const int T = counts_.total_cutoff();
  for (int a = 0; a <= T; ++a) {
    for (int b = 0; a + b <= T; ++b) {
      for (int c = 0; a + b + c <= T; ++c) {
        const auto n = static_cast<std::uint64_t>(counts_.at(a, b, c));
        if (n != 0) os << a << ',' << b << ',' << c << ',' << n << '\n';
      }
    }
  }
  return os.str();
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

EventCounts sample_events(const JointDistribution& joint, std::uint64_t shots, std::uint64_t seed) {
  std::mt19937_64 rng = substream(seed, 0);
  return sample_events(joint, shots, rng);
}

EventCounts sample_events(const JointDistribution& joint, std::uint64_t shots, std::mt19937_64& rng) {
  require(shots >= 1, ErrorKind::kValidation, "sample_events: shots must be >= 1");
  const double total = joint.total();
  require(std::isfinite(total) && total > 0.0, ErrorKind::kValidation, "sample_events: empty distribution");
  for (double v : joint.raw()) {
    require(v >= 0.0, ErrorKind::kValidation, "sample_events: negative probability");
  }

  EventCounts out(joint.total_cutoff());
  out.shots_ = shots;
  auto& counts = out.counts_.raw();
  // Conditional binomials; whatever is left after the last category is overflow.
  double remaining_mass = std::max(1.0, total);
  std::uint64_t remaining = shots;
  const auto& p = joint.raw();
  for (std::size_t i = 0; i < p.size() && remaining > 0; ++i) {
    if (p[i] == 0.0) continue;
    const double q = std::clamp(p[i] / remaining_mass, 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> draw(remaining, q);
    const std::uint64_t k = q >= 1.0 ? remaining : draw(rng);
    counts[i] = static_cast<double>(k);
    remaining -= k;
    remaining_mass -= p[i];
    if (remaining_mass <= 0.0) break;
  }
  out.overflow_ = remaining;
  return out;
}

ReferenceModel ReferenceModel::pure(double alpha_mag) {
  require(std::isfinite(alpha_mag) && alpha_mag >= 0.0, ErrorKind::kValidation, "reference |alpha| must be >= 0");
  ReferenceModel m;
  m.alpha_mag = alpha_mag;
  return m;
}

ReferenceModel ReferenceModel::phase_diffused(double alpha_mag, double sigma) {
  require(std::isfinite(alpha_mag) && alpha_mag >= 0.0, ErrorKind::kValidation, "reference |alpha| must be >= 0");
  require(sigma >= 0.0, ErrorKind::kValidation, "phase-diffusion width must be >= 0");
  ReferenceModel m;
  m.kind = Kind::kPhaseDiffused;
  m.alpha_mag = alpha_mag;
  m.sigma = sigma;
  return m;
}

ReferenceModel ReferenceModel::explicit_matrix(DensityMatrix rho_a) {
  ReferenceModel m;
  m.kind = Kind::kExplicit;
  double mean = 0.0;
  for (int n = 0; n <= rho_a.cutoff(); ++n) mean += n * rho_a(n, n).real();
  m.alpha_mag = std::sqrt(std::max(0.0, mean));
  m.explicit_rho = std::move(rho_a);
  return m;
}

namespace {

double diffusion_factor(double sigma, int d) {
  if (d == 0) return 1.0;
  if (std::isinf(sigma)) return 0.0;
  return std::exp(-0.5 * sigma * sigma * d * d);
}

}  // namespace

DensityMatrix reference_density(const ReferenceModel& model, int cutoff) {
  if (model.kind == ReferenceModel::Kind::kExplicit) return *model.explicit_rho;
  const CoherentAmplitudes coh = coherent_amplitudes(Complex(model.alpha_mag, 0.0), cutoff);
  if (model.kind == ReferenceModel::Kind::kPureCoherent) return density_from_pure(coh);
  const auto& a = coh.state.amplitudes();
  Eigen::MatrixXcd m(cutoff + 1, cutoff + 1);
  for (int i = 0; i <= cutoff; ++i) {
    for (int j = 0; j <= cutoff; ++j) m(i, j) = a(i) * std::conj(a(j)) * diffusion_factor(model.sigma, i - j);
  }
  return DensityMatrix::from_entries(m, coh.tail);
}

Complex reference_offdiag(const ReferenceModel& model, int lambda) {
  require(lambda >= 0, ErrorKind::kValidation, "reference_offdiag: negative lambda");
  switch (model.kind) {
    case ReferenceModel::Kind::kPureCoherent:
      return ReferenceField::coherent(model.alpha_mag).offdiag(lambda);
    case ReferenceModel::Kind::kPhaseDiffused:
      return ReferenceField::coherent(model.alpha_mag).offdiag(lambda) * diffusion_factor(model.sigma, lambda);
    case ReferenceModel::Kind::kExplicit:
      require(lambda <= model.explicit_rho->cutoff(), ErrorKind::kCutoff,
              "reference_offdiag: lambda exceeds the reference cutoff");
      return (*model.explicit_rho)(0, lambda);
  }
  fail(ErrorKind::kValidation, "reference_offdiag: unknown model");
}

ReferenceField make_reference_field(const ReferenceModel& model, int cutoff) {
  if (model.kind == ReferenceModel::Kind::kPureCoherent) return ReferenceField::coherent(model.alpha_mag);
  return ReferenceField::mixed(reference_density(model, cutoff));
}

JointDistribution joint_distribution(const DensityMatrix& rho_c, const BeamSplitterSpec& bs1,
                                     const ReferenceField& reference, double phi, int total_cutoff) {
  JointDistribution out(total_cutoff);
  double sum = 0.0;
  for (int a = 0; a <= total_cutoff; ++a) {
    for (int b = 0; a + b <= total_cutoff; ++b) {
      for (int c = 0; a + b + c <= total_cutoff && c <= rho_c.cutoff(); ++c) {
        const double p = event_probability(rho_c, DetectionEvent{a, b, c}, bs1, reference, phi);
        out.at(a, b, c) = p;
        sum += p;
      }
    }
  }
  out.set_tail(std::max(0.0, 1.0 - sum));
  return out;
}

SmearedSource::SmearedSource(DensityMatrix rho_c, ReferenceField reference, DetectorEfficiencies efficiencies,
                             int total_cutoff, bool invert)
    : rho_c_(std::move(rho_c)),
      reference_(std::move(reference)),
      efficiencies_(efficiencies),
      total_cutoff_(total_cutoff),
      invert_(invert) {
  check_efficiency(efficiencies.a, "SmearedSource");
  check_efficiency(efficiencies.b, "SmearedSource");
  check_efficiency(efficiencies.c, "SmearedSource");
  require(total_cutoff >= 0, ErrorKind::kValidation, "SmearedSource: negative total cutoff");
}

std::shared_ptr<const JointDistribution> SmearedSource::joint_at(const PhaseSetting& setting) const {
  const std::uint64_t key = setting.key();
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  // Dark-count hook: a dark-count convolution would follow the smear below.
  JointDistribution joint =
      smear(joint_distribution(rho_c_, setting.bs1, reference_, setting.phi(), total_cutoff_), efficiencies_);
  double intermediate = 0.0;
  if (invert_) {
    JointInversionResult inv = bernoulli_invert(joint, efficiencies_);
    intermediate = inv.max_intermediate;
    joint = std::move(inv.distribution);
  }
  auto ptr = std::make_shared<const JointDistribution>(std::move(joint));
  std::lock_guard lock(mutex_);
  max_intermediate_ = std::max(max_intermediate_, intermediate);
  return cache_.emplace(key, std::move(ptr)).first->second;
}

double SmearedSource::max_inversion_intermediate() const {
  std::lock_guard lock(mutex_);
  return max_intermediate_;
}

ProbabilityEstimate SmearedSource::probability(const DetectionEvent& event, const PhaseSetting& setting) const {
  require(event.total() <= total_cutoff_, ErrorKind::kCutoff,
          "event total photon number exceeds the total cutoff " + std::to_string(total_cutoff_));
  return {(*joint_at(setting))(event), 0.0};
}

std::string SmearedSource::describe() const {
  std::ostringstream os;
  os << "smeared(eta_a=" << efficiencies_.a << ", eta_b=" << efficiencies_.b << ", eta_c=" << efficiencies_.c
     << ", total_cutoff=" << total_cutoff_ << (invert_ ? ", inverted" : "") << ")";
  return os.str();
}

SampledSource::SampledSource(DensityMatrix rho_c, ReferenceField reference, DetectorEfficiencies efficiencies,
                             int total_cutoff, std::uint64_t shots, std::uint64_t seed)
    : exact_(std::move(rho_c), std::move(reference), efficiencies, total_cutoff, false), shots_(shots), seed_(seed) {
  require(shots >= 1, ErrorKind::kValidation, "SampledSource: shots must be >= 1");
}

std::shared_ptr<const EventCounts> SampledSource::counts_at(const PhaseSetting& setting) const {
  const std::uint64_t key = setting.key();
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  std::mt19937_64 rng = substream(seed_, key);
  auto ptr = std::make_shared<const EventCounts>(sample_events(*exact_.joint_at(setting), shots_, rng));
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(ptr)).first->second;
}

ProbabilityEstimate SampledSource::probability(const DetectionEvent& event, const PhaseSetting& setting) const {
  exact_.probability(event, setting);  // cutoff validation
  const double p = counts_at(setting)->frequency(event);
  return {p, p * (1.0 - p) / static_cast<double>(shots_)};
}

std::string SampledSource::describe() const {
  std::ostringstream os;
  os << "sampled(shots=" << shots_ << ", seed=" << seed_ << ", " << exact_.describe() << ")";
  return os.str();
}

}  // namespace opsynth
