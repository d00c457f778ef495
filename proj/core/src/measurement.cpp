#include "opsynth/measurement.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <thread>

namespace opsynth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
}

}  // namespace

double PhaseSetting::phi() const {
  if (lambda == 0) return 0.0;
  PhaseSchedule schedule;
  schedule.beta = beta;
  schedule.lambda = lambda;
  return schedule.phi(j);
}

std::uint64_t PhaseSetting::key() const {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(lambda));
  h = splitmix64(h ^ static_cast<std::uint64_t>(beta.num()));
  h = splitmix64(h ^ static_cast<std::uint64_t>(beta.den()));
  h = splitmix64(h ^ static_cast<std::uint64_t>(j));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(bs1.mixing_angle()));
  return h;
}

ExactSource::ExactSource(DensityMatrix rho_c, ReferenceField reference)
    : rho_c_(std::move(rho_c)), reference_(std::move(reference)) {}

ProbabilityEstimate ExactSource::probability(const DetectionEvent& event, const PhaseSetting& setting) const {
  require(event.n_c + event.lambda() <= rho_c_.cutoff(), ErrorKind::kCutoff,
          "N + lambda exceeds the signal cutoff " + std::to_string(rho_c_.cutoff()));
  return {event_probability(rho_c_, event, setting.bs1, reference_, setting.phi()), 0.0};
}

Bs1Policy Bs1Policy::fixed_spec(BeamSplitterSpec spec) {
  Bs1Policy p;
  p.fixed = spec;
  return p;
}

Bs1Policy Bs1Policy::automatic(int n_max) {
  Bs1Policy p;
  // Compromise for the diagonal: 2 n_max / lambda_max with lambda_max = n_max.
  p.diagonal_t_over_r_sq = n_max > 0 ? 2.0 : 1.0;
  return p;
}

BeamSplitterSpec Bs1Policy::resolve(int N, int lambda) const {
  if (fixed) return *fixed;
  const OptimalParams params = optimal_params(N, lambda);
  return BeamSplitterSpec::from_ratio(params.diagonal ? diagonal_t_over_r_sq : params.t_over_r_sq);
}

std::size_t MatrixMeasurement::failures() const {
  return static_cast<std::size_t>(std::count_if(elements.begin(), elements.end(), [](const auto& e) { return !e.ok(); }));
}

const ElementReport* MatrixMeasurement::find(int N, int lambda) const {
  for (const auto& e : elements) {
    if (e.N == N && e.lambda == lambda) return &e;
  }
  return nullptr;
}

ElementReport measure_element(const ProbabilitySource& source, const MeasurementPlan& plan, int N, int lambda) {
  require(N >= 0 && lambda >= 0, ErrorKind::kValidation, "measure_element: negative index");
  ElementReport report;
  report.N = N;
  report.lambda = lambda;
  report.event = DetectionEvent::for_element(N, lambda);
  const BeamSplitterSpec bs1 = plan.bs1.resolve(N, lambda);
  report.mixing_angle = bs1.mixing_angle();

  if (lambda == 0) {
    PhaseSetting setting{0, Rational(0, 1), 0, bs1};
    const ProbabilityEstimate p = source.probability(report.event, setting);
    report.betas = {Rational(0, 1)};
    report.probabilities = {p.value};
    report.variances = {p.variance};
    report.phases = {{0.0}};
    report.conditioning = diagonal_norm(N, bs1, plan.reference);
    const double value = reconstruct_diag(p.value, N, bs1, plan.reference, plan.norm_floor);
    report.value = Complex(value, 0.0);
    report.std_error_re = std::sqrt(p.variance) / report.conditioning;
    return report;
  }

  const NormConstant nc = norm_constant(N, lambda, bs1, plan.reference.norm_reference(lambda), plan.norm_floor);
  report.conditioning = 4.0 * nc.magnitude();

  std::array<double, 4> probs{};
  std::array<double, 4> vars{};
  const auto betas = reconstruction_betas();
  for (std::size_t b = 0; b < betas.size(); ++b) {
    const PhaseSchedule schedule = PhaseSchedule::make(betas[b], lambda);
    double sum = 0.0;
    double var = 0.0;
    std::vector<double> phases;
    for (int j : schedule.j_values) {
      PhaseSetting setting{lambda, betas[b], j, bs1};
      const ProbabilityEstimate p = source.probability(report.event, setting);
      sum += p.value;
      var += p.variance;
      phases.push_back(schedule.phi(j));
    }
    const double count = static_cast<double>(schedule.j_values.size());
    probs[b] = sum / count;
    vars[b] = var / (count * count);
    report.betas.push_back(betas[b]);
    report.phases.push_back(std::move(phases));
  }
  report.probabilities.assign(probs.begin(), probs.end());
  report.variances.assign(vars.begin(), vars.end());
  report.value = reconstruct_offdiag({probs[0], probs[1], probs[2], probs[3]}, nc);

  // Independent experiments: Re X = Re(w) d_r - Im(w) d_i, Im X = Im(w) d_r + Re(w) d_i.
  const Complex w = 1.0 / (4.0 * nc.value);
  const double var_dr = vars[0] + vars[1];
  const double var_di = vars[2] + vars[3];
  report.std_error_re = std::sqrt(w.real() * w.real() * var_dr + w.imag() * w.imag() * var_di);
  report.std_error_im = std::sqrt(w.imag() * w.imag() * var_dr + w.real() * w.real() * var_di);
  return report;
}

MatrixMeasurement measure_full_matrix(const ProbabilitySource& source, const MeasurementPlan& plan) {
  require(plan.n_max >= 0, ErrorKind::kValidation, "measure_full_matrix: negative n_max");
  std::vector<std::pair<int, int>> work;
  for (int lambda = 0; lambda <= plan.n_max; ++lambda) {
    for (int N = 0; N + lambda <= plan.n_max; ++N) work.emplace_back(N, lambda);
  }
  std::vector<ElementReport> reports(work.size());
  parallel_for(work.size(), plan.threads, [&](std::size_t i) {
    const auto [N, lambda] = work[i];
    try {
      reports[i] = measure_element(source, plan, N, lambda);
    } catch (const Error& e) {
      ElementReport failed;
      failed.N = N;
      failed.lambda = lambda;
      failed.event = DetectionEvent::for_element(N, lambda);
      failed.mixing_angle = plan.bs1.resolve(N, lambda).mixing_angle();
      failed.error = e.kind();
      failed.message = e.what();
      reports[i] = std::move(failed);
    }
  });

  const int dim = plan.n_max + 1;
  MatrixMeasurement out;
  out.estimate = Eigen::MatrixXcd::Constant(dim, dim, Complex(std::nan(""), std::nan("")));
  for (const auto& r : reports) {
    const int row = r.N + r.lambda;
    if (r.lambda == 0) {
      out.estimate(row, r.N) = r.value;
    } else {
      out.estimate(row, r.N) = r.value;
      out.estimate(r.N, row) = std::conj(r.value);
    }
  }
  out.elements = std::move(reports);
  return out;
}

MatrixMeasurement measure_full_matrix(const DensityMatrix& rho_c, double alpha_mag, const BeamSplitterSpec& bs1,
                                      int n_max) {
  require(n_max <= rho_c.cutoff(), ErrorKind::kCutoff, "measure_full_matrix: n_max exceeds the signal cutoff");
  MeasurementPlan plan;
  plan.n_max = n_max;
  plan.bs1 = Bs1Policy::fixed_spec(bs1);
  plan.reference = ReferenceField::coherent(alpha_mag);
  return measure_full_matrix(ExactSource(rho_c, plan.reference), plan);
}

}  // namespace opsynth
