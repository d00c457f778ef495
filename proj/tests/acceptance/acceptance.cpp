// Acceptance suite. Run with --criterion K (1..10) or with no arguments for all.
// Prints one PASS/FAIL line per criterion and exits non-zero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "opsynth/errors.hpp"
#include "opsynth/imperfection.hpp"
#include "opsynth/measurement.hpp"
#include "opsynth/oracle.hpp"
#include "opsynth_app/pipeline.hpp"
#include "test_support.hpp"

namespace {

using namespace opsynth;
using opsynth::testing::Gen;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // <= 0: none
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

Outcome table_ideal() {
  const auto p = app::build_pipeline(app::ideal_table_config());
  const auto m = measure_full_matrix(*p.source, p.plan);
  const auto cmp = app::compare_table(m, app::golden_ideal_table(), app::kIdealTableTolerance);
  return {cmp.pass(), "max |computed - table| = " + fmt(cmp.max_abs_diff) + ", tolerance " + fmt(cmp.tolerance)};
}

Outcome table_inefficient() {
  const auto p1 = app::build_pipeline(app::ideal_table_config());
  const auto m1 = measure_full_matrix(*p1.source, p1.plan);
  const auto p2 = app::build_pipeline(app::eta09_table_config());
  const auto m2 = measure_full_matrix(*p2.source, p2.plan);
  const auto cmp = app::compare_table(m2, app::golden_eta09_table(), app::kEta09TableTolerance);
  const bool inflated = m2.estimate(0, 0).real() > m1.estimate(0, 0).real();
  bool deflated = true;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i != j && !(std::abs(m2.estimate(i, j)) < std::abs(m1.estimate(i, j)))) deflated = false;
    }
  }
  return {cmp.pass() && inflated && deflated,
          "max diff " + fmt(cmp.max_abs_diff) + " (tol " + fmt(cmp.tolerance) + "), rho00 " +
              fmt(m1.estimate(0, 0).real()) + " -> " + fmt(m2.estimate(0, 0).real()) +
              (inflated ? " inflated" : " NOT inflated") + (deflated ? ", off-diagonals deflated" : ", off-diagonals NOT deflated")};
}

Outcome oracle_equivalence() {
  Gen gen(20240501);
  const std::vector<double> phases = {0.0, 1.1, 2.9};
  double worst = 0.0;
  std::size_t events = 0;
  for (int k = 0; k < 50; ++k) {
    const auto rho = gen.random_state(9);
    const double am = std::sqrt(gen.uniform(0.25, 2.0));
    const auto bs = BeamSplitterSpec::from_transmissivity(gen.uniform(1e-3, 1.0 - 1e-3));
    const OracleSetup setup{am, bs, default_total_cutoff(5, 4, am), std::nullopt};
    const auto ref = ReferenceField::coherent(am);
    for (double phi : phases) {
      const auto joint = forward_distribution(rho, setup, phi);
      for (int lambda = 0; lambda <= 4; ++lambda) {
        for (int N = 0; N <= 5; ++N) {
          for (int n_a = 0; n_a <= lambda; ++n_a) {
            const DetectionEvent e{n_a, lambda - n_a, N};
            worst = std::max(worst, std::abs(joint(e) - event_probability(rho, e, bs, ref, phi)));
            ++events;
          }
        }
      }
    }
  }
  return {worst < 1e-10, std::to_string(events) + " events, max diff " + fmt(worst) + " (tol 1e-10)"};
}

Outcome round_trip() {
  double worst = 0.0;
  std::size_t elements = 0;
  for (const auto& rho : testing::corpus(10, 20)) {
    MeasurementPlan plan;
    plan.n_max = 6;
    plan.bs1 = Bs1Policy::automatic(6);
    plan.reference = ReferenceField::coherent(1.0);
    const auto m = measure_full_matrix(ExactSource(rho, plan.reference), plan);
    if (m.failures() != 0) return {false, "element failures: " + std::to_string(m.failures())};
    for (const auto& e : m.elements) {
      worst = std::max(worst, std::abs(e.value - rho(e.N + e.lambda, e.N)));
      ++elements;
    }
  }
  return {worst <= 1e-8, std::to_string(elements) + " elements over 27 states, max error " + fmt(worst) + " (tol 1e-8)"};
}

Outcome odd_shortcut() {
  double worst = 0.0;
  const std::vector<BeamSplitterSpec> splitters = {BeamSplitterSpec::balanced(), BeamSplitterSpec::from_ratio(2.0),
                                                   BeamSplitterSpec::from_transmissivity(0.2)};
  for (const auto& rho : testing::corpus(10, 20)) {
    for (int lambda : {1, 3, 5}) {
      for (int N = 0; N + lambda <= 10; ++N) {
        for (const auto& bs : splitters) {
          for (const auto& beta : reconstruction_betas()) {
            const double p3 = cycled_probability(rho, DetectionEvent::e3(N, lambda), beta, bs, 0.9);
            const double p2 = cycled_probability(rho, DetectionEvent::e2(N, lambda), beta + Rational(1, 1), bs, 0.9);
            worst = std::max(worst, std::abs(p3 - p2));
          }
        }
      }
    }
  }
  return {worst <= 1e-12, "max |P_beta(e3) - P_beta+1(e2)| = " + fmt(worst) + " (tol 1e-12)"};
}

double norm_or_zero(int N, int lambda, const BeamSplitterSpec& bs, double alpha_mag) {
  try {
    return norm_constant(N, lambda, bs, NormReference::pure(alpha_mag), 0.0).magnitude();
  } catch (const Error&) {
    return 0.0;
  }
}

Outcome optimality() {
  std::vector<std::string> misses;
  const double am = 1.0;
  for (int lambda = 1; lambda <= 6; ++lambda) {
    for (int N = 0; N <= 4; ++N) {
      for (double ratio : {0.5, 2.0}) {
        const auto bs = BeamSplitterSpec::from_ratio(ratio);
        std::vector<double> weight;
        for (int n_a = 0; n_a <= lambda; ++n_a) {
          const auto q = q_vector({n_a, lambda - n_a, N}, bs, am, N + lambda);
          weight.push_back(std::abs(q[N] * std::conj(q[N + lambda])));
        }
        const double top = *std::max_element(weight.begin(), weight.end());
        for (int n_a = 0; n_a <= lambda; ++n_a) {
          const bool expected = lambda % 2 == 0 ? n_a == lambda / 2 : (n_a == (lambda + 1) / 2 || n_a == (lambda - 1) / 2);
          const bool at_max = weight[n_a] >= top * (1.0 - 1e-12);
          if (expected != at_max) {
            misses.push_back("event N=" + std::to_string(N) + " lambda=" + std::to_string(lambda) + " n_a=" + std::to_string(n_a));
          }
        }
      }
      const double step = 0.01;
      double best_a = 0.0;
      double best_v = -1.0;
      for (int i = 1; i <= 600; ++i) {
        const double a2 = i * step;
        const double v = norm_or_zero(N, lambda, BeamSplitterSpec::from_ratio(2.0), std::sqrt(a2));
        if (v > best_v) best_v = v, best_a = a2;
      }
      if (std::abs(best_a - lambda / 2.0) > step + 1e-12) {
        misses.push_back("alpha^2 N=" + std::to_string(N) + " lambda=" + std::to_string(lambda) + " got " + fmt(best_a));
      }
      double best_ratio = 0.0;
      best_v = -1.0;
      for (int i = 1; i <= 1000; ++i) {
        const double ratio = i * step;
        const double v = norm_or_zero(N, lambda, BeamSplitterSpec::from_ratio(ratio), std::sqrt(lambda / 2.0));
        if (v > best_v) best_v = v, best_ratio = ratio;
      }
      const double target = 2.0 * N / lambda;
      if (std::abs(best_ratio - target) > step + 1e-12) {
        misses.push_back("(t/r)^2 N=" + std::to_string(N) + " lambda=" + std::to_string(lambda) + " got " + fmt(best_ratio));
      }
    }
  }
  std::string detail = misses.empty() ? "all events and grid maxima as predicted" : std::to_string(misses.size()) + " misses, first: " + misses.front();
  return {misses.empty(), detail};
}

Outcome inversion() {
  Gen gen(77);
  double worst_inv = 0.0;
  double worst_comp = 0.0;
  for (int k = 0; k < 200; ++k) {
    const CountDistribution p{gen.distribution(10), 0.0};
    const auto back = bernoulli_invert(smear(p, 0.9), 0.9, 10).distribution;
    for (int n = 0; n <= 10; ++n) worst_inv = std::max(worst_inv, std::abs(back.p[n] - p.p[n]));
    const double e1 = gen.uniform(0.05, 1.0);
    const double e2 = gen.uniform(0.05, 1.0);
    const auto twice = smear(smear(p, e1), e2);
    const auto once = smear(p, e1 * e2);
    for (int n = 0; n <= 10; ++n) worst_comp = std::max(worst_comp, std::abs(twice.p[n] - once.p[n]));
  }
  return {worst_inv <= 1e-6 && worst_comp <= 1e-12,
          "inversion sup-norm " + fmt(worst_inv) + " (tol 1e-6), composition " + fmt(worst_comp) + " (tol 1e-12)"};
}

Outcome noisy_reference() {
  Gen gen(303);
  const double am = 1.0;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto rho = gen.random_state(8);
    MeasurementPlan plan;
    plan.n_max = 4;
    plan.bs1 = Bs1Policy::automatic(4);
    plan.reference = make_reference_field(ReferenceModel::phase_diffused(am, 0.3), 20);
    const auto m = measure_full_matrix(ExactSource(rho, plan.reference), plan);
    if (m.failures() != 0) return {false, "sigma 0.3: " + std::to_string(m.failures()) + " element failures"};
    for (const auto& e : m.elements) worst = std::max(worst, std::abs(e.value - rho(e.N + e.lambda, e.N)));
  }
  const auto rho = gen.random_state(8);
  MeasurementPlan plan;
  plan.n_max = 4;
  plan.bs1 = Bs1Policy::automatic(4);
  plan.reference = make_reference_field(ReferenceModel::phase_diffused(am, INFINITY), 20);
  int raised = 0;
  for (int repeat = 0; repeat < 2; ++repeat) {
    try {
      measure_element(ExactSource(rho, plan.reference), plan, 1, 2);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kUnmeasurableElement) ++raised;
    }
  }
  return {worst <= 1e-8 && raised == 2,
          "sigma 0.3 max error " + fmt(worst) + " (tol 1e-8); full diffusion raised unmeasurable-element " +
              std::to_string(raised) + "/2"};
}

ElementReport sampled_rho01(std::uint64_t shots, std::uint64_t seed) {
  app::ExperimentConfig c = app::ideal_table_config();
  c.n_max = 1;
  c.mode = app::RunMode::kSampled;
  c.shots = shots;
  c.seed = seed;
  const auto p = app::build_pipeline(c);
  return measure_element(*p.source, p.plan, 0, 1);
}

Outcome finite_statistics() {
  app::ExperimentConfig c = app::ideal_table_config();
  c.n_max = 1;
  const auto exact_p = app::build_pipeline(c);
  const Complex truth = measure_element(*exact_p.source, exact_p.plan, 0, 1).value;
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto r = sampled_rho01(1'000'000, seed);
    if (std::abs(r.value.real() - truth.real()) <= 3 * r.std_error_re &&
        std::abs(r.value.imag() - truth.imag()) <= 3 * r.std_error_im) {
      ++covered;
    }
  }
  std::vector<double> scaled;
  for (std::uint64_t shots : {10'000ULL, 100'000ULL, 1'000'000ULL}) {
    scaled.push_back(sampled_rho01(shots, 4242).std_error() * std::sqrt(static_cast<double>(shots)));
  }
  const double spread = *std::max_element(scaled.begin(), scaled.end()) / *std::min_element(scaled.begin(), scaled.end());
  return {covered >= 95 && spread <= 1.5,
          std::to_string(covered) + "/100 seeds within 3 SE; SE*sqrt(shots) spread factor " + fmt(spread) + " (limit 1.5)"};
}

Outcome completeness() {
  std::string detail;
  bool pass = true;
  for (double ratio : {1.0, 2.0, 0.3}) {
    std::vector<double> r;
    for (int T : {8, 10, 12}) {
      const OracleSetup setup{std::sqrt(0.5), BeamSplitterSpec::from_ratio(ratio), T, std::nullopt};
      r.push_back(testing::max_abs(pom_completeness(setup, 0.7, 2)));
    }
    const bool ok = r[2] < 1e-6 && r[0] > r[1] && r[1] > r[2];
    pass = pass && ok;
    detail += "(t/r)^2=" + fmt(ratio) + ": " + fmt(r[0]) + " > " + fmt(r[1]) + " > " + fmt(r[2]) + (ok ? "" : " FAIL") + "; ";
  }
  return {pass, detail + "tol 1e-6 at T=12"};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "ideal table reproduction", 10.0, table_ideal},
      {2, "inefficient-detector table reproduction", 60.0, table_inefficient},
      {3, "oracle equivalence", 300.0, oracle_equivalence},
      {4, "round-trip reconstruction", 0.0, round_trip},
      {5, "odd-lambda shortcut", 0.0, odd_shortcut},
      {6, "optimal events and parameters", 0.0, optimality},
      {7, "Bernoulli inversion and composition", 0.0, inversion},
      {8, "noisy reference", 0.0, noisy_reference},
      {9, "finite statistics", 0.0, finite_statistics},
      {10, "POM completeness", 0.0, completeness},
  };
  return all;
}

bool run(const Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = c.time_limit_s <= 0 || secs < c.time_limit_s;
  const bool pass = o.pass && in_time;
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << "C" << c.id << " " << c.name << ": " << o.detail << " | "
            << fmt(secs) << " s";
  if (c.time_limit_s > 0) std::cout << " (limit " << fmt(c.time_limit_s) << " s)";
  std::cout << std::endl;
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected.push_back(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: opsynth_acceptance [--criterion K]...\n";
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& c : criteria()) {
    if (selected.empty() || std::find(selected.begin(), selected.end(), c.id) != selected.end()) all_pass &= run(c);
  }
  return all_pass ? 0 : 1;
}
