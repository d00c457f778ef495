#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "opsynth/combinatorics.hpp"
#include "opsynth/errors.hpp"
#include "opsynth/imperfection.hpp"
#include "test_support.hpp"

namespace opsynth {
namespace {

CountDistribution poisson(double mean, int cutoff) {
  CountDistribution d;
  for (int n = 0; n <= cutoff; ++n) d.p.push_back(std::exp(-mean + n * std::log(mean) - log_factorial(n)));
  d.tail = poisson_tail(mean, cutoff);
  return d;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

TEST(Smear, IdentityAtUnitEfficiency) {
  const auto p = poisson(0.7, 10);
  EXPECT_EQ(smear(p, 1.0).p, p.p);
}

TEST(Smear, SinglePhotonThinning) {
  CountDistribution d{{0.0, 1.0, 0.0, 0.0}, 0.0};
  const auto s = smear(d, 0.9);
  EXPECT_NEAR(s.p[0], 0.1, 1e-15);
  EXPECT_NEAR(s.p[1], 0.9, 1e-15);
  EXPECT_EQ(s.p[2], 0.0);
}

TEST(Smear, MeanScalesAndMassIsKept) {
  testing::Gen gen(3);
  for (int k = 0; k < 30; ++k) {
    CountDistribution d{gen.distribution(12), 0.0};
    const double eta = gen.uniform(0.0, 1.0);
    const auto s = smear(d, eta);
    EXPECT_NEAR(s.mean(), eta * d.mean(), 1e-12);
    EXPECT_NEAR(s.total(), d.total(), 1e-12);
  }
}

TEST(Smear, PoissonThinsToPoisson) {
  const auto s = smear(poisson(0.5, 30), 0.9);
  EXPECT_LE(sup_diff(s.p, poisson(0.45, 30).p), 1e-15);
}

TEST(Smear, CompositionLaw) {
  testing::Gen gen(4);
  for (int k = 0; k < 30; ++k) {
    CountDistribution d{gen.distribution(15), 0.0};
    const double e1 = gen.uniform(0.0, 1.0);
    const double e2 = gen.uniform(0.0, 1.0);
    EXPECT_LE(sup_diff(smear(smear(d, e1), e2).p, smear(d, e1 * e2).p), 1e-12);
  }
}

TEST(Smear, VacuumGrowsAsEfficiencyDrops) {
  const auto rho = make_test_state(TestStateSpec::fock(2), 6);
  CountDistribution d;
  for (int n = 0; n <= 6; ++n) d.p.push_back(rho(n, n).real());
  double last = -1.0;
  for (double eta = 1.0; eta >= 0.0; eta -= 0.1) {
    const double p0 = smear(d, std::max(eta, 0.0)).p[0];
    EXPECT_GT(p0, last);
    last = p0;
  }
}

TEST(Smear, RejectsBadEfficiency) {
  EXPECT_THROW(smear(poisson(0.5, 4), 1.2), Error);
  EXPECT_THROW(smear(poisson(0.5, 4), -0.1), Error);
  EXPECT_THROW(smear(CountDistribution{}, 0.5), Error);
}

TEST(BernoulliInvert, RoundTripAndPoisson) {
  testing::Gen gen(5);
  for (int k = 0; k < 30; ++k) {
    CountDistribution d{gen.distribution(10), 0.0};
    const auto back = bernoulli_invert(smear(d, 0.9), 0.9, 10);
    EXPECT_LE(sup_diff(back.distribution.p, d.p), 1e-6);
    EXPECT_GT(back.max_intermediate, 0.0);
  }
  const auto pois = bernoulli_invert(smear(poisson(0.5, 30), 0.9), 0.9, 30);
  EXPECT_LE(sup_diff(pois.distribution.p, poisson(0.5, 30).p), 1e-6);
  EXPECT_EQ(bernoulli_invert(poisson(0.5, 5), 1.0, 5).distribution.p, poisson(0.5, 5).p);
}

TEST(BernoulliInvert, ConditioningAndValidation) {
  CountDistribution d{std::vector<double>(41, 1.0 / 41), 0.0};
  try {
    bernoulli_invert(d, 0.1, 40, 1e6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConditioning);
  }
  EXPECT_THROW(bernoulli_invert(d, 0.0, 40), Error);
}

TEST(JointSmear, EachDetectorIndependently) {
  JointDistribution j(4);
  j.at(1, 1, 0) = 0.5;
  j.at(0, 0, 2) = 0.5;
  const auto s = smear(j, DetectorEfficiencies{0.9, 0.8, 0.5});
  EXPECT_NEAR(s.at(1, 1, 0), 0.5 * 0.9 * 0.8, 1e-15);
  EXPECT_NEAR(s.at(0, 1, 0), 0.5 * 0.1 * 0.8, 1e-15);
  EXPECT_NEAR(s.at(0, 0, 0), 0.5 * 0.1 * 0.2 + 0.5 * 0.25, 1e-15);
  EXPECT_NEAR(s.at(0, 0, 1), 0.5 * 0.5, 1e-15);
  EXPECT_NEAR(s.total(), 1.0, 1e-15);
  const auto back = bernoulli_invert(s, DetectorEfficiencies{0.9, 0.8, 0.5});
  EXPECT_NEAR(back.distribution.at(1, 1, 0), 0.5, 1e-12);
  EXPECT_NEAR(back.distribution.at(0, 0, 0), 0.0, 1e-12);
}

TEST(JointDistribution, MarginalsMatchThinnedSingleDetector) {
  const auto rho = make_test_state(TestStateSpec::random(2), 5);
  const auto j = joint_distribution(rho, BeamSplitterSpec(0.5), ReferenceField::coherent(0.8), 0.3, 16);
  const auto s = smear(j, DetectorEfficiencies{1.0, 1.0, 0.7});
  EXPECT_LE(sup_diff(s.marginal(Mode::kC).p, smear(j.marginal(Mode::kC), 0.7).p), 1e-14);
  EXPECT_NEAR(j.total() + j.tail(), 1.0, 1e-12);
  EXPECT_LT(j.tail(), 1e-8);
}

TEST(SampleEvents, PointMassAndDeterminism) {
  JointDistribution j(3);
  j.at(1, 0, 2) = 1.0;
  const auto c = sample_events(j, 1000, 42);
  EXPECT_EQ(c.count({1, 0, 2}), 1000u);
  EXPECT_EQ(c.overflow(), 0u);
  EXPECT_EQ(c.to_csv(), "n_a,n_b,n_c,count\n1,0,2,1000\n");

  const auto rho = make_test_state(TestStateSpec::random(8), 4);
  const auto joint = joint_distribution(rho, BeamSplitterSpec(0.5), ReferenceField::coherent(0.8), 0.0, 10);
  EXPECT_EQ(sample_events(joint, 5000, 1).to_csv(), sample_events(joint, 5000, 1).to_csv());
  EXPECT_NE(sample_events(joint, 5000, 1).to_csv(), sample_events(joint, 5000, 2).to_csv());
}

TEST(SampleEvents, Errors) {
  EXPECT_THROW(sample_events(JointDistribution(2), 10, 1), Error);
  JointDistribution j(2);
  j.at(0, 0, 0) = 1.0;
  EXPECT_THROW(sample_events(j, 0, 1), Error);
}

TEST(SampleEvents, BinomialCoverageOfVacuumEvent) {
  JointDistribution j(0);
  j.at(0, 0, 0) = std::exp(-1.0);  // remaining mass is overflow
  const double p = std::exp(-1.0);
  const std::uint64_t shots = 1'000'000;
  const double band = 3.0 * std::sqrt(p * (1 - p) / shots);
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto c = sample_events(j, shots, seed);
    EXPECT_EQ(c.count({0, 0, 0}) + c.overflow(), shots);
    if (std::abs(c.frequency({0, 0, 0}) - p) <= band) ++inside;
  }
  EXPECT_GE(inside, 198);
}

TEST(Substream, IndependentOfOrder) {
  auto a = substream(7, 3);
  auto b = substream(7, 3);
  auto c = substream(7, 4);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
}

TEST(ReferenceModel, OffDiagonalExamples) {
  const double am = std::sqrt(0.5);
  const Complex pure = reference_offdiag(ReferenceModel::pure(am), 1);
  EXPECT_NEAR(pure.real(), std::exp(-0.5) * am, 1e-15);
  EXPECT_NEAR(std::abs(reference_offdiag(ReferenceModel::phase_diffused(am, 0.3), 1) - pure * std::exp(-0.045)), 0.0,
              1e-15);
  EXPECT_EQ(reference_offdiag(ReferenceModel::phase_diffused(am, INFINITY), 2), Complex(0.0, 0.0));
  const auto rho = reference_density(ReferenceModel::phase_diffused(am, 0.3), 20);
  EXPECT_NEAR(std::abs(rho(0, 1) - reference_offdiag(ReferenceModel::phase_diffused(am, 0.3), 1)), 0.0, 1e-15);
  EXPECT_EQ(reference_offdiag(ReferenceModel::explicit_matrix(rho), 1), rho(0, 1));
  EXPECT_THROW(reference_offdiag(ReferenceModel::explicit_matrix(rho), 21), Error);
}

TEST(ReferenceModel, DiffusedDensityIsValid) {
  for (double sigma : {0.0, 0.3, 2.0, std::numeric_limits<double>::infinity()}) {
    const auto rho = reference_density(ReferenceModel::phase_diffused(1.0, sigma), 25);
    EXPECT_NEAR(rho.trace() + rho.truncation_tail(), 1.0, 1e-12);
  }
}

TEST(Sources, UnitEfficiencySmearingIsBitIdentical) {
  const auto rho = make_test_state(TestStateSpec::random(31), 8);
  const auto ref = ReferenceField::coherent(0.9);
  MeasurementPlan plan;
  plan.n_max = 4;
  plan.bs1 = Bs1Policy::automatic(4);
  plan.reference = ref;
  const auto exact = measure_full_matrix(ExactSource(rho, ref), plan);
  const auto smeared = measure_full_matrix(SmearedSource(rho, ref, DetectorEfficiencies{}, 14), plan);
  EXPECT_EQ(exact.estimate, smeared.estimate);
}

TEST(Sources, InversionRecoversExactReconstruction) {
  const auto rho = make_test_state(TestStateSpec::coherent({std::sqrt(0.5), 0.0}), 14);
  const auto ref = ReferenceField::coherent(std::sqrt(0.5));
  MeasurementPlan plan;
  plan.n_max = 4;
  plan.bs1 = Bs1Policy::automatic(4);
  plan.reference = ref;
  const auto exact = measure_full_matrix(ExactSource(rho, ref), plan);
  SmearedSource inverted(rho, ref, DetectorEfficiencies::uniform(0.9), 18, true);
  const auto back = measure_full_matrix(inverted, plan);
  EXPECT_LE(testing::max_abs(back.estimate - exact.estimate), 1e-6);
  EXPECT_GT(inverted.max_inversion_intermediate(), 0.0);
}

TEST(Sources, SampledIsReproducibleAndReportsVariance) {
  const auto rho = make_test_state(TestStateSpec::coherent({std::sqrt(0.5), 0.0}), 10);
  const auto ref = ReferenceField::coherent(std::sqrt(0.5));
  MeasurementPlan plan;
  plan.n_max = 2;
  plan.bs1 = Bs1Policy::fixed_spec(BeamSplitterSpec::balanced());
  plan.reference = ref;
  SampledSource a(rho, ref, DetectorEfficiencies{}, 10, 20000, 99);
  plan.threads = 1;
  const auto ma = measure_full_matrix(a, plan);
  SampledSource b(rho, ref, DetectorEfficiencies{}, 10, 20000, 99);
  plan.threads = 4;
  const auto mb = measure_full_matrix(b, plan);
  EXPECT_EQ(ma.estimate, mb.estimate);
  EXPECT_GT(ma.find(0, 1)->std_error(), 0.0);
  EXPECT_THROW(SampledSource(rho, ref, DetectorEfficiencies{}, 10, 0, 1), Error);
}

TEST(Sources, EventBeyondTotalCutoffRejected) {
  const auto rho = make_test_state(TestStateSpec::fock(0), 4);
  SmearedSource s(rho, ReferenceField::coherent(0.5), DetectorEfficiencies{}, 3);
  try {
    s.probability({2, 1, 1}, PhaseSetting{3, Rational(0, 1), 0, BeamSplitterSpec::balanced()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCutoff);
  }
}

}  // namespace
}  // namespace opsynth
