#include <gtest/gtest.h>

#include "opsynth/errors.hpp"
#include "opsynth_app/config.hpp"
#include "opsynth_app/pipeline.hpp"

namespace opsynth::app {
namespace {

using nlohmann::json;

json base() { return {{"schema_version", 1}}; }

ErrorKind kind_of(const json& doc) {
  try {
    const auto c = parse_config(doc);
    validate(c);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << doc.dump();
  return ErrorKind::kNumerical;
}

TEST(Config, DefaultsWhenOnlyVersionGiven) {
  const auto c = parse_config(base());
  EXPECT_EQ(c.cutoff, 14);
  EXPECT_EQ(c.n_max, 4);
  EXPECT_EQ(c.mode, RunMode::kExact);
  EXPECT_FALSE(c.bs1_t_over_r_sq);
  EXPECT_DOUBLE_EQ(c.reference.mean_photons, 0.5);
}

TEST(Config, RejectsMissingOrWrongVersion) {
  EXPECT_EQ(kind_of(json::object()), ErrorKind::kValidation);
  EXPECT_EQ(kind_of({{"schema_version", 2}}), ErrorKind::kValidation);
}

TEST(Config, RejectsUnknownKeysAtEveryLevel) {
  json doc = base();
  doc["extra"] = 1;
  EXPECT_EQ(kind_of(doc), ErrorKind::kValidation);
  doc = base();
  doc["signal"] = {{"kind", "fock"}, {"n", 1}, {"phase", 0}};
  EXPECT_EQ(kind_of(doc), ErrorKind::kValidation);
  doc = base();
  doc["reference"] = {{"mean", 1}};
  EXPECT_EQ(kind_of(doc), ErrorKind::kValidation);
  doc = base();
  doc["efficiency"] = {{"d", 0.5}};
  EXPECT_EQ(kind_of(doc), ErrorKind::kValidation);
  doc = base();
  doc["output"] = {{"path", "x"}};
  EXPECT_EQ(kind_of(doc), ErrorKind::kValidation);
}

TEST(Config, RejectsBadValues) {
  auto with = [](const char* key, json v) {
    json d = base();
    d[key] = std::move(v);
    return d;
  };
  EXPECT_EQ(kind_of(with("mode", "fast")), ErrorKind::kValidation);
  EXPECT_EQ(kind_of(with("efficiency", 1.5)), ErrorKind::kValidation);
  EXPECT_EQ(kind_of(with("bs1", "manual")), ErrorKind::kValidation);
  EXPECT_EQ(kind_of(with("cutoff", "ten")), ErrorKind::kValidation);
  EXPECT_EQ(kind_of(with("signal", {{"kind", "random"}})), ErrorKind::kValidation);
  EXPECT_EQ(kind_of(with("signal", {{"kind", "coherent"}, {"alpha", 1}, {"mean_photons", 1}})), ErrorKind::kValidation);
}

TEST(Config, EverySignalKindParsesAndRoundTrips) {
  const std::vector<json> signals = {
      {{"kind", "fock"}, {"n", 2}},
      {{"kind", "coherent"}, {"alpha", {0.3, -0.4}}},
      {{"kind", "coherent"}, {"mean_photons", 0.5}},
      {{"kind", "superposition"}, {"components", {{{"n", 0}, {"amplitude", 1}}, {{"n", 2}, {"amplitude", {0, 1}}}}}},
      {{"kind", "thermal"}, {"mean_photons", 0.7}},
      {{"kind", "random"}, {"seed", 12}},
      {{"kind", "file"}, {"path", "/tmp/rho.json"}},
  };
  for (const auto& s : signals) {
    json doc = base();
    doc["signal"] = s;
    doc["efficiency"] = {{"a", 0.9}, {"b", 0.8}, {"c", 1.0}};
    doc["mode"] = "smeared";
    doc["bs1"] = {{"t_over_r_sq", 2.0}};
    doc["reference"] = {{"mean_photons", 1.0}, {"model", "phase_diffused"}, {"sigma", 0.3}};
    const auto c = parse_config(doc);
    const auto echo = to_json(c);
    const auto again = parse_config(echo);
    EXPECT_EQ(to_json(again), echo) << s.dump();
    EXPECT_DOUBLE_EQ(again.efficiency.b, 0.8);
    EXPECT_EQ(*again.bs1_t_over_r_sq, 2.0);
  }
}

TEST(Config, InfiniteSigmaAndScalarEfficiency) {
  json doc = base();
  doc["reference"] = {{"model", "phase_diffused"}, {"sigma", "inf"}};
  doc["efficiency"] = 0.9;
  doc["mode"] = "sampled";
  const auto c = parse_config(doc);
  EXPECT_TRUE(std::isinf(c.reference.sigma));
  EXPECT_DOUBLE_EQ(c.efficiency.c, 0.9);
  EXPECT_EQ(parse_config(to_json(c)).reference.sigma, c.reference.sigma);
}

TEST(Config, PipelineChecks) {
  ExperimentConfig c = default_config();
  c.efficiency = DetectorEfficiencies::uniform(0.9);
  EXPECT_THROW(build_pipeline(c), Error);  // exact mode with lossy detectors
  c.mode = RunMode::kSampled;
  c.invert = true;
  EXPECT_THROW(build_pipeline(c), Error);
  c = default_config();
  c.cutoff = 3;
  c.n_max = 4;
  try {
    build_pipeline(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCutoff);
  }
}

TEST(Config, ResolvedTotalCutoff) {
  ExperimentConfig c = default_config();
  EXPECT_GE(resolved_total_cutoff(c), c.cutoff);
  c.total_cutoff = 9;
  EXPECT_EQ(resolved_total_cutoff(c), 9);
}

}  // namespace
}  // namespace opsynth::app
