#include "opsynth_app/pipeline.hpp"

#include <cmath>
#include <limits>

#include "opsynth/errors.hpp"
#include "opsynth/fock_io.hpp"

namespace opsynth::app {

namespace {

using nlohmann::json;

DensityMatrix load_signal(const ExperimentConfig& config) {
  if (config.signal.file) return DensityMatrix::from_entries(read_matrix_file(*config.signal.file));
  return make_test_state(*config.signal.spec, config.cutoff);
}

ReferenceModel make_reference_model(const ReferenceConfig& r) {
  const double alpha_mag = std::sqrt(r.mean_photons);
  if (r.model == "phase_diffused") return ReferenceModel::phase_diffused(alpha_mag, r.sigma);
  return ReferenceModel::pure(alpha_mag);
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json complex_or_null(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return nullptr;
  return {{"re", z.real()}, {"im", z.imag()}};
}

}  // namespace

double Pipeline::inversion_max_intermediate() const {
  if (const auto* s = dynamic_cast<const SmearedSource*>(source.get())) return s->max_inversion_intermediate();
  return 0.0;
}

Pipeline build_pipeline(const ExperimentConfig& config) {
  validate(config);
  if (config.mode == RunMode::kExact) {
    require(config.efficiency.ideal(), ErrorKind::kValidation,
            "config: detector efficiencies below 1 need mode smeared or sampled");
  }
  require(!config.invert || config.mode == RunMode::kSmeared, ErrorKind::kValidation,
          "config: invert applies to mode smeared only");

  DensityMatrix rho_c = load_signal(config);
  require(config.n_max <= rho_c.cutoff(), ErrorKind::kCutoff,
          "n_max " + std::to_string(config.n_max) + " exceeds the signal cutoff " + std::to_string(rho_c.cutoff()));

  const ReferenceModel model = make_reference_model(config.reference);
  const int reference_cutoff = std::max({coherent_cutoff(model.alpha_mag), config.cutoff, config.n_max});
  ReferenceField field = make_reference_field(model, reference_cutoff);

  MeasurementPlan plan;
  plan.n_max = config.n_max;
  plan.bs1 = config.bs1_t_over_r_sq ? Bs1Policy::fixed_spec(BeamSplitterSpec::from_ratio(*config.bs1_t_over_r_sq))
                                    : Bs1Policy::automatic(config.n_max);
  plan.reference = field;
  plan.threads = config.threads;

  const int total_cutoff = resolved_total_cutoff(config);
  std::unique_ptr<ProbabilitySource> source;
  switch (config.mode) {
    case RunMode::kExact:
      source = std::make_unique<ExactSource>(rho_c, field);
      break;
    case RunMode::kSmeared:
      source = std::make_unique<SmearedSource>(rho_c, field, config.efficiency, total_cutoff, config.invert);
      break;
    case RunMode::kSampled:
      source = std::make_unique<SampledSource>(rho_c, field, config.efficiency, total_cutoff, config.shots, config.seed);
      break;
  }
  const double reference_tail =
      model.kind == ReferenceModel::Kind::kPureCoherent ? 0.0 : field.density()->truncation_tail();
  return Pipeline{config, std::move(rho_c), model, std::move(plan), total_cutoff, reference_tail, std::move(source)};
}

json element_json(const ElementReport& r) {
  json betas = json::array();
  for (const auto& b : r.betas) betas.push_back(b.to_string());
  const double t = std::cos(r.mixing_angle);
  const double rr = std::sin(r.mixing_angle);
  return {
      {"N", r.N},
      {"lambda", r.lambda},
      {"event", {r.event.n_a, r.event.n_b, r.event.n_c}},
      {"bs1", {{"mixing_angle", r.mixing_angle}, {"t_over_r_sq", number_or_null(rr == 0.0 ? INFINITY : t * t / (rr * rr))}}},
      {"value", complex_or_null(r.value)},
      {"std_error", {{"re", r.std_error_re}, {"im", r.std_error_im}}},
      {"conditioning", r.conditioning},
      {"betas", betas},
      {"probabilities", r.probabilities},
      {"variances", r.variances},
      {"phases", r.phases},
      {"error", r.error ? json(std::string(to_string(*r.error))) : json(nullptr)},
      {"message", r.message},
  };
}

json run_report(const Pipeline& p, const MatrixMeasurement& m) {
  json elements = json::array();
  for (const auto& e : m.elements) elements.push_back(element_json(e));
  json report;
  report["config"] = to_json(p.config);
  report["source"] = p.source->describe();
  report["truncation"] = {
      {"signal_cutoff", p.rho_c.cutoff()},
      {"signal_tail", p.rho_c.truncation_tail()},
      {"reference_tail", p.reference_tail},
      {"total_cutoff", p.total_cutoff},
  };
  report["bs1_policy"] = p.config.bs1_t_over_r_sq
                             ? json{{"kind", "fixed"}, {"t_over_r_sq", *p.config.bs1_t_over_r_sq}}
                             : json{{"kind", "auto"},
                                    {"off_diagonal", "t_over_r_sq = 2N/lambda"},
                                    {"diagonal_t_over_r_sq", p.plan.bs1.diagonal_t_over_r_sq}};
  report["detectors"] = {
      {"efficiency", {{"a", p.config.efficiency.a}, {"b", p.config.efficiency.b}, {"c", p.config.efficiency.c}}},
      {"symmetric", p.config.efficiency.a == p.config.efficiency.b && p.config.efficiency.b == p.config.efficiency.c},
      {"note", "efficiencies act independently on each detector; a single value applies to all three"},
      {"dark_counts", "not modelled"},
  };
  if (p.config.invert) report["inversion_max_intermediate"] = p.inversion_max_intermediate();
  report["failures"] = m.failures();
  report["elements"] = elements;
  return report;
}

const Table& golden_ideal_table() {
  static const Table t = {{
      {0.6065, 0.4289, 0.2145, 0.0870, 0.0336},
      {0.4289, 0.3033, 0.1517, 0.0615, 0.0238},
      {0.2145, 0.1517, 0.0759, 0.0308, 0.0119},
      {0.0870, 0.0615, 0.0308, 0.0125, 0.0048},
      {0.0336, 0.0238, 0.0119, 0.0048, 0.0019},
  }};
  return t;
}

const Table& golden_eta09_table() {
  static const Table t = {{
      {0.6592, 0.4195, 0.1888, 0.0692, 0.0220},
      {0.4195, 0.2967, 0.1335, 0.0489, 0.0161},
      {0.1888, 0.1335, 0.0668, 0.0244, 0.0081},
      {0.0692, 0.0489, 0.0244, 0.0100, 0.0033},
      {0.0220, 0.0161, 0.0081, 0.0033, 0.0013},
  }};
  return t;
}

ExperimentConfig ideal_table_config() {
  ExperimentConfig c = default_config();
  c.cutoff = 14;
  c.n_max = 4;
  c.reference.mean_photons = 0.5;
  c.mode = RunMode::kExact;
  return c;
}

ExperimentConfig eta09_table_config() {
  ExperimentConfig c = ideal_table_config();
  c.mode = RunMode::kSmeared;
  c.efficiency = DetectorEfficiencies::uniform(0.9);
  return c;
}

TableComparison compare_table(const MatrixMeasurement& m, const Table& golden, double tolerance) {
  require(m.estimate.rows() >= 5, ErrorKind::kValidation, "compare_table: measurement smaller than 5x5");
  TableComparison cmp;
  cmp.computed = m.estimate.topLeftCorner(5, 5);
  cmp.golden = golden;
  cmp.tolerance = tolerance;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double d = std::abs(cmp.computed(i, j) - golden[i][j]);
      cmp.max_abs_diff = std::max(cmp.max_abs_diff, std::isfinite(d) ? d : std::numeric_limits<double>::infinity());
    }
  }
  return cmp;
}

json table_json(const TableComparison& cmp) {
  json computed = json::array();
  json golden = json::array();
  json diff = json::array();
  for (int i = 0; i < 5; ++i) {
    json crow = json::array();
    json grow = json::array();
    json drow = json::array();
    for (int j = 0; j < 5; ++j) {
      crow.push_back(complex_or_null(cmp.computed(i, j)));
      grow.push_back(cmp.golden[i][j]);
      drow.push_back(number_or_null(cmp.computed(i, j).real() - cmp.golden[i][j]));
    }
    computed.push_back(crow);
    golden.push_back(grow);
    diff.push_back(drow);
  }
  return {{"computed", computed},          {"golden", golden},          {"diff", diff},
          {"max_abs_diff", number_or_null(cmp.max_abs_diff)}, {"tolerance", cmp.tolerance}, {"pass", cmp.pass()}};
}

}  // namespace opsynth::app
