#include "opsynth_app/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "opsynth/errors.hpp"
#include "opsynth/oracle.hpp"

namespace opsynth::app {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorKind::kValidation, "config: " + msg); }

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) invalid(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) invalid("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) invalid(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(where + "." + key + " must be finite");
  return x;
}

std::int64_t get_integer(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) invalid(where + "." + key + " must be an integer");
  return v.get<std::int64_t>();
}

std::uint64_t get_unsigned(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    invalid(where + "." + key + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

Complex get_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  invalid(where + " must be a number or a [re, im] pair");
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

SignalConfig parse_signal(const json& s) {
  if (!s.is_object() || !s.contains("kind") || !s["kind"].is_string()) invalid("signal.kind is required");
  const std::string kind = s["kind"].get<std::string>();
  SignalConfig out;
  if (kind == "file") {
    check_keys(s, {"kind", "path"}, "signal");
    if (!s.contains("path") || !s["path"].is_string()) invalid("signal.path must be a string");
    out.file = s["path"].get<std::string>();
    return out;
  }
  const auto parsed = parse_test_state_kind(kind);
  if (!parsed) invalid("unknown signal kind '" + kind + "'");
  switch (*parsed) {
    case TestStateKind::kFock: {
      check_keys(s, {"kind", "n"}, "signal");
      const auto n = get_integer(s, "n", "signal");
      if (n < 0) invalid("signal.n must be >= 0");
      out.spec = TestStateSpec::fock(static_cast<int>(n));
      break;
    }
    case TestStateKind::kCoherent: {
      check_keys(s, {"kind", "alpha", "mean_photons"}, "signal");
      if (s.contains("alpha") == s.contains("mean_photons")) invalid("signal needs exactly one of alpha, mean_photons");
      if (s.contains("alpha")) {
        out.spec = TestStateSpec::coherent(get_complex(s["alpha"], "signal.alpha"));
      } else {
        const double mean = get_number(s, "mean_photons", "signal");
        if (mean < 0.0) invalid("signal.mean_photons must be >= 0");
        out.spec = TestStateSpec::coherent({std::sqrt(mean), 0.0});
      }
      break;
    }
    case TestStateKind::kSuperposition: {
      check_keys(s, {"kind", "components"}, "signal");
      if (!s.contains("components") || !s["components"].is_array() || s["components"].empty()) {
        invalid("signal.components must be a non-empty array");
      }
      std::vector<std::pair<int, Complex>> comps;
      for (const auto& c : s["components"]) {
        check_keys(c, {"n", "amplitude"}, "signal.components[]");
        const auto n = get_integer(c, "n", "signal.components[]");
        if (n < 0) invalid("signal.components[].n must be >= 0");
        comps.emplace_back(static_cast<int>(n), get_complex(c.at("amplitude"), "signal.components[].amplitude"));
      }
      out.spec = TestStateSpec::superposition(std::move(comps));
      break;
    }
    case TestStateKind::kThermal: {
      check_keys(s, {"kind", "mean_photons"}, "signal");
      const double mean = get_number(s, "mean_photons", "signal");
      if (mean < 0.0) invalid("signal.mean_photons must be >= 0");
      out.spec = TestStateSpec::thermal(mean);
      break;
    }
    case TestStateKind::kRandom:
      check_keys(s, {"kind", "seed"}, "signal");
      if (!s.contains("seed")) invalid("random signal needs an explicit seed");
      out.spec = TestStateSpec::random(get_unsigned(s, "seed", "signal"));
      break;
  }
  return out;
}

json signal_json(const SignalConfig& s) {
  if (s.file) return {{"kind", "file"}, {"path", *s.file}};
  const TestStateSpec& spec = *s.spec;
  json out = {{"kind", std::string(to_string(spec.kind))}};
  switch (spec.kind) {
    case TestStateKind::kFock:
      out["n"] = spec.photon_number;
      break;
    case TestStateKind::kCoherent:
      out["alpha"] = complex_json(spec.alpha);
      break;
    case TestStateKind::kSuperposition: {
      json comps = json::array();
      for (const auto& [n, a] : spec.components) comps.push_back({{"n", n}, {"amplitude", complex_json(a)}});
      out["components"] = comps;
      break;
    }
    case TestStateKind::kThermal:
      out["mean_photons"] = spec.mean_photons;
      break;
    case TestStateKind::kRandom:
      out["seed"] = *spec.seed;
      break;
  }
  return out;
}

DetectorEfficiencies parse_efficiency(const json& e) {
  if (e.is_number()) return DetectorEfficiencies::uniform(e.get<double>());
  check_keys(e, {"a", "b", "c"}, "efficiency");
  DetectorEfficiencies out;
  if (e.contains("a")) out.a = get_number(e, "a", "efficiency");
  if (e.contains("b")) out.b = get_number(e, "b", "efficiency");
  if (e.contains("c")) out.c = get_number(e, "c", "efficiency");
  return out;
}

}  // namespace

std::optional<RunMode> parse_run_mode(std::string_view name) {
  if (name == "exact") return RunMode::kExact;
  if (name == "smeared") return RunMode::kSmeared;
  if (name == "sampled") return RunMode::kSampled;
  return std::nullopt;
}

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kExact:
      return "exact";
    case RunMode::kSmeared:
      return "smeared";
    case RunMode::kSampled:
      return "sampled";
  }
  return "exact";
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.signal.spec = TestStateSpec::coherent({std::sqrt(0.5), 0.0});
  return c;
}

ExperimentConfig parse_config(const json& doc) {
  check_keys(doc,
             {"schema_version", "signal", "reference", "bs1", "cutoff", "total_cutoff", "efficiency", "mode", "invert",
              "shots", "seed", "n_max", "output", "threads"},
             "config");
  if (!doc.contains("schema_version")) invalid("schema_version is required");
  if (get_integer(doc, "schema_version", "config") != kSchemaVersion) {
    invalid("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  ExperimentConfig c = default_config();
  if (doc.contains("signal")) c.signal = parse_signal(doc["signal"]);
  if (doc.contains("reference")) {
    const json& r = doc["reference"];
    check_keys(r, {"mean_photons", "model", "sigma"}, "reference");
    if (r.contains("mean_photons")) c.reference.mean_photons = get_number(r, "mean_photons", "reference");
    if (r.contains("model")) {
      if (!r["model"].is_string()) invalid("reference.model must be a string");
      c.reference.model = r["model"].get<std::string>();
    }
    if (r.contains("sigma")) {
      if (r["sigma"].is_string() && r["sigma"].get<std::string>() == "inf") {
        c.reference.sigma = std::numeric_limits<double>::infinity();
      } else {
        c.reference.sigma = get_number(r, "sigma", "reference");
      }
    }
  }
  if (doc.contains("bs1")) {
    const json& b = doc["bs1"];
    if (b.is_string()) {
      if (b.get<std::string>() != "auto") invalid("bs1 must be \"auto\" or {\"t_over_r_sq\": x}");
    } else {
      check_keys(b, {"t_over_r_sq"}, "bs1");
      c.bs1_t_over_r_sq = get_number(b, "t_over_r_sq", "bs1");
    }
  }
  if (doc.contains("cutoff")) c.cutoff = static_cast<int>(get_integer(doc, "cutoff", "config"));
  if (doc.contains("total_cutoff")) c.total_cutoff = static_cast<int>(get_integer(doc, "total_cutoff", "config"));
  if (doc.contains("efficiency")) c.efficiency = parse_efficiency(doc["efficiency"]);
  if (doc.contains("mode")) {
    const auto m = doc["mode"].is_string() ? parse_run_mode(doc["mode"].get<std::string>()) : std::nullopt;
    if (!m) invalid("mode must be one of exact, smeared, sampled");
    c.mode = *m;
  }
  if (doc.contains("invert")) {
    if (!doc["invert"].is_boolean()) invalid("invert must be a boolean");
    c.invert = doc["invert"].get<bool>();
  }
  if (doc.contains("shots")) c.shots = get_unsigned(doc, "shots", "config");
  if (doc.contains("seed")) c.seed = get_unsigned(doc, "seed", "config");
  if (doc.contains("n_max")) c.n_max = static_cast<int>(get_integer(doc, "n_max", "config"));
  if (doc.contains("threads")) c.threads = static_cast<unsigned>(get_unsigned(doc, "threads", "config"));
  if (doc.contains("output")) {
    const json& o = doc["output"];
    check_keys(o, {"dir"}, "output");
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) invalid("output.dir must be a string");
      c.output_dir = o["dir"].get<std::string>();
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const json::exception& e) {
    invalid(e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["signal"] = signal_json(c.signal);
  json ref = {{"mean_photons", c.reference.mean_photons}, {"model", c.reference.model}};
  if (c.reference.model != "pure") {
    ref["sigma"] = std::isinf(c.reference.sigma) ? json("inf") : json(c.reference.sigma);
  }
  doc["reference"] = ref;
  doc["bs1"] = c.bs1_t_over_r_sq ? json{{"t_over_r_sq", *c.bs1_t_over_r_sq}} : json("auto");
  doc["cutoff"] = c.cutoff;
  doc["total_cutoff"] = resolved_total_cutoff(c);
  doc["efficiency"] = {{"a", c.efficiency.a}, {"b", c.efficiency.b}, {"c", c.efficiency.c}};
  doc["mode"] = std::string(to_string(c.mode));
  doc["invert"] = c.invert;
  doc["shots"] = c.shots;
  doc["seed"] = c.seed;
  doc["n_max"] = c.n_max;
  doc["output"] = {{"dir", c.output_dir}};
  doc["threads"] = c.threads;
  return doc;
}

void validate(const ExperimentConfig& c) {
  if (!c.signal.spec && !c.signal.file) invalid("signal is required");
  if (c.cutoff < 0) invalid("cutoff must be >= 0");
  if (c.n_max < 0) invalid("n_max must be >= 0");
  if (c.total_cutoff && *c.total_cutoff < 0) invalid("total_cutoff must be >= 0");
  if (!(c.reference.mean_photons >= 0.0) || !std::isfinite(c.reference.mean_photons)) {
    invalid("reference.mean_photons must be >= 0");
  }
  if (c.reference.model != "pure" && c.reference.model != "phase_diffused") {
    invalid("reference.model must be pure or phase_diffused");
  }
  if (!(c.reference.sigma >= 0.0)) invalid("reference.sigma must be >= 0");
  if (c.bs1_t_over_r_sq && !(*c.bs1_t_over_r_sq >= 0.0)) invalid("bs1.t_over_r_sq must be >= 0");
  for (double eta : {c.efficiency.a, c.efficiency.b, c.efficiency.c}) {
    if (!(eta >= 0.0 && eta <= 1.0)) invalid("efficiencies must lie in [0, 1]");
    if (c.invert && eta == 0.0) invalid("inversion needs non-zero efficiencies");
  }
  if (c.mode == RunMode::kSampled && c.shots == 0) invalid("shots must be >= 1");
}

int resolved_total_cutoff(const ExperimentConfig& c) {
  if (c.total_cutoff) return *c.total_cutoff;
  return std::max(c.cutoff, default_total_cutoff(c.n_max, c.n_max, std::sqrt(c.reference.mean_photons)));
}

}  // namespace opsynth::app
