#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "nlslab/dissipation.hpp"
#include "nlslab/ensemble.hpp"
#include "nlslab/experiment.hpp"
#include "nlslab/flow.hpp"

namespace nlslab {

using nlohmann::json;

namespace {

constexpr std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::flow, "flow"}, {ExperimentKind::sde, "sde"},           {ExperimentKind::kb, "kb"},
    {ExperimentKind::inviscid, "inviscid"}, {ExperimentKind::ensemble, "ensemble"}, {ExperimentKind::verify, "verify"}};

bool convert(const json& v, int& out) {
  if (!v.is_number_integer()) return false;
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) return false;
  out = static_cast<int>(x);
  return true;
}

bool convert(const json& v, double& out) {
  if (!v.is_number()) return false;
  out = v.get<double>();
  return true;
}

bool convert(const json& v, bool& out) {
  if (!v.is_boolean()) return false;
  out = v.get<bool>();
  return true;
}

bool convert(const json& v, std::string& out) {
  if (!v.is_string()) return false;
  out = v.get<std::string>();
  return true;
}

bool convert(const json& v, std::uint64_t& out) {
  if (v.is_number_unsigned()) {
    out = v.get<std::uint64_t>();
    return true;
  }
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    out = static_cast<std::uint64_t>(v.get<long long>());
    return true;
  }
  return false;
}

template <class T>
bool convert(const json& v, std::vector<T>& out) {
  if (!v.is_array()) return false;
  std::vector<T> tmp(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (!convert(v[n], tmp[n])) return false;
  }
  out = std::move(tmp);
  return true;
}

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, int>) return "an integer";
  if constexpr (std::is_same_v<T, double>) return "a number";
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  if constexpr (std::is_same_v<T, std::string>) return "a string";
  if constexpr (std::is_same_v<T, std::uint64_t>) return "a non-negative integer";
  if constexpr (std::is_same_v<T, std::vector<int>>) return "an array of integers";
  if constexpr (std::is_same_v<T, std::vector<double>>) return "an array of numbers";
  return "a value";
}

struct FieldSpec {
  std::string key;
  std::function<bool(ExperimentConfig&, const json&)> read;
  std::function<json(const ExperimentConfig&)> write;
  const char* expected;
};

template <class T>
FieldSpec field(std::string key, T ExperimentConfig::*member) {
  return {std::move(key), [member](ExperimentConfig& c, const json& v) { return convert(v, c.*member); },
          [member](const ExperimentConfig& c) { return json(c.*member); }, type_name<T>()};
}

const std::vector<FieldSpec>& fields() {
  using C = ExperimentConfig;
  static const std::vector<FieldSpec> table = {
      {"kind",
       [](C& c, const json& v) {
         if (!v.is_string()) return false;
         for (const auto& [k, name] : kKinds) {
           if (v.get<std::string>() == name) {
             c.kind = k;
             return true;
           }
         }
         return false;
       },
       [](const C& c) { return json(to_string(c.kind)); }, "one of flow, sde, kb, inviscid, ensemble, verify"},
      field("preset", &C::preset),
      field("d", &C::d),
      field("q", &C::q),
      field("cutoff", &C::cutoff),
      field("s", &C::s),
      field("s_prime", &C::s_prime),
      field("k_tilde", &C::k_tilde),
      field("eta", &C::eta),
      field("c_ds", &C::c_ds),
      field("alpha", &C::alpha),
      field("alpha_list", &C::alpha_list),
      field("cutoff_list", &C::cutoff_list),
      field("noise_decay", &C::noise_decay),
      field("noise_amplitude", &C::noise_amplitude),
      field("force_mean_mode", &C::force_mean_mode),
      field("a_floor", &C::a_floor),
      field("a_floor_list", &C::a_floor_list),
      field("dt_nondim", &C::dt),
      field("T_nondim", &C::T),
      field("horizon_nondim", &C::horizon),
      field("burn_in_nondim", &C::burn_in),
      field("thin_nondim", &C::thin),
      field("every_nondim", &C::every),
      field("envelope_T_nondim", &C::envelope_T),
      field("dealias_factor", &C::dealias_factor),
      field("grid_points", &C::grid_points),
      field("scheme", &C::scheme),
      field("paths", &C::paths),
      field("bins", &C::bins),
      field("j_max", &C::j_max),
      field("i_list", &C::i_list),
      field("R_list", &C::R_list),
      field("fields", &C::fields),
      field("corpus", &C::corpus),
      field("growth_samples", &C::growth_samples),
      field("initial", &C::initial),
      field("initial_amplitude", &C::initial_amplitude),
      field("initial_decay", &C::initial_decay),
      field("initial_mode", &C::initial_mode),
      field("suite", &C::suite),
      field("sobolev_orders", &C::sobolev_orders),
      field("seed", &C::seed),
  };
  return table;
}

const FieldSpec* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

void apply_preset(ExperimentConfig& c, std::vector<std::string>& problems) {
  if (c.preset.empty()) return;
  if (c.preset == "plane_wave") {
    if (c.kind != ExperimentKind::flow) problems.push_back("preset: plane_wave applies to kind flow only");
    c.initial = "plane_wave";
    c.initial_mode = 1;
    c.initial_amplitude = 1.0;
    c.cutoff = 64.0;
    c.dt = 1e-3;
    c.T = 10.0;
    c.every = 1.0;
    return;
  }
  if (c.preset != "desk") {
    problems.push_back("preset: unknown preset '" + c.preset + "' (expected plane_wave or desk)");
    return;
  }
  switch (c.kind) {
    case ExperimentKind::flow:
      c.cutoff = 1024.0;
      c.q = 3;
      c.dt = 1e-3;
      c.T = 10.0;
      break;
    case ExperimentKind::sde:
      c.cutoff = 64.0;
      c.alpha = 0.1;
      c.dt = 1e-3;
      c.T = 10.0;
      c.paths = 200;
      c.every = 1.0;
      c.initial = "gaussian";
      c.initial_decay = 1.5;
      break;
    case ExperimentKind::kb:
      c.cutoff = 64.0;
      c.alpha = 0.1;
      c.dt = 0.01;
      c.horizon = 2000.0;
      c.burn_in = 100.0;
      c.thin = 0.5;
      break;
    case ExperimentKind::inviscid:
      c.cutoff = 64.0;
      c.alpha_list = {0.2, 0.1, 0.05};
      c.dt = 0.01;
      c.horizon = 2000.0;
      c.burn_in = 100.0;
      c.thin = 0.5;
      break;
    case ExperimentKind::ensemble:
      c.cutoff = 64.0;
      c.alpha = 0.1;
      c.dt = 0.01;
      c.noise_amplitude = 8.0;
      c.c_ds = 1e-3;
      c.burn_in = 100.0;
      c.thin = 10.0;
      c.corpus = 400;
      c.a_floor_list = {1e-4, 1e-3, 1e-2};
      c.j_max = 10;
      c.envelope_T = 100.0;
      break;
    case ExperimentKind::verify:
      c.cutoff = 64.0;
      c.fields = 100;
      break;
  }
}

void capture(std::vector<std::string>& problems, const std::string& keys, const std::function<void()>& check) {
  try {
    check();
  } catch (const Error& e) {
    problems.push_back(keys + ": " + e.what());
  }
}

void require(std::vector<std::string>& problems, bool ok, const std::string& message) {
  if (!ok) problems.push_back(message);
}

std::vector<std::string> validation_problems(const ExperimentConfig& c) {
  std::vector<std::string> p;
  const auto kind = c.kind;
  const bool stochastic = kind == ExperimentKind::sde || kind == ExperimentKind::kb ||
                          kind == ExperimentKind::inviscid || kind == ExperimentKind::ensemble;
  const bool stationary = kind == ExperimentKind::kb || kind == ExperimentKind::inviscid || kind == ExperimentKind::ensemble;

  require(p, c.d >= 1 && c.d <= 3, "d: must be 1, 2 or 3");
  require(p, c.q >= 1, "q: must be a positive integer");
  require(p, std::isfinite(c.cutoff) && c.cutoff >= 0.0, "cutoff: must be finite and non-negative");
  for (double x : c.cutoff_list) require(p, std::isfinite(x) && x >= 0.0, "cutoff_list: entries must be non-negative");
  require(p, c.scheme == "strang" || c.scheme == "lie", "scheme: must be strang or lie");
  require(p, c.dt > 0.0, "dt_nondim: must be positive");
  require(p, c.T > 0.0, "T_nondim: must be positive");
  require(p, c.every >= 0.0, "every_nondim: must be non-negative");
  require(p, c.envelope_T > 0.0, "envelope_T_nondim: must be positive");
  require(p, c.dealias_factor >= 0, "dealias_factor: must be non-negative");
  require(p, c.grid_points >= 0, "grid_points: must be non-negative");
  require(p, c.initial == "zero" || c.initial == "plane_wave" || c.initial == "gaussian",
          "initial: must be zero, plane_wave or gaussian");
  if (c.initial == "plane_wave") {
    require(p, static_cast<double>(c.initial_mode) * c.initial_mode <= c.cutoff,
            "initial_mode: |k|^2 exceeds the cutoff");
  }
  require(p, c.initial_amplitude >= 0.0, "initial_amplitude: must be non-negative");
  require(p, c.suite == "flow" || c.suite == "dissipation" || c.suite == "gap" || c.suite == "all",
          "suite: must be flow, dissipation, gap or all");
  for (double s : c.sobolev_orders) require(p, std::isfinite(s), "sobolev_orders: entries must be finite");

  capture(p, "q, dt_nondim, dealias_factor, scheme", [&] {
    FlowConfig fc;
    fc.q = c.q;
    fc.dt = c.dt;
    fc.dealias_factor = c.dealias_factor;
    fc.validate();
  });

  if (stochastic || kind == ExperimentKind::verify) {
    capture(p, "s, k_tilde, c_ds, eta", [&] {
      DissipationParams dp;
      dp.s = c.s;
      dp.k_tilde = c.k_tilde;
      dp.c_ds = c.c_ds;
      dp.eta = c.eta;
      dp.q = c.q;
      dp.validate();
    });
  }
  if (stochastic) {
    require(p, c.noise_amplitude >= 0.0, "noise_amplitude: must be non-negative");
    for (double a : c.alphas()) {
      if (stationary) {
        require(p, a > 0.0 && a < 1.0, "alpha: stationary runs need alpha in (0, 1), got " + format_number(a));
      } else {
        require(p, a >= 0.0 && a < 1.0, "alpha: must lie in [0, 1), got " + format_number(a));
      }
    }
  }
  if (kind == ExperimentKind::sde) require(p, c.paths >= 2, "paths: need at least 2");
  if (kind == ExperimentKind::kb || kind == ExperimentKind::inviscid) {
    require(p, c.thin >= c.dt, "thin_nondim: must be at least dt_nondim");
    require(p, c.burn_in >= 0.0, "burn_in_nondim: must be non-negative");
    require(p, c.horizon >= c.burn_in + 10.0 * c.thin, "horizon_nondim: must be at least burn_in + 10 thin");
    require(p, c.bins >= 50, "bins: need at least 50");
    for (double r : c.R_list) require(p, r > 0.0, "R_list: radii must be positive");
  }
  if (kind == ExperimentKind::inviscid) {
    require(p, c.alpha_list.size() >= 3, "alpha_list: inviscid comparison needs at least 3 values");
    require(p, c.cutoff_list.empty(), "cutoff_list: inviscid runs use the single cutoff");
  }
  if (kind == ExperimentKind::ensemble) {
    require(p, c.thin >= c.dt, "thin_nondim: must be at least dt_nondim");
    require(p, c.burn_in >= 0.0, "burn_in_nondim: must be non-negative");
    require(p, c.corpus >= 50, "corpus: need at least 50 samples");
    require(p, c.growth_samples >= 2 && c.growth_samples <= c.corpus, "growth_samples: must lie in [2, corpus]");
    require(p, c.j_max >= 1, "j_max: must be positive");
    for (double a : c.a_floors()) require(p, a > 0.0, "a_floor: must be positive");
    const auto lv = c.levels();
    for (std::size_t n = 0; n < lv.size(); ++n) {
      require(p, lv[n] >= 1 && (n == 0 || lv[n] > lv[n - 1]), "i_list: levels must be positive and increasing");
    }
    require(p, std::pow(static_cast<double>(c.j_max), c.k_tilde) >= c.envelope_T,
            "j_max: j_max^k_tilde must reach envelope_T_nondim");
  }
  if (kind == ExperimentKind::ensemble || (kind == ExperimentKind::verify && (c.suite == "gap" || c.suite == "all"))) {
    capture(p, "s_prime", [&] {
      EnsembleSpec spec;
      spec.s_prime = c.s_prime;
      spec.validate(c.d, c.q, c.s - c.eta);
    });
  }
  if (kind == ExperimentKind::verify) require(p, c.fields >= 1, "fields: need at least 1");
  return p;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "?";
}

std::vector<int> ExperimentConfig::levels() const {
  return i_list.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6, 8} : i_list;
}

namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out = "invalid configuration:";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : InvalidArgument(join(problems)), problems_(std::move(problems)) {}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError({"<root>: expected an object"});
  std::vector<std::string> problems;
  ExperimentConfig c;
  if (!j.contains("kind")) {
    problems.push_back("kind: required");
  } else if (!find_field("kind")->read(c, j.at("kind"))) {
    problems.push_back(std::string("kind: expected ") + find_field("kind")->expected);
  }
  if (j.contains("preset") && !find_field("preset")->read(c, j.at("preset"))) {
    problems.push_back("preset: expected a string");
  }
  apply_preset(c, problems);

  for (const auto& [key, value] : j.items()) {
    if (key == "kind" || key == "preset") continue;
    const FieldSpec* f = find_field(key);
    if (f == nullptr) {
      const FieldSpec* hint = find_field(key + "_nondim");
      problems.push_back(key + ": unknown key" +
                         (hint ? " (time keys carry the suffix _nondim: " + hint->key + ")" : std::string()));
      continue;
    }
    if (!f->read(c, value)) problems.push_back(key + ": expected " + f->expected);
  }
  for (auto& v : validation_problems(c)) problems.push_back(std::move(v));
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& config) {
  json j = json::object();
  for (const auto& f : fields()) j[f.key] = f.write(config);
  return j;
}

void validate(const ExperimentConfig& config) {
  auto problems = validation_problems(config);
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

}  // namespace nlslab
