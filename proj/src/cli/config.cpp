#include <set>

#include "amolab/cli.hpp"

namespace amolab::cli {

namespace {

std::string kind_name(FrequencySpec::Kind k) {
  switch (k) {
    case FrequencySpec::Kind::Golden: return "golden";
    case FrequencySpec::Kind::Coeffs: return "coeffs";
    case FrequencySpec::Kind::Liouville: return "liouville";
  }
  return "?";
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void take(const nlohmann::json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

FrequencySpec frequency_from_json(const nlohmann::json& j, FrequencySpec f) {
  if (!j.is_object()) throw ConfigError("config field 'frequency' must be an object");
  reject_unknown(j, {"kind", "depth", "coeffs", "beta", "levels", "seed"}, "'frequency'");
  if (j.contains("kind")) {
    std::string k;
    take(j, "kind", k);
    if (k == "golden") f.kind = FrequencySpec::Kind::Golden;
    else if (k == "coeffs") f.kind = FrequencySpec::Kind::Coeffs;
    else if (k == "liouville") f.kind = FrequencySpec::Kind::Liouville;
    else throw ConfigError("frequency kind must be golden, coeffs or liouville, got '" + k + "'");
  }
  take(j, "depth", f.depth);
  if (j.contains("coeffs")) {
    // quotients may be numbers or decimal strings (for ones beyond 64 bits)
    f.coeffs.clear();
    if (!j["coeffs"].is_array()) throw ConfigError("frequency coeffs must be an array");
    for (const auto& a : j["coeffs"]) {
      if (a.is_string()) f.coeffs.push_back(a.get<std::string>());
      else if (a.is_number_integer()) f.coeffs.push_back(std::to_string(a.get<long long>()));
      else throw ConfigError("frequency coeffs must be integers or decimal strings");
    }
  }
  take(j, "beta", f.beta);
  take(j, "levels", f.levels);
  take(j, "seed", f.seed);
  return f;
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.precision < 64) throw ConfigError("precision must be at least 64 bits, got " + std::to_string(c.precision));
  if (c.N < 5) throw ConfigError("N must be at least 5, got " + std::to_string(c.N));
  if (!(c.eta > 0 && c.eta < 1.0 / 20)) throw ConfigError("eta must lie in (0, 1/20), got " + std::to_string(c.eta));
  if (!(c.lambda > 0)) throw ConfigError("lambda must be positive");
  if (c.jobs < 1) throw ConfigError("jobs must be at least 1");
  const auto& f = c.frequency;
  if (f.kind == FrequencySpec::Kind::Golden && f.depth < 1) throw ConfigError("golden depth must be at least 1");
  if (f.kind == FrequencySpec::Kind::Coeffs && f.coeffs.empty()) throw ConfigError("coeffs frequency needs quotients");
  if (f.kind == FrequencySpec::Kind::Liouville) {
    if (!(f.beta > 0)) throw ConfigError("liouville beta must be positive");
    if (f.levels < 0) throw ConfigError("liouville levels must be non-negative");
    if (f.seed.empty()) throw ConfigError("liouville seed needs at least one quotient");
  }
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"lambda", "theta", "frequency", "precision", "eta", "N", "out_dir", "seed", "jobs"}, "config");
  take(j, "lambda", c.lambda);
  if (j.contains("theta")) {
    std::string t;
    take(j, "theta", t);
    try {
      c.theta = theta_kind_from_string(t);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("frequency")) c.frequency = frequency_from_json(j["frequency"], c.frequency);
  take(j, "precision", c.precision);
  take(j, "eta", c.eta);
  take(j, "N", c.N);
  if (j.contains("out_dir")) {
    std::string d;
    take(j, "out_dir", d);
    c.out_dir = d;
  }
  take(j, "seed", c.seed);
  take(j, "jobs", c.jobs);
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  const auto& f = c.frequency;
  nlohmann::json fj{{"kind", kind_name(f.kind)}};
  switch (f.kind) {
    case FrequencySpec::Kind::Golden: fj["depth"] = f.depth; break;
    case FrequencySpec::Kind::Coeffs: fj["coeffs"] = f.coeffs; break;
    case FrequencySpec::Kind::Liouville:
      fj["beta"] = f.beta;
      fj["levels"] = f.levels;
      fj["seed"] = f.seed;
      break;
  }
  return {{"lambda", c.lambda},   {"theta", to_string(c.theta)}, {"frequency", fj},
          {"precision", c.precision}, {"eta", c.eta},          {"N", c.N},
          {"out_dir", c.out_dir.string()}, {"seed", c.seed},   {"jobs", c.jobs}};
}

cfrac::Frequency build_frequency(const FrequencySpec& spec) {
  switch (spec.kind) {
    case FrequencySpec::Kind::Golden: return cfrac::Frequency::golden(spec.depth);
    case FrequencySpec::Kind::Coeffs: {
      std::vector<mpz_class> a;
      for (const auto& s : spec.coeffs) {
        mpz_class z;
        if (z.set_str(s, 10) != 0) throw ConfigError("quotient '" + s + "' is not a decimal integer");
        a.push_back(z);
      }
      try {
        return cfrac::Frequency::from_coeffs(std::move(a));
      } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
      }
    }
    case FrequencySpec::Kind::Liouville: return cfrac::build_liouville(spec.beta, spec.levels, spec.seed);
  }
  throw ConfigError("unknown frequency kind");
}

}  // namespace amolab::cli
