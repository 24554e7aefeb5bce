#pragma once

// Command-line front end. Every run is described by one RunConfig; a JSON
// config file sets its fields, AMOLAB_PRECISION_BITS then overrides the
// precision, and explicit flags override both.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amolab/cfrac.hpp"
#include "amolab/errors.hpp"
#include "amolab/model.hpp"

namespace amolab::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kUsage = 2;

/// Rejected configuration or command line; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct FrequencySpec {
  enum class Kind { Golden, Coeffs, Liouville };
  Kind kind = Kind::Golden;
  int depth = 40;                       // golden
  std::vector<std::string> coeffs;      // explicit quotients, decimal
  double beta = 0.5;                    // liouville
  int levels = 4;
  std::vector<long> seed{1, 1, 1};
};

struct RunConfig {
  double lambda = 3;
  ThetaKind theta = ThetaKind::Zero;
  FrequencySpec frequency;
  long precision = 128;
  double eta = 0.01;
  int N = 400;
  std::filesystem::path out_dir = "amolab-out";
  std::uint64_t seed = 20240601;
  int jobs = 1;
};

/// Throws ConfigError unless precision >= 64, N >= 5, 0 < eta < 1/20,
/// lambda > 0 and jobs >= 1.
void validate(const RunConfig& c);

/// Applies the fields present in `j` on top of `base`. Unknown keys are
/// rejected so that typos do not silently fall back to defaults.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json to_json(const RunConfig& c);

cfrac::Frequency build_frequency(const FrequencySpec& spec);

/// The whole program: parses argv, runs one subcommand, returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace amolab::cli
