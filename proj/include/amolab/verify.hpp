#pragma once

// The acceptance suite: one function per criterion, each returning a
// verdict plus the measured quantities behind it.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace amolab::verify {

enum class Scale {
  Quick,  // reduced counts, same checks; used for determinism runs
  Full,   // the counts stated in the acceptance list
};

std::string to_string(Scale s);
Scale scale_from_string(const std::string& s);

struct Options {
  std::uint64_t seed = 20240601;
  Scale scale = Scale::Full;
  int jobs = 1;
  long precision = 128;
  /// Replaces the k values of the determinant sweeps (criteria 3, 5, 6).
  std::optional<int> k;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;     // one line
  nlohmann::json details;  // measured values; deterministic
  double seconds = 0;      // wall clock, never serialised into the verdict
  double limit_seconds = 0;
};

struct CriterionInfo {
  int id;
  const char* name;
  double limit_seconds;  // 0 when the criterion states no limit
};

/// Criteria 1..11 (12, determinism, compares two verdicts and lives with the CLI).
const std::vector<CriterionInfo>& criteria();

CriterionResult run_criterion(int id, const Options& opts);

struct Verdict {
  Options options;
  std::vector<CriterionResult> results;
  bool pass() const;
};

/// Runs the selected criteria (all of them when `ids` is empty) in order.
/// Criteria 9 and 10 share their eigenpairs.
Verdict run_suite(const Options& opts, std::span<const int> ids = {});

/// Verdict without timings: byte-identical for identical options.
std::string verdict_json(const Verdict& v);

}  // namespace amolab::verify
