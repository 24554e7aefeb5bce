#include <chrono>
#include <stdexcept>

#include "amolab/errors.hpp"
#include "internal.hpp"

namespace amolab::verify {

std::string to_string(Scale s) { return s == Scale::Full ? "full" : "quick"; }

Scale scale_from_string(const std::string& s) {
  if (s == "full") return Scale::Full;
  if (s == "quick") return Scale::Quick;
  throw PreconditionError("scale must be 'quick' or 'full', got '" + s + "'");
}

const std::vector<CriterionInfo>& criteria() {
  static const std::vector<CriterionInfo> list{
      {1, "continued-fraction invariants", 10},
      {2, "Liouville construction", 5},
      {3, "Green oracle equivalence", 120},
      {4, "block expansion identity", 60},
      {5, "determinant growth bound", 300},
      {6, "Herman bound", 300},
      {7, "uniformity witness", 120},
      {8, "Lyapunov exponent", 30},
      {9, "decay bound", 300},
      {10, "peak inequalities", 0},
      {11, "Sturm and dense oracle", 60},
  };
  return list;
}

namespace {

const CriterionInfo& info(int id) {
  for (const auto& c : criteria())
    if (c.id == id) return c;
  throw PreconditionError("no criterion with id " + std::to_string(id));
}

CriterionResult dispatch(int id, const Options& opts, detail::Shared& shared) {
  using namespace detail;
  switch (id) {
    case 1: return cf_invariants(opts);
    case 2: return liouville(opts);
    case 3: return green_equivalence(opts);
    case 4: return block_expansion(opts);
    case 5: return sup_bound(opts);
    case 6: return herman(opts);
    case 7: return uniformity(opts);
    case 8: return lyapunov(opts);
    case 9: return decay_bound(opts, shared);
    case 10: return peak_inequalities(opts, shared);
    case 11: return sturm_oracle(opts);
  }
  throw PreconditionError("no criterion with id " + std::to_string(id));
}

CriterionResult run_one(int id, const Options& opts, detail::Shared& shared) {
  const auto& ci = info(id);
  PrecisionGuard guard(static_cast<mpfr_prec_t>(opts.precision));
  auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = dispatch(id, opts, shared);
  } catch (const std::exception& e) {
    r.pass = false;
    r.summary = std::string("error: ") + e.what();
    r.details = {{"error", e.what()}};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.id = id;
  r.name = ci.name;
  r.limit_seconds = ci.limit_seconds;
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, const Options& opts) {
  detail::Shared shared;
  return run_one(id, opts, shared);
}

bool Verdict::pass() const {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

Verdict run_suite(const Options& opts, std::span<const int> ids) {
  if (opts.precision < 64) throw PreconditionError("precision must be at least 64 bits");
  Verdict v;
  v.options = opts;
  detail::Shared shared;
  if (ids.empty()) {
    for (const auto& c : criteria()) v.results.push_back(run_one(c.id, opts, shared));
  } else {
    for (int id : ids) v.results.push_back(run_one(id, opts, shared));
  }
  return v;
}

std::string verdict_json(const Verdict& v) {
  nlohmann::json j;
  j["seed"] = v.options.seed;
  j["scale"] = to_string(v.options.scale);
  j["precision_bits"] = v.options.precision;
  j["k_override"] = v.options.k ? nlohmann::json(*v.options.k) : nlohmann::json(nullptr);
  j["pass"] = v.pass();
  auto& list = j["criteria"] = nlohmann::json::array();
  for (const auto& r : v.results)
    list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"details", r.details}});
  return j.dump(2) + "\n";
}

}  // namespace amolab::verify
