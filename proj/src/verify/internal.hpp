#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <memory>
#include <random>
#include <thread>
#include <vector>

#include "amolab/cfrac.hpp"
#include "amolab/real.hpp"
#include "amolab/spectral.hpp"
#include "amolab/verify.hpp"

namespace amolab::verify::detail {

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Every worker gets
/// the requested MPFR precision; the first exception is rethrown.
template <class F>
void parallel_for(size_t n, const Options& opts, F&& body) {
  const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, opts.jobs)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      Real::set_default_precision(static_cast<mpfr_prec_t>(opts.precision));
      try {
        for (size_t i = next++; i < n; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Splits [0, n) into one contiguous block per job and runs body(begin, end).
template <class F>
void for_blocks(size_t n, const Options& opts, F&& body) {
  // each block repeats the shared setup, so never more blocks than cores
  const size_t cores = std::max(1u, std::thread::hardware_concurrency());
  const size_t blocks = std::min({n, static_cast<size_t>(std::max(1, opts.jobs)), cores});
  parallel_for(blocks, opts, [&](size_t b) { body(b * n / blocks, (b + 1) * n / blocks); });
}

/// Independent stream per criterion, all derived from the run seed.
inline std::mt19937_64 rng_for(const Options& opts, int criterion) {
  std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                    static_cast<std::uint32_t>(criterion)};
  return std::mt19937_64(seq);
}

struct DecayRun {
  std::string label;
  double lambda = 0;
  std::shared_ptr<const cfrac::Frequency> freq;
  double beta_est = 0;
  int N = 0;
  int level = 0;
  long eigenpairs = 0;
  std::vector<spectral::EigenPair> localized;
};

/// Eigenpairs for criteria 9 and 10, computed once per suite.
struct Shared {
  std::vector<DecayRun> decay;
};

const std::vector<DecayRun>& decay_runs(const Options& opts, Shared& shared);

CriterionResult cf_invariants(const Options& opts);
CriterionResult liouville(const Options& opts);
CriterionResult green_equivalence(const Options& opts);
CriterionResult block_expansion(const Options& opts);
CriterionResult sup_bound(const Options& opts);
CriterionResult herman(const Options& opts);
CriterionResult uniformity(const Options& opts);
CriterionResult lyapunov(const Options& opts);
CriterionResult decay_bound(const Options& opts, Shared& shared);
CriterionResult peak_inequalities(const Options& opts, Shared& shared);
CriterionResult sturm_oracle(const Options& opts);

}  // namespace amolab::verify::detail
