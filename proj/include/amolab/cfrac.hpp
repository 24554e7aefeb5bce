#pragma once

// Continued-fraction frequencies with exact big-integer convergents.

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amolab/real.hpp"

namespace amolab::cfrac {

struct Convergent {
  mpz_class p;
  mpz_class q;
};

/// A frequency alpha in (0,1) given by a finite continued fraction
/// [0; a_1, ..., a_m]. Level n refers to the convergent p_n/q_n, n = 0..m,
/// with p_0/q_0 = 0/1. The deepest convergent p_m/q_m is alpha itself.
///
/// Immutable after construction.
class Frequency {
 public:
  /// Builds the convergents from partial quotients; every a_i must be >= 1
  /// and at least one must be given.
  static Frequency from_coeffs(std::vector<mpz_class> coeffs);
  /// [0; 1, 1, ..., 1] with `depth` ones: F_depth / F_{depth+1}.
  static Frequency golden(int depth);

  const std::vector<mpz_class>& coeffs() const { return coeffs_; }
  const std::vector<Convergent>& convergents() const { return convergents_; }
  int depth() const { return static_cast<int>(coeffs_.size()); }
  const mpz_class& p(int n) const { return convergents_.at(static_cast<size_t>(n)).p; }
  const mpz_class& q(int n) const { return convergents_.at(static_cast<size_t>(n)).q; }
  const mpz_class& p_deep() const { return convergents_.back().p; }
  const mpz_class& q_deep() const { return convergents_.back().q; }
  mpq_class value() const { return mpq_class(p_deep(), q_deep()); }
  Real to_real() const { return Real(p_deep()) / Real(q_deep()); }

  /// Deepest level n with q_n <= bound (0 if none beyond q_0).
  int level_below(const mpz_class& bound) const;

 private:
  std::vector<mpz_class> coeffs_;
  std::vector<Convergent> convergents_;
};

/// Euclidean expansion of a rational in (0,1), truncated at `depth` quotients.
Frequency expand(const mpq_class& x, int depth);

struct LiouvilleOptions {
  /// Refuse to build a denominator with more decimal digits than this.
  double digit_budget = 1e6;
};

/// Extends `seed` with `levels` quotients a_{n+1} = max(1, round(e^{beta q_n} / q_n)),
/// so that ln q_{n+1} / q_n tracks `beta` once the rounding no longer clamps.
Frequency build_liouville(double beta, int levels, std::span<const mpz_class> seed,
                          const LiouvilleOptions& opts = {});
Frequency build_liouville(double beta, int levels, std::span<const long> seed,
                          const LiouvilleOptions& opts = {});

struct LevelBeta {
  int n;
  Real value;  // ln q_{n+1} / q_n
};

struct BetaEstimate {
  std::vector<LevelBeta> per_level;  // n = 0 .. depth-1
  Real running_max;

  /// Value at the deepest level, ln q_m / q_{m-1}; the limsup proxy used
  /// when comparing against decay rates.
  const Real& tail() const { return per_level.back().value; }
  /// Maximum over levels n >= from.
  Real max_from(int from) const;
};

BetaEstimate beta_estimate(const Frequency& f);

/// ||k alpha|| evaluated exactly against the deepest convergent, then rounded.
/// Requires 0 < |k| < q_level.
Real norm_dist(const mpz_class& k, const Frequency& f, int level);
/// Exact ||k alpha|| as a rational with denominator q_m.
mpq_class norm_dist_exact(const mpz_class& k, const Frequency& f);

/// Non-negative multiple of 1/2 held as twice its value.
struct HalfInteger {
  mpz_class twice;

  Real to_real() const { return Real(twice) / 2L; }
  std::string str() const;
  friend bool operator==(const HalfInteger&, const HalfInteger&) = default;
};

/// dist(y, q Z + (q/2) Z), the distance to the half-period lattice {j q / 2}.
HalfInteger site_distance(std::int64_t y, const mpz_class& q);

struct ResonanceLabel {
  int level;
  HalfInteger distance;
  bool resonant;
  Real b_n;  // eta * q_n
};

/// n-resonance test: resonant iff dist(y, q_n Z + (q_n/2) Z) <= eta q_n.
/// Requires y != 0 and 0 < eta < 1/20.
ResonanceLabel classify(std::int64_t y, const Frequency& f, int n, double eta);

/// {"coeffs": [...], "convergents": [["p","q"], ...]} with decimal strings.
std::string to_json(const Frequency& f);
Frequency frequency_from_json(const std::string& text);
std::string to_json(const BetaEstimate& b);

}  // namespace amolab::cfrac
