#pragma once

// Green functions G_I = (R_I (H - E) R_I)^{-1} of interval restrictions,
// (t,k)-regularity and block expansion of eigenvectors.

#include <optional>
#include <string>
#include <vector>

#include "amolab/cfrac.hpp"
#include "amolab/logsigned.hpp"
#include "amolab/model.hpp"

namespace amolab::green {

struct Interval {
  Site x1 = 0;
  Site x2 = 0;

  static Interval from_start(Site x1, int k) { return {x1, x1 + k - 1}; }
  int k() const { return static_cast<int>(x2 - x1 + 1); }
  bool contains(Site y) const { return y >= x1 && y <= x2; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// G_I(x1, y) and G_I(y, x2).
struct GreenPair {
  LogSigned left;
  LogSigned right;
};

/// Throws ResonantInterval when some twisted pivot of the restriction is
/// below e^-40 times the largest diagonal magnitude.
void check_nonsingular(std::span<const Real> v, const Real& energy);

/// Tridiagonal solve with partial pivoting for the columns e_{x1}, e_{x2}.
GreenPair green_direct(const Interval& I, const PotentialTable& table, const Real& energy, Site y);
GreenPair green_direct(const Interval& I, const ModelParams& params, Site y);

/// Determinant ratios:
///   G_I(x1,y) = (-1)^{y-x1} P_{x2-y}(theta + (y+1) alpha) / P_k(theta + x1 alpha)
///   G_I(y,x2) = (-1)^{x2-y} P_{y-x1}(theta + x1 alpha)    / P_k(theta + x1 alpha)
GreenPair green_cramer(const Interval& I, const PotentialTable& table, const Real& energy, Site y);
GreenPair green_cramer(const Interval& I, const ModelParams& params, Site y);

/// Both boundary columns for every y in I, from one forward and one
/// backward determinant sweep.
class GreenTable {
 public:
  GreenTable(const Interval& I, const PotentialTable& table, const Real& energy);

  const Interval& interval() const { return interval_; }
  const GreenPair& at(Site y) const { return entries_.at(static_cast<size_t>(y - interval_.x1)); }

 private:
  Interval interval_;
  std::vector<GreenPair> entries_;
};

struct RegularityWitness {
  Site y = 0;
  Real t;
  int k = 0;
  Interval interval;
  Real slack_left;   // -t|y - x1| - ln|G_I(x1,y)|
  Real slack_right;  // -t|y - x2| - ln|G_I(y,x2)|
  GreenPair green;

  Real min_slack() const { return fmin(slack_left, slack_right); }
};

struct RegularityOptions {
  /// Only intervals inside [lo, hi] are considered when set.
  std::optional<Site> lo;
  std::optional<Site> hi;
};

/// Scans x1 with y - x1 in [ceil(k/7), k-1-ceil(k/7)] and returns the
/// witness with the largest minimum slack; intervals whose restriction is
/// singular at E are skipped. Requires t > 0 and k >= 7.
std::optional<RegularityWitness> is_regular(Site y, const Real& t, int k, const PotentialTable& table,
                                            const Real& energy, const RegularityOptions& opts = {});
std::optional<RegularityWitness> is_regular(Site y, const Real& t, int k, const ModelParams& params,
                                            const RegularityOptions& opts = {});

/// The scale at which a nonresonant y is expected to be regular:
/// n0 least positive with 4 q_{n-n0} <= dist(y) - 2, s largest with
/// 4 s q_{n-n0} <= dist(y) - 2, k = 6 s q_{n-n0} - 1.
struct RegularityScale {
  int n = 0;
  int n0 = 0;
  long s = 0;
  long q_lower = 0;  // q_{n-n0}
  int k = 0;
  cfrac::HalfInteger dist;
};

RegularityScale regularity_scale(Site y, const cfrac::Frequency& f, int n);

/// max over x in I of |phi(x) + G_I(x1,x) phi(x1-1) + G_I(x,x2) phi(x2+1)|.
/// I must lie strictly inside phi's domain.
Real block_expand_residual(const SiteVector& phi, const Interval& I, const PotentialTable& table,
                           const Real& energy);
Real block_expand_residual(const SiteVector& phi, const Interval& I, const ModelParams& params);

struct Hop {
  Site z = 0;          // expanded site
  Interval interval;   // witness interval
  Site exit = 0;       // boundary neighbour followed (x1-1 or x2+1)
  double log_increment = 0;  // ln|G_I(z, exit side)|
};

struct ExpansionChain {
  Site start = 0;
  std::vector<Hop> hops;
  Site terminal = 0;
  double path_log_bound = 0;  // sum of hop increments along the followed path
  bool stuck = false;         // a scale exists at the terminal site but no witness does
  bool capped = false;        // hop cap reached
  bool cycled = false;        // both exits of the last witness were already expanded
  double distance = 0;        // |terminal - start|
  double realized_slack = 0;  // distance + path_log_bound / (ln lambda - eta)
  /// Tree bound: |phi(start)| <= exp(certificate) * max over `leaves` of |phi|.
  double certificate = 0;
  std::vector<Site> leaves;
};

struct ChainOptions {
  int level = 0;      // n
  double eta = 0.01;
  Real t;             // regularity rate; ln lambda - eta when zero
  int k = 0;          // regularity length; per-site scale when zero
  std::optional<int> max_hops;  // floor(4 q_n / q_{n-n0}) when absent
  Site region_lo = 0;  // sites outside [region_lo, region_hi] are not expanded
  Site region_hi = 0;
  Site domain_lo = 0;  // witness intervals stay strictly inside the domain
  Site domain_hi = 0;
};

/// Maximal run of n-nonresonant sites containing start.
std::pair<Site, Site> nonresonant_region(Site start, const cfrac::Frequency& f, int n, double eta, Site lo,
                                         Site hi);

ExpansionChain expand_chain(Site start, const ModelParams& params, const PotentialTable& table,
                            const ChainOptions& opts);

/// One JSON object per hop.
std::string to_json_lines(const ExpansionChain& chain);

}  // namespace amolab::green
