#pragma once

// The almost Mathieu operator
//   (H u)(n) = u(n+1) + u(n-1) + 2 lambda cos 2pi(theta + n alpha) u(n)
// at the four completely resonant phases, and its potential tables.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "amolab/cfrac.hpp"
#include "amolab/real.hpp"

namespace amolab {

using Site = std::int64_t;

/// theta in {0, 1/2, alpha/2, alpha/2 + 1/2}.
enum class ThetaKind { Zero, Half, HalfAlpha, HalfAlphaPlusHalf };

std::string to_string(ThetaKind k);
ThetaKind theta_kind_from_string(const std::string& s);
inline constexpr ThetaKind kAllThetaKinds[] = {ThetaKind::Zero, ThetaKind::Half, ThetaKind::HalfAlpha,
                                               ThetaKind::HalfAlphaPlusHalf};

struct ModelParams {
  Real lambda;
  std::shared_ptr<const cfrac::Frequency> freq;
  ThetaKind theta = ThetaKind::Zero;
  Real energy;

  ModelParams with_energy(Real e) const {
    ModelParams out = *this;
    out.energy = std::move(e);
    return out;
  }
};

ModelParams make_params(double lambda, cfrac::Frequency f, ThetaKind theta, Real energy = Real(0));

/// Phase theta + t alpha / 2 reduced mod 1, as the exact residue r/(2 q_m)
/// with 0 <= r < 2 q_m. Sites correspond to even t = 2n.
mpz_class phase_residue(const cfrac::Frequency& f, ThetaKind theta, std::int64_t half_steps);

/// frac(j alpha) as a real in [0,1), reduced exactly before rounding.
Real alpha_multiple_frac(const cfrac::Frequency& f, std::int64_t j);

/// v(n) = 2 lambda cos 2pi frac(theta + n alpha). Requires |n| < q_m.
Real potential(Site n, const ModelParams& params);

/// Real values on consecutive sites lo, lo+1, ...
struct SiteVector {
  Site lo = 0;
  std::vector<Real> values;

  Site hi() const { return lo + static_cast<Site>(values.size()) - 1; }
  bool contains(Site n) const { return n >= lo && n <= hi(); }
  const Real& at(Site n) const { return values.at(static_cast<size_t>(n - lo)); }
  Real& at(Site n) { return values.at(static_cast<size_t>(n - lo)); }
  Real sup_norm() const;
};

/// Potential values over a contiguous half-step range [t_lo, t_hi].
/// Site n lives at t = 2n; odd t are the alpha/2-shifted phases used by
/// P_k(theta_i - (k-1) alpha / 2).
class PotentialTable {
 public:
  /// Tabulates t = t_lo, t_lo + stride, ..., up to t_hi.
  PotentialTable(const ModelParams& params, std::int64_t t_lo, std::int64_t t_hi, int stride = 1);
  /// Covers sites [lo, hi] only.
  static PotentialTable sites(const ModelParams& params, Site lo, Site hi);

  std::int64_t t_lo() const { return t_lo_; }
  std::int64_t t_hi() const { return t_lo_ + stride_ * (static_cast<std::int64_t>(v_.size()) - 1); }
  bool covers_sites(Site lo, Site hi) const { return 2 * lo >= t_lo() && 2 * hi <= t_hi(); }
  const Real& at_half(std::int64_t t) const;
  const Real& at_site(Site n) const { return at_half(2 * n); }
  /// v at sites lo..hi (copied; sites are every other half step).
  std::vector<Real> site_values(Site lo, Site hi) const;
  /// v at half steps t0, t0+2, ..., t0+2(k-1): the k sites of P_k(theta + t0 alpha/2).
  std::vector<Real> run(std::int64_t t0, int k) const;

 private:
  std::int64_t t_lo_;
  int stride_;
  std::vector<Real> v_;
};

}  // namespace amolab
