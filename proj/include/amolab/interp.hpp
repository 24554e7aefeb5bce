#pragma once

// Lagrange interpolation terms La_i on node sets {cos 2pi theta_j}, the
// uniformity witness built on them, Herman's integral bound and the
// sine-product estimate.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amolab/cfrac.hpp"
#include "amolab/errors.hpp"
#include "amolab/logsigned.hpp"
#include "amolab/model.hpp"

namespace amolab::interp {

enum class Provenance {
  Custom,
  RegularSet,   // I1 u I2 around a nonresonant y
  HalfPeakSet,  // I1 u I2 around j q_n + floor(q_n/2)
  PeakSet,      // J1 u J2 u J3 around j q_n
};

std::string to_string(Provenance p);

struct ThetaPoint {
  std::optional<std::int64_t> offset;  // theta_m = theta + m alpha when set
  int group = 0;                       // 1-based index of the sub-interval (I1, I2, J1, ...)
  Real residue;                        // theta_m mod 1
  Real cosv;                           // cos 2pi theta_m
};

/// Node set with pairwise separated cosines (|c_i - c_j| > 1e-30).
class ThetaSet {
 public:
  /// theta + m alpha for every (m, group), reduced exactly.
  static ThetaSet from_offsets(const ModelParams& params, std::span<const std::pair<std::int64_t, int>> offsets,
                               Provenance provenance);
  /// Raw phases in [0, 1).
  static ThetaSet custom(std::vector<Real> residues);

  const std::vector<ThetaPoint>& points() const { return points_; }
  size_t size() const { return points_.size(); }
  Provenance provenance() const { return provenance_; }
  ThetaKind theta_kind() const { return theta_; }

 private:
  ThetaSet(std::vector<ThetaPoint> pts, Provenance p, ThetaKind theta);
  std::vector<ThetaPoint> points_;
  Provenance provenance_ = Provenance::Custom;
  ThetaKind theta_ = ThetaKind::Zero;
};

/// Sub-interval length s q_{n-n0} bookkeeping shared by the constructions.
struct SetScale {
  int n0 = 0;
  long s = 0;
  long q_lower = 0;
};

/// I1 = [-2 s q', -1], I2 = [y - 2 s q', y + 2 s q' - 1] with (s, q') from
/// green::regularity_scale; |I1 u I2| - 1 = 6 s q' - 1.
ThetaSet regular_set(const ModelParams& params, Site y, int n);

/// n0 least with q_{n-n0} / eta <= (1/6 - 2 eta) q_n, s largest with
/// s q_{n-n0} <= (1/6 - 2 eta) q_n.
SetScale half_peak_scale(const cfrac::Frequency& f, int n, double eta);
/// I1 = [-2 s q', -1] and I2 centred on j q_n + floor(q_n/2) with half-width
/// (s + floor(eta s)) q'.
ThetaSet half_peak_set(const ModelParams& params, int n, long j, double eta,
                       std::optional<SetScale> scale = std::nullopt);

/// n0 least with q_{n-n0} / eta <= q_n/6 - 2, s largest with s q_{n-n0} <= q_n/6 - 2.
SetScale peak_scale(const cfrac::Frequency& f, int n, double eta);
/// J1 = [-2sq', -1], J2 = [jq_n - 3sq', jq_n - 2sq' - 1] u [jq_n + 2sq', jq_n + 3sq' - 1],
/// J3 = [jq_n - 2sq', jq_n + 2sq' - 1].
ThetaSet peak_set(const ModelParams& params, int n, long j, double eta,
                  std::optional<SetScale> scale = std::nullopt);

struct LaTerms {
  std::vector<Real> values;     // La_i
  std::vector<double> x_star;   // maximiser in [-1, 1]
  int grid_size = 0;            // Chebyshev points (endpoints added)
};

/// La_i = ln max_{x in [-1,1]} prod_{j != i} |x - c_j| / |c_i - c_j|.
LaTerms la_terms(const ThetaSet& ts);

/// Q_k(cos 2pi theta) = P_k(theta - (k-1) alpha / 2) at the nodes of ts with k = |ts| - 1.
std::vector<LogSigned> node_determinants(const ThetaSet& ts, const ModelParams& params);

/// Q_k at a raw phase theta.
LogSigned q_value(const ModelParams& params, const Real& theta, int k);

/// Lagrange form through (nodes[i], values[i]) evaluated at x.
Real lagrange_eval(std::span<const Real> nodes, std::span<const Real> values, const Real& x);

struct UniformityOptions {
  double slack = 1e-6;               // relative to k ln lambda
  std::optional<Real> log_lambda;    // replaces ln lambda in the bound when set
};

struct UniformityWitness {
  size_t index = 0;
  Real margin;                 // ln|Q_k(c_i)| - (k ln lambda - La_i - ln(k+1))
  std::vector<Real> margins;   // all indices
  LaTerms la;
};

class UniformityViolation : public Error {
 public:
  UniformityViolation(const std::string& what, std::vector<Real> margins)
      : Error(what), margins_(std::move(margins)) {}
  const std::vector<Real>& margins() const { return margins_; }

 private:
  std::vector<Real> margins_;
};

/// The index with the largest margin, provided it clears -slack k ln lambda.
UniformityWitness uniformity_witness(const ThetaSet& ts, const ModelParams& params,
                                     const UniformityOptions& opts = {});
UniformityWitness uniformity_witness(const ThetaSet& ts, const LaTerms& la, const ModelParams& params,
                                     const UniformityOptions& opts = {});

struct HermanResult {
  Real integral;        // trapezoid mean of ln|P_k| over [0, 1)
  double allowance = 0; // k * 1e-3
  bool pass = false;
  int flagged = 0;      // nodes found within 1e-25 of a zero of P_k
  bool shifted = false; // grid moved by half a step because of flagged nodes
};

/// Requires quad_points >= 16k.
HermanResult herman_check(const ModelParams& params, int k, int quad_points);
std::vector<HermanResult> herman_check_many(const ModelParams& params, std::span<const Real> energies, int k,
                                            int quad_points);

struct SinProduct {
  Real sum;          // sum over l != l0 of ln|sin pi(x + l alpha)|, l = 0..q_n-1
  Real centered;     // sum + (q_n - 1) ln 2
  long l0 = 0;       // excluded minimiser
  double c_empirical = 0;  // |centered| / ln q_n
};

/// Requires q_n >= 2.
SinProduct sin_product_bound(const Real& x, const cfrac::Frequency& f, int n);

/// (i, theta_residue, cos_value, La_i, x_star)
std::string la_csv(const ThetaSet& ts, const LaTerms& la);

}  // namespace amolab::interp
