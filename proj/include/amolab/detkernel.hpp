#pragma once

// Determinants P_k(theta) = det R_[0,k-1] (H - E) R_[0,k-1] and the
// quantities built from the same three-term recursion: Sturm counts,
// transfer-matrix Lyapunov exponents, theta sweeps.

#include <span>
#include <vector>

#include "amolab/logsigned.hpp"
#include "amolab/model.hpp"
#include "amolab/real.hpp"

namespace amolab::det {

/// Values are rescaled by a power of two whenever |P| leaves [2^-43, 2^43]
/// (roughly [e^-30, e^30]).
inline constexpr long kRescaleBits = 43;

/// mant * 2^exp2.
struct Scaled {
  Real mant;
  long exp2 = 0;

  LogSigned log() const { return LogSigned::from_scaled(mant, exp2); }
  /// mant * 2^(exp2 - ref) as a double.
  double relative_to(long ref) const;
};

/// P_0..P_K for the diagonal v_j - E, j = 0..K-1 (off-diagonals 1).
std::vector<Scaled> recursion(std::span<const Real> v, const Real& energy);
/// P_K only; no per-step storage.
LogSigned final_det(std::span<const Real> v, const Real& energy);

struct DetSequence {
  Site x1 = 0;
  std::vector<Scaled> raw;  // P_0..P_K

  int K() const { return static_cast<int>(raw.size()) - 1; }
  LogSigned value(int k) const { return raw.at(static_cast<size_t>(k)).log(); }
  std::vector<LogSigned> values() const;
};

/// P_k(theta + x1 alpha) for k = 0..K: the determinants over sites x1..x1+k-1.
DetSequence det_sequence(const ModelParams& params, Site x1, int K);
DetSequence det_sequence(const PotentialTable& table, const Real& energy, Site x1, int K);

/// ln|P_k| at a real phase theta (sites theta + j alpha, j < k).
LogSigned logdet_at_theta(const ModelParams& params, const Real& theta, int k);

/// Potentials 2 lambda cos 2pi(theta + frac(j alpha)), j = 0..k-1.
std::vector<Real> potentials_at_theta(const Real& lambda, const Real& theta, std::span<const Real> alpha_fracs);
std::vector<Real> alpha_fracs(const cfrac::Frequency& f, int k);

/// P_k at theta_i = (i + offset) / M for every energy; result[e][i].
std::vector<std::vector<LogSigned>> theta_sweep(const ModelParams& params, std::span<const Real> energies, int k,
                                                int M, double offset = 0.0);

struct EvennessReport {
  Real max_residual;  // max | ln|P_k(theta)| - ln|P_k(-theta-(k-1)alpha)| |
  bool signs_agree = true;
  int samples = 0;
};

/// P_k is even in theta + (k-1) alpha / 2; compares P_k(theta) against
/// P_k(-theta - (k-1) alpha) at `theta_samples` deterministic phases.
EvennessReport evenness_check(const ModelParams& params, int k, int theta_samples);

struct SturmCount {
  long count = 0;     // eigenvalues strictly below E
  bool boundary = false;  // E within working precision of an eigenvalue: perturb E
};

/// Pivot-sign count for the tridiagonal matrix diag(v), off-diagonals 1.
long sturm_count_fast(std::span<const Real> v, const Real& energy);
SturmCount sturm_count(std::span<const Real> v, const Real& energy);
/// Count for the (2N+1)-site restriction to [-N, N].
SturmCount sturm_count(const ModelParams& params, int N, const Real& energy);

/// gamma_k = 1 / [(H - E)^{-1}]_{kk} for every k from forward and backward pivots.
std::vector<Real> twisted_gammas(std::span<const Real> v, const Real& energy);

struct LyapunovResult {
  double estimate = 0;            // (1/N) ln ||T_N ... T_1||
  double last_quarter_mean = 0;   // mean running estimate over the last N/4 steps
  std::vector<double> running;    // running estimate after each step
  double max_det_deviation = 0;   // max |det(product) - 1| from the tracked log scales
};

/// Transfer matrices [[E - v(n), -1], [1, 0]], n = 0..N-1, multiplied with
/// QR renormalisation at every step. Requires lambda > 1 and N >= 1000.
LyapunovResult lyapunov(const ModelParams& params, long N);

struct SupLogdet {
  Real value;          // max over the refined grid of (1/k) ln|P_k(theta)|
  Real coarse_value;   // same on the grid of `grid_size` points
  Real argmax_theta;
  double refinement_change = 0;
};

/// sup over a uniform theta grid of (1/k) ln|P_k(theta)|, on `grid_size`
/// points and on the doubled grid. Requires grid_size >= 4k.
SupLogdet sup_logdet(const ModelParams& params, int k, int grid_size);
std::vector<SupLogdet> sup_logdet_many(const ModelParams& params, std::span<const Real> energies, int k,
                                       int grid_size);

}  // namespace amolab::det
