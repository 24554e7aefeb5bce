#pragma once

// Finite-volume eigenpairs of H on [-N, N] and the decay quantities built
// on them.

#include <optional>
#include <string>
#include <vector>

#include "amolab/cfrac.hpp"
#include "amolab/model.hpp"

namespace amolab::spectral {

struct EigenPair {
  Real energy;
  /// Values on [-N, N], scaled so the largest |entry| is 1 and positive.
  SiteVector vector;
  Site max_site = 0;
  long index = 0;  // position in the ascending spectrum of the box
};

/// Eigenvalues are bisected until the bracket is narrower than this.
inline const char* const kDefaultResolution = "1e-25";

/// The (2N+1) diagonal entries v(-N)..v(N).
std::vector<Real> box_potential(const ModelParams& params, int N);

/// Eigenvalues with index in [first, last) of the tridiagonal diag(v),
/// off-diagonals 1, each bracketed to width `resolution`.
std::vector<Real> eigenvalues_by_index(std::span<const Real> v, long first, long last, const Real& resolution);

/// Bisection width used before eigenvectors are built: a few ulps of the
/// potential scale at the working precision, and never above kDefaultResolution.
Real vector_resolution(std::span<const Real> v);

/// All 2N+1 eigenvalues of the box, ascending.
std::vector<Real> spectrum_sample(const ModelParams& params, int N, const Real& resolution = Real(kDefaultResolution));

/// Eigenvectors for eigenvalues (ascending, possibly clustered) of diag(v).
/// Clusters closer than the working precision resolves get orthogonalised
/// vectors built at distinct twist sites.
std::vector<EigenPair> eigenvectors(std::span<const Real> v, Site lo, std::span<const Real> energies, long first_index);

/// Eigenpairs with energy in [lo, hi). Requires N >= 5 and the window inside
/// [-2-2 lambda, 2+2 lambda].
std::vector<EigenPair> eigen_solve(const ModelParams& params, int N, const Real& lo, const Real& hi);
/// Eigenpairs by index range [first, last).
std::vector<EigenPair> eigen_solve_indices(const ModelParams& params, int N, long first, long last);

/// max over interior rows of |(H - E) phi|.
Real residual(std::span<const Real> v, const EigenPair& pair);

struct Peak {
  int ell_times_2 = 0;
  Site center = 0;
  Real r;            // max |phi| over the window
  bool clipped = false;
};

struct DecayProfile {
  int level = 0;
  long q = 0;
  double eta = 0;
  long radius = 0;  // floor(10 eta q_n)
  int L = 0;
  std::vector<Peak> peaks;  // ell_times_2 from -2L to 2L

  const Peak* find(int ell_times_2) const;
};

/// r_l = max |phi| over |x - l q_n| <= 10 eta q_n and r_{l+1/2} around
/// l q_n + floor(q_n/2), for |l| <= L. L defaults to the largest value with
/// (L+1) q_n <= N.
DecayProfile decay_profile(const EigenPair& pair, const cfrac::Frequency& f, int n, double eta,
                           std::optional<int> L = std::nullopt);

/// Profile of an arbitrary vector (used for negative controls).
DecayProfile decay_profile(const SiteVector& phi, const cfrac::Frequency& f, int n, double eta,
                           std::optional<int> L = std::nullopt);

struct HalfPeakRow {
  int j = 0;
  double ratio = 0;       // ln(r_{j+1/2} / max(r_j, r_{j+1})) / q_n
  double target = 0;      // -(ln lambda - 2 beta) / 2
  double c_needed = 0;    // smallest C with ratio <= -(ln lambda - 2 beta - C eta) / 2
  bool underflow = false;
  bool pass = false;
};

struct HalfPeakReport {
  std::vector<HalfPeakRow> rows;
  double c_max = 0;
  bool all_pass = true;
};

/// Rows pass when c_needed <= c_allowed.
HalfPeakReport half_peak_check(const DecayProfile& profile, const Real& lambda, const Real& beta,
                               double c_allowed = 50);

struct PeakBoundRow {
  int ell = 0;
  double log_r = 0;
  double rhs = 0;        // -(ln lambda - 3 beta)|l| q_n + ln((2|l|+2) q_n)
  double c_needed = 0;   // (log_r - rhs) / (eta q_n)
};

struct PeakBoundReport {
  std::vector<PeakBoundRow> rows;  // l != 0
  double c_meas = 0;               // max(0, max c_needed)
};

PeakBoundReport peak_bound_check(const DecayProfile& profile, const Real& lambda, const Real& beta);

struct DecayWindow {
  long k_lo = 0;
  long k_hi = 0;
  double envelope = 0;  // max of e(k) over the window
};

struct DecayFit {
  int N = 0;
  Site max_site = 0;
  std::vector<double> e;        // e[k-1] = max over both signs of e(+-k), k = 1..N
  std::vector<DecayWindow> windows;  // dyadic windows [N/2^{j+1}, N/2^j]
  double tail = 0;              // envelope over [N/2, N]
  double beta_est = 0;
  double target = 0;            // -(ln lambda - 3 beta_est)

  bool within(double slack) const { return tail <= target + slack; }
};

/// Localised means the peak lies within the central 20% of the box and the
/// box-edge entries are at most 1e-6.
bool is_localized(const EigenPair& pair);

/// e(k) = ln(phi(k)^2 + phi(k-1)^2) / (2|k|) (mirrored for k < 0).
/// Throws NotLocalized for vectors failing is_localized.
DecayFit decay_fit(const EigenPair& pair, const cfrac::Frequency& f, const Real& lambda);

std::string profile_csv(const DecayProfile& profile, const Real& lambda, const Real& beta);
std::string fit_json(const DecayFit& fit);

}  // namespace amolab::spectral
