#include "amolab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "amolab/detkernel.hpp"
#include "amolab/errors.hpp"

namespace amolab::spectral {

std::vector<Real> box_potential(const ModelParams& params, int N) {
  auto table = PotentialTable::sites(params, -N, N);
  return table.site_values(-N, N);
}

namespace {

long count_double(const std::vector<double>& v, double e) {
  long count = 0;
  double d = 1.0;
  for (size_t i = 0; i < v.size(); ++i) {
    d = (v[i] - e) - (i == 0 ? 0.0 : 1.0 / d);
    if (std::signbit(d)) ++count;
  }
  return count;
}

Real bisect_index(std::span<const Real> v, const std::vector<double>& vd, long m, double lo, double hi,
                  const Real& resolution) {
  double a = lo, b = hi;
  while (b - a > 1e-12 * std::max(1.0, std::fabs(a))) {
    double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (count_double(vd, mid) > m)
      b = mid;
    else
      a = mid;
  }
  // The double bracket can be off by roundoff; widen until the extended
  // counts confirm it.
  Real A(a), B(b);
  Real widen(1e-10);
  while (det::sturm_count_fast(v, A) > m) {
    A -= widen;
    widen *= 2L;
  }
  widen = Real(1e-10);
  while (det::sturm_count_fast(v, B) <= m) {
    B += widen;
    widen *= 2L;
  }
  Real mid;
  while (B - A > resolution) {
    mid = A;
    mid += B;
    mid.scale2(-1);
    if (!(mid > A && mid < B)) break;
    if (det::sturm_count_fast(v, mid) > m)
      B = mid;
    else
      A = mid;
  }
  mid = A;
  mid += B;
  mid.scale2(-1);
  return mid;
}

struct Pivots {
  std::vector<Real> d, e, gamma;
};

Pivots pivots(std::span<const Real> v, const Real& energy) {
  const size_t n = v.size();
  Pivots p{std::vector<Real>(n), std::vector<Real>(n), std::vector<Real>(n)};
  Real tiny = Real::epsilon();
  tiny *= tiny;
  Real inv;
  for (size_t i = 0; i < n; ++i) {
    mpfr_sub(p.d[i].raw(), v[i].raw(), energy.raw(), MPFR_RNDN);
    if (i > 0) {
      mpfr_ui_div(inv.raw(), 1, p.d[i - 1].raw(), MPFR_RNDN);
      p.d[i] -= inv;
    }
    if (p.d[i].is_zero()) p.d[i] = tiny;
  }
  for (size_t r = n; r-- > 0;) {
    mpfr_sub(p.e[r].raw(), v[r].raw(), energy.raw(), MPFR_RNDN);
    if (r + 1 < n) {
      mpfr_ui_div(inv.raw(), 1, p.e[r + 1].raw(), MPFR_RNDN);
      p.e[r] -= inv;
    }
    if (p.e[r].is_zero()) p.e[r] = tiny;
  }
  Real diag;
  for (size_t i = 0; i < n; ++i) {
    mpfr_sub(diag.raw(), v[i].raw(), energy.raw(), MPFR_RNDN);
    p.gamma[i] = p.d[i] + p.e[i] - diag;
  }
  return p;
}

// Vector with x(m) = 1 solving every row except m.
std::vector<Real> twisted_vector(const Pivots& p, size_t m) {
  const size_t n = p.d.size();
  std::vector<Real> x(n);
  x[m] = Real(1);
  for (size_t k = m; k-- > 0;) {
    x[k] = x[k + 1];
    x[k] /= p.d[k];
    x[k] = -x[k];
  }
  for (size_t k = m + 1; k < n; ++k) {
    x[k] = x[k - 1];
    x[k] /= p.e[k];
    x[k] = -x[k];
  }
  return x;
}

Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real s(0), t;
  for (size_t i = 0; i < a.size(); ++i) {
    mpfr_mul(t.raw(), a[i].raw(), b[i].raw(), MPFR_RNDN);
    s += t;
  }
  return s;
}

void scale_unit_l2(std::vector<Real>& x) {
  Real nrm = sqrt(dot(x, x));
  for (auto& xi : x) xi /= nrm;
}

EigenPair finish(std::vector<Real> x, Site lo, const Real& energy, long index) {
  size_t arg = 0;
  Real best(0);
  for (size_t i = 0; i < x.size(); ++i) {
    Real a = abs(x[i]);
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (x[arg].sign() < 0) best = -best;
  for (auto& xi : x) xi /= best;
  EigenPair out;
  out.energy = energy;
  out.vector = SiteVector{lo, std::move(x)};
  out.max_site = lo + static_cast<Site>(arg);
  out.index = index;
  return out;
}

std::vector<size_t> order_by_gamma(const Pivots& p) {
  std::vector<size_t> idx(p.gamma.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<Real> mag(p.gamma.size());
  for (size_t i = 0; i < mag.size(); ++i) mag[i] = abs(p.gamma[i]);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return mag[a] < mag[b]; });
  return idx;
}

}  // namespace

Real vector_resolution(std::span<const Real> v) {
  Real scale(2);
  for (const auto& x : v) scale = fmax(scale, abs(x) + Real(2));
  scale.scale2(3 - static_cast<long>(Real::default_precision()));
  return fmin(scale, Real(kDefaultResolution));
}

std::vector<Real> eigenvalues_by_index(std::span<const Real> v, long first, long last, const Real& resolution) {
  std::vector<double> vd(v.size());
  double lo = 0, hi = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    vd[i] = v[i].to_double();
    lo = std::min(lo, vd[i]);
    hi = std::max(hi, vd[i]);
  }
  lo -= 3.0;
  hi += 3.0;
  std::vector<Real> out;
  for (long m = first; m < last; ++m) out.push_back(bisect_index(v, vd, m, lo, hi, resolution));
  return out;
}

std::vector<Real> spectrum_sample(const ModelParams& params, int N, const Real& resolution) {
  if (N < 1) throw PreconditionError("spectrum_sample: N must be >= 1");
  auto v = box_potential(params, N);
  return eigenvalues_by_index(v, 0, static_cast<long>(v.size()), resolution);
}

Real residual(std::span<const Real> v, const EigenPair& pair) {
  const auto& x = pair.vector.values;
  const size_t n = x.size();
  Real worst(0), r;
  for (size_t i = 0; i < n; ++i) {
    r = v[i] - pair.energy;
    r *= x[i];
    if (i > 0) r += x[i - 1];
    if (i + 1 < n) r += x[i + 1];
    worst = fmax(worst, abs(r));
  }
  return worst;
}

std::vector<EigenPair> eigenvectors(std::span<const Real> v, Site lo, std::span<const Real> energies,
                                    long first_index) {
  std::vector<EigenPair> out;
  // Members of a near group are orthogonalised against each other. Each is
  // built at its own energy; when two energies agree to working precision
  // the twist site has to differ.
  const Real near_gap("1e-24");
  const Real tol("1e-20");
  size_t i = 0;
  while (i < energies.size()) {
    size_t j = i + 1;
    while (j < energies.size() && abs(energies[j] - energies[j - 1]) <= near_gap) ++j;
    std::vector<std::vector<Real>> basis;
    for (size_t c = i; c < j; ++c) {
      auto p = pivots(v, energies[c]);
      auto order = order_by_gamma(p);
      // Among the sites with the smallest |gamma| keep the candidate that
      // adds the most after orthogonalisation.
      bool done = false;
      Real best_left(0);
      std::vector<Real> best;
      const size_t tries = basis.empty() ? 4 : 32;
      for (size_t o = 0; o < order.size() && o < tries; ++o) {
        auto x = twisted_vector(p, order[o]);
        scale_unit_l2(x);
        for (const auto& b : basis) {
          Real proj = dot(x, b);
          for (size_t r = 0; r < x.size(); ++r) x[r] -= proj * b[r];
        }
        Real left = sqrt(dot(x, x));
        if (left < Real(1e-3) || left <= best_left) continue;
        for (auto& xr : x) xr /= left;
        auto pair = finish(x, lo, energies[c], 0);
        if (residual(v, pair) > tol) continue;
        best_left = left;
        best = std::move(x);
        if (basis.empty() || left > Real(0.9)) break;
      }
      if (!best.empty()) {
        out.push_back(finish(best, lo, energies[c], first_index + static_cast<long>(c)));
        basis.push_back(std::move(best));
        done = true;
      }
      if (!done) throw ConvergenceError("eigenvector at E = " + energies[c].str(30) + " could not be resolved");
    }
    i = j;
  }
  return out;
}

std::vector<EigenPair> eigen_solve_indices(const ModelParams& params, int N, long first, long last) {
  if (N < 5) throw PreconditionError("eigen_solve: N must be >= 5");
  auto v = box_potential(params, N);
  first = std::max(first, 0L);
  last = std::min(last, static_cast<long>(v.size()));
  if (last <= first) return {};
  auto energies = eigenvalues_by_index(v, first, last, vector_resolution(v));
  return eigenvectors(v, -N, energies, first);
}

std::vector<EigenPair> eigen_solve(const ModelParams& params, int N, const Real& lo, const Real& hi) {
  if (N < 5) throw PreconditionError("eigen_solve: N must be >= 5");
  Real bound = Real(2) + Real(2) * abs(params.lambda);
  if (lo < -bound || hi > bound) throw PreconditionError("eigen_solve: window must lie in [-2-2lambda, 2+2lambda]");
  if (!(lo <= hi)) throw PreconditionError("eigen_solve: empty window");
  auto v = box_potential(params, N);
  long first = det::sturm_count_fast(v, lo);
  long last = det::sturm_count_fast(v, hi);
  if (last <= first) return {};
  auto energies = eigenvalues_by_index(v, first, last, vector_resolution(v));
  return eigenvectors(v, -N, energies, first);
}

const Peak* DecayProfile::find(int ell_times_2) const {
  for (const auto& p : peaks)
    if (p.ell_times_2 == ell_times_2) return &p;
  return nullptr;
}

DecayProfile decay_profile(const SiteVector& phi, const cfrac::Frequency& f, int n, double eta,
                           std::optional<int> L) {
  if (n < 0 || n > f.depth()) throw PreconditionError("decay_profile: level out of range");
  const Site N = std::min(-phi.lo, phi.hi());
  const mpz_class& qz = f.q(n);
  if (qz > 2 * N) throw PreconditionError("decay_profile: level too deep for box");
  DecayProfile out;
  out.level = n;
  out.q = qz.get_si();
  out.eta = eta;
  out.radius = static_cast<long>(std::floor(10.0 * eta * static_cast<double>(out.q)));
  if (L) {
    out.L = *L;
  } else {
    out.L = static_cast<int>(N / out.q) - 1;
  }
  if (out.L < 0 || (out.L + 1) * out.q > N)
    throw PreconditionError("decay_profile: box radius must be at least (L+1) q_n");
  const long half = out.q / 2;
  for (int l2 = -2 * out.L; l2 <= 2 * out.L; ++l2) {
    Peak p;
    p.ell_times_2 = l2;
    long j = (l2 >= 0 ? l2 : l2 - 1) / 2;  // floor(l2 / 2)
    p.center = (l2 % 2 == 0) ? static_cast<Site>(l2 / 2) * out.q : static_cast<Site>(j) * out.q + half;
    p.r = Real(0);
    for (Site x = p.center - out.radius; x <= p.center + out.radius; ++x) {
      if (!phi.contains(x)) {
        p.clipped = true;
        continue;
      }
      p.r = fmax(p.r, abs(phi.at(x)));
    }
    out.peaks.push_back(std::move(p));
  }
  return out;
}

DecayProfile decay_profile(const EigenPair& pair, const cfrac::Frequency& f, int n, double eta,
                           std::optional<int> L) {
  return decay_profile(pair.vector, f, n, eta, L);
}

HalfPeakReport half_peak_check(const DecayProfile& profile, const Real& lambda, const Real& beta,
                               double c_allowed) {
  HalfPeakReport rep;
  const double ll = log(lambda).to_double();
  const double b = beta.to_double();
  const double q = static_cast<double>(profile.q);
  for (int j = -profile.L; j < profile.L; ++j) {
    const Peak* mid = profile.find(2 * j + 1);
    const Peak* a = profile.find(2 * j);
    const Peak* c = profile.find(2 * j + 2);
    if (!mid || !a || !c) continue;
    HalfPeakRow row;
    row.j = j;
    row.target = -0.5 * (ll - 2 * b);
    Real big = fmax(a->r, c->r);
    if (mid->r.is_zero()) {
      row.underflow = true;
      row.pass = true;
      row.ratio = -INFINITY;
      row.c_needed = 0;
    } else {
      row.ratio = (log(mid->r) - log(big)).to_double() / q;
      row.c_needed = (2 * row.ratio + ll - 2 * b) / profile.eta;
      row.pass = row.c_needed <= c_allowed;
    }
    rep.c_max = std::max(rep.c_max, row.c_needed);
    rep.all_pass = rep.all_pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

double peak_rhs(double abs_ell, double q, double ll, double b) {
  return -(ll - 3 * b) * abs_ell * q + std::log((2 * abs_ell + 2) * q);
}

}  // namespace

PeakBoundReport peak_bound_check(const DecayProfile& profile, const Real& lambda, const Real& beta) {
  PeakBoundReport rep;
  const double ll = log(lambda).to_double();
  const double b = beta.to_double();
  const double q = static_cast<double>(profile.q);
  for (const auto& p : profile.peaks) {
    if (p.ell_times_2 % 2 != 0 || p.ell_times_2 == 0) continue;
    PeakBoundRow row;
    row.ell = p.ell_times_2 / 2;
    row.log_r = p.r.is_zero() ? -INFINITY : log(p.r).to_double();
    row.rhs = peak_rhs(std::abs(row.ell), q, ll, b);
    row.c_needed = (row.log_r - row.rhs) / (profile.eta * q);
    rep.c_meas = std::max(rep.c_meas, row.c_needed);
    rep.rows.push_back(row);
  }
  return rep;
}

bool is_localized(const EigenPair& pair) {
  const Site N = std::min(-pair.vector.lo, pair.vector.hi());
  if (std::fabs(static_cast<double>(pair.max_site)) > 0.2 * static_cast<double>(N)) return false;
  Real edge = fmax(abs(pair.vector.at(-N)), abs(pair.vector.at(N)));
  Real sup = pair.vector.sup_norm();
  return edge <= Real(1e-6) * sup;
}

DecayFit decay_fit(const EigenPair& pair, const cfrac::Frequency& f, const Real& lambda) {
  if (!is_localized(pair)) throw NotLocalized("not localized; decay fit meaningless");
  const auto& phi = pair.vector;
  const Site N = std::min(-phi.lo, phi.hi());
  DecayFit fit;
  fit.N = static_cast<int>(N);
  fit.max_site = pair.max_site;
  auto e_at = [&](Site a, Site b, Site k) -> double {
    Real s = phi.at(a) * phi.at(a);
    s += phi.at(b) * phi.at(b);
    if (s.is_zero()) return -INFINITY;
    return log(s).to_double() / (2.0 * static_cast<double>(k));
  };
  fit.e.reserve(static_cast<size_t>(N));
  for (Site k = 1; k <= N; ++k) fit.e.push_back(std::max(e_at(k, k - 1, k), e_at(-k, -k + 1, k)));
  for (long j = 0; (N >> (j + 1)) >= 1; ++j) {
    DecayWindow w{std::max<long>(1, N >> (j + 1)), N >> j, -INFINITY};
    for (long k = w.k_lo; k <= w.k_hi; ++k) w.envelope = std::max(w.envelope, fit.e[static_cast<size_t>(k - 1)]);
    fit.windows.push_back(w);
  }
  fit.tail = fit.windows.empty() ? fit.e.back() : fit.windows.front().envelope;
  fit.beta_est = cfrac::beta_estimate(f).tail().to_double();
  fit.target = -(log(lambda).to_double() - 3 * fit.beta_est);
  return fit;
}

std::string profile_csv(const DecayProfile& profile, const Real& lambda, const Real& beta) {
  std::ostringstream os;
  os << "ell_times_2,site_center,r_value,log_r,bound_rhs\n";
  const double ll = log(lambda).to_double();
  const double b = beta.to_double();
  for (const auto& p : profile.peaks) {
    double abs_ell = std::fabs(p.ell_times_2 / 2.0);
    os << p.ell_times_2 << ',' << p.center << ',' << p.r.str() << ','
       << (p.r.is_zero() ? std::string("-inf") : log(p.r).str()) << ','
       << nlohmann::json(peak_rhs(abs_ell, static_cast<double>(profile.q), ll, b)).dump() << '\n';
  }
  return os.str();
}

std::string fit_json(const DecayFit& fit) {
  nlohmann::json j;
  j["N"] = fit.N;
  j["max_site"] = fit.max_site;
  j["tail"] = fit.tail;
  j["beta_est"] = fit.beta_est;
  j["target"] = fit.target;
  j["window_rule"] = "dyadic [N/2^(j+1), N/2^j], tail = j = 0";
  auto& w = j["windows"] = nlohmann::json::array();
  for (const auto& x : fit.windows) w.push_back({{"k_lo", x.k_lo}, {"k_hi", x.k_hi}, {"envelope", x.envelope}});
  j["envelope"] = fit.e;
  return j.dump();
}

}  // namespace amolab::spectral
