#include "amolab/detkernel.hpp"

#include <algorithm>
#include <cmath>

#include "amolab/errors.hpp"

namespace amolab::det {

double Scaled::relative_to(long ref) const {
  long e = 0;
  double m = mpfr_get_d_2exp(&e, mant.raw(), MPFR_RNDN);
  return std::ldexp(m, static_cast<int>(std::clamp(e + exp2 - ref, -2000L, 2000L)));
}

namespace {

// Keeps (prev, cur) inside [2^-43, 2^43] by a common power of two.
// Returns the shift applied (values were multiplied by 2^-shift).
inline long renormalize(Real& prev, Real& cur) {
  long ec = cur.exponent2();
  long ep = prev.exponent2();
  if (ec > kRescaleBits || ep > kRescaleBits) {
    long s = std::max(ec, ep);
    cur.scale2(-s);
    prev.scale2(-s);
    return s;
  }
  bool small_c = cur.is_zero() || ec < -kRescaleBits;
  bool small_p = prev.is_zero() || ep < -kRescaleBits;
  if (small_c && small_p && !(cur.is_zero() && prev.is_zero())) {
    long s = cur.is_zero() ? ep : prev.is_zero() ? ec : std::max(ec, ep);
    cur.scale2(-s);
    prev.scale2(-s);
    return s;
  }
  return 0;
}

// One step: next = (v - E) cur - prev, then rotate.
inline void step(Real& prev, Real& cur, Real& tmp, const Real& v, const Real& energy) {
  mpfr_sub(tmp.raw(), v.raw(), energy.raw(), MPFR_RNDN);
  mpfr_fms(tmp.raw(), tmp.raw(), cur.raw(), prev.raw(), MPFR_RNDN);
  prev.swap(cur);
  cur.swap(tmp);
}

}  // namespace

std::vector<Scaled> recursion(std::span<const Real> v, const Real& energy) {
  std::vector<Scaled> out;
  out.reserve(v.size() + 1);
  Real prev(0), cur(1), tmp;
  long scale = 0;
  out.push_back({cur, 0});
  for (const auto& vj : v) {
    step(prev, cur, tmp, vj, energy);
    scale += renormalize(prev, cur);
    out.push_back({cur, scale});
  }
  return out;
}

LogSigned final_det(std::span<const Real> v, const Real& energy) {
  Real prev(0), cur(1), tmp;
  long scale = 0;
  for (const auto& vj : v) {
    step(prev, cur, tmp, vj, energy);
    scale += renormalize(prev, cur);
  }
  return LogSigned::from_scaled(cur, scale);
}

std::vector<LogSigned> DetSequence::values() const {
  std::vector<LogSigned> out;
  out.reserve(raw.size());
  for (const auto& s : raw) out.push_back(s.log());
  return out;
}

DetSequence det_sequence(const PotentialTable& table, const Real& energy, Site x1, int K) {
  if (K < 1) throw PreconditionError("det_sequence: K must be >= 1");
  auto v = table.run(2 * x1, K);
  return DetSequence{x1, recursion(v, energy)};
}

DetSequence det_sequence(const ModelParams& params, Site x1, int K) {
  if (K < 1) throw PreconditionError("det_sequence: K must be >= 1");
  auto table = PotentialTable::sites(params, x1, x1 + K - 1);
  return det_sequence(table, params.energy, x1, K);
}

std::vector<Real> alpha_fracs(const cfrac::Frequency& f, int k) {
  std::vector<Real> out;
  out.reserve(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) out.push_back(alpha_multiple_frac(f, j));
  return out;
}

std::vector<Real> potentials_at_theta(const Real& lambda, const Real& theta, std::span<const Real> fracs) {
  std::vector<Real> v;
  v.reserve(fracs.size());
  Real two_lambda = lambda;
  two_lambda *= 2L;
  Real arg;
  for (const auto& fj : fracs) {
    arg = theta;
    arg += fj;
    arg *= 2L;
    Real c = cos_pi(arg);
    c *= two_lambda;
    v.push_back(std::move(c));
  }
  return v;
}

LogSigned logdet_at_theta(const ModelParams& params, const Real& theta, int k) {
  auto fr = alpha_fracs(*params.freq, k);
  auto v = potentials_at_theta(params.lambda, theta, fr);
  return final_det(v, params.energy);
}

std::vector<std::vector<LogSigned>> theta_sweep(const ModelParams& params, std::span<const Real> energies, int k,
                                                int M, double offset) {
  if (k < 1 || M < 1) throw PreconditionError("theta_sweep: k and M must be positive");
  auto fr = alpha_fracs(*params.freq, k);
  std::vector<std::vector<LogSigned>> out(energies.size(), std::vector<LogSigned>(static_cast<size_t>(M)));
  for (int i = 0; i < M; ++i) {
    Real theta = (Real(i) + Real(offset)) / Real(M);
    auto v = potentials_at_theta(params.lambda, theta, fr);
    for (size_t e = 0; e < energies.size(); ++e) out[e][static_cast<size_t>(i)] = final_det(v, energies[e]);
  }
  return out;
}

EvennessReport evenness_check(const ModelParams& params, int k, int theta_samples) {
  if (k < 1) throw PreconditionError("evenness_check: k must be >= 1");
  if (theta_samples < 1) throw PreconditionError("evenness_check: need at least one sample");
  const auto& f = *params.freq;
  auto fr = alpha_fracs(f, k);
  Real shift = alpha_multiple_frac(f, k - 1);
  EvennessReport rep;
  rep.max_residual = Real(0);
  // Deterministic low-discrepancy phases.
  const Real golden = (sqrt(Real(5)) - Real(1)) / Real(2);
  for (int s = 0; s < theta_samples; ++s) {
    Real theta = Real(s) * golden + Real(0.1234567);
    theta -= floor(theta);
    Real mirrored = -theta;
    mirrored -= shift;
    auto a = final_det(potentials_at_theta(params.lambda, theta, fr), params.energy);
    auto b = final_det(potentials_at_theta(params.lambda, mirrored, fr), params.energy);
    if (a.sign != b.sign) rep.signs_agree = false;
    if (!a.is_zero() && !b.is_zero()) rep.max_residual = fmax(rep.max_residual, abs(a.logmag - b.logmag));
    ++rep.samples;
  }
  return rep;
}

long sturm_count_fast(std::span<const Real> v, const Real& energy) {
  long count = 0;
  Real d(1), inv;
  bool first = true;
  for (const auto& vj : v) {
    if (first) {
      mpfr_sub(d.raw(), vj.raw(), energy.raw(), MPFR_RNDN);
      first = false;
    } else {
      // d <- (v - E) - 1/d; 1/(+-0) = +-inf keeps the count correct.
      mpfr_ui_div(inv.raw(), 1, d.raw(), MPFR_RNDN);
      mpfr_sub(d.raw(), vj.raw(), energy.raw(), MPFR_RNDN);
      mpfr_sub(d.raw(), d.raw(), inv.raw(), MPFR_RNDN);
    }
    if (mpfr_sgn(d.raw()) < 0) ++count;
  }
  return count;
}

std::vector<Real> twisted_gammas(std::span<const Real> v, const Real& energy) {
  const size_t n = v.size();
  std::vector<Real> d(n), e(n), g(n);
  Real inv;
  for (size_t i = 0; i < n; ++i) {
    mpfr_sub(d[i].raw(), v[i].raw(), energy.raw(), MPFR_RNDN);
    if (i > 0) {
      mpfr_ui_div(inv.raw(), 1, d[i - 1].raw(), MPFR_RNDN);
      d[i] -= inv;
    }
  }
  for (size_t r = n; r-- > 0;) {
    mpfr_sub(e[r].raw(), v[r].raw(), energy.raw(), MPFR_RNDN);
    if (r + 1 < n) {
      mpfr_ui_div(inv.raw(), 1, e[r + 1].raw(), MPFR_RNDN);
      e[r] -= inv;
    }
  }
  Real diag;
  for (size_t i = 0; i < n; ++i) {
    mpfr_sub(diag.raw(), v[i].raw(), energy.raw(), MPFR_RNDN);
    g[i] = d[i];
    g[i] += e[i];
    g[i] -= diag;
  }
  return g;
}

SturmCount sturm_count(std::span<const Real> v, const Real& energy) {
  SturmCount out;
  out.count = sturm_count_fast(v, energy);
  Real scale(2);
  for (const auto& vj : v) scale = fmax(scale, abs(vj - energy) + Real(2));
  Real tol = scale;
  tol.scale2(-(static_cast<long>(Real::default_precision()) - 10));
  tol *= static_cast<long>(v.size());
  for (const auto& g : twisted_gammas(v, energy)) {
    if (!g.is_finite() || abs(g) <= tol) {
      out.boundary = true;
      break;
    }
  }
  return out;
}

SturmCount sturm_count(const ModelParams& params, int N, const Real& energy) {
  if (N < 1) throw PreconditionError("sturm_count: N must be >= 1");
  auto table = PotentialTable::sites(params, -N, N);
  auto v = table.site_values(-N, N);
  return sturm_count(v, energy);
}

LyapunovResult lyapunov(const ModelParams& params, long N) {
  if (!(params.lambda > Real(1))) throw PreconditionError("lyapunov: lambda must exceed 1");
  if (N < 1000) throw PreconditionError("lyapunov: N must be >= 1000");
  auto table = PotentialTable::sites(params, 0, N - 1);
  LyapunovResult res;
  res.running.reserve(static_cast<size_t>(N));
  // Orthonormal frame columns (a, c), (b, d); products T_n ... T_0 = Q R.
  Real a(1), b(0), c(0), d(1);
  Real l1(0), l2(0), diag, na, nc, r11, r22, proj, t;
  int q_sign = 1;
  for (long n = 0; n < N; ++n) {
    mpfr_sub(diag.raw(), params.energy.raw(), table.at_site(n).raw(), MPFR_RNDN);
    // [[diag, -1], [1, 0]] applied to each column: (x, y) -> (diag x - y, x).
    mpfr_fms(na.raw(), diag.raw(), a.raw(), c.raw(), MPFR_RNDN);
    nc = a;
    a.swap(na);
    c.swap(nc);
    mpfr_fms(na.raw(), diag.raw(), b.raw(), d.raw(), MPFR_RNDN);
    nc = b;
    b.swap(na);
    d.swap(nc);
    // Gram-Schmidt.
    mpfr_hypot(r11.raw(), a.raw(), c.raw(), MPFR_RNDN);
    a /= r11;
    c /= r11;
    mpfr_mul(proj.raw(), a.raw(), b.raw(), MPFR_RNDN);
    mpfr_fma(proj.raw(), c.raw(), d.raw(), proj.raw(), MPFR_RNDN);
    t = proj;
    t *= a;
    b -= t;
    t = proj;
    t *= c;
    d -= t;
    mpfr_hypot(r22.raw(), b.raw(), d.raw(), MPFR_RNDN);
    b /= r22;
    d /= r22;
    l1 += log(r11);
    l2 += log(r22);
    // det Q = a d - b c = +-1.
    Real detq = a * d - b * c;
    q_sign = detq.sign() >= 0 ? 1 : -1;
    Real dev = exp(l1 + l2);
    if (q_sign < 0) dev = -dev;
    dev -= Real(1);
    res.max_det_deviation = std::max(res.max_det_deviation, std::fabs(dev.to_double()));
    res.running.push_back((l1 / Real(n + 1)).to_double());
  }
  res.estimate = res.running.back();
  size_t from = res.running.size() - res.running.size() / 4;
  double acc = 0;
  for (size_t i = from; i < res.running.size(); ++i) acc += res.running[i];
  res.last_quarter_mean = acc / static_cast<double>(res.running.size() - from);
  return res;
}

std::vector<SupLogdet> sup_logdet_many(const ModelParams& params, std::span<const Real> energies, int k,
                                       int grid_size) {
  if (k < 1) throw PreconditionError("sup_logdet: k must be >= 1");
  if (grid_size < 4 * k) throw PreconditionError("sup_logdet: grid_size must be >= 4k");
  auto coarse = theta_sweep(params, energies, k, grid_size, 0.0);
  auto mid = theta_sweep(params, energies, k, grid_size, 0.5);
  std::vector<SupLogdet> out;
  out.reserve(energies.size());
  for (size_t e = 0; e < energies.size(); ++e) {
    SupLogdet s;
    s.coarse_value = Real::infinity(-1);
    s.value = Real::infinity(-1);
    s.argmax_theta = Real(0);
    for (int i = 0; i < grid_size; ++i) {
      const auto& c = coarse[e][static_cast<size_t>(i)];
      if (c.logmag > s.coarse_value) s.coarse_value = c.logmag;
      if (c.logmag > s.value) {
        s.value = c.logmag;
        s.argmax_theta = Real(i) / Real(grid_size);
      }
      const auto& m = mid[e][static_cast<size_t>(i)];
      if (m.logmag > s.value) {
        s.value = m.logmag;
        s.argmax_theta = (Real(i) + Real(0.5)) / Real(grid_size);
      }
    }
    s.coarse_value /= static_cast<long>(k);
    s.value /= static_cast<long>(k);
    s.refinement_change = (s.value - s.coarse_value).to_double();
    out.push_back(std::move(s));
  }
  return out;
}

SupLogdet sup_logdet(const ModelParams& params, int k, int grid_size) {
  std::vector<Real> e{params.energy};
  return std::move(sup_logdet_many(params, e, k, grid_size).front());
}

}  // namespace amolab::det
