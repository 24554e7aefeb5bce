#include "amolab/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "amolab/detkernel.hpp"
#include "amolab/green.hpp"

namespace amolab::interp {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Custom: return "custom";
    case Provenance::RegularSet: return "regular";
    case Provenance::HalfPeakSet: return "half_peak";
    case Provenance::PeakSet: return "peak";
  }
  return "?";
}

ThetaSet::ThetaSet(std::vector<ThetaPoint> pts, Provenance p, ThetaKind theta)
    : points_(std::move(pts)), provenance_(p), theta_(theta) {
  const Real sep("1e-30");
  for (size_t i = 0; i < points_.size(); ++i)
    for (size_t j = i + 1; j < points_.size(); ++j) {
      if (abs(points_[i].cosv - points_[j].cosv) <= sep) {
        auto name = [&](size_t a) {
          return points_[a].offset ? "m=" + std::to_string(*points_[a].offset) : "#" + std::to_string(a);
        };
        throw PreconditionError("ThetaSet: cos values of " + name(i) + " and " + name(j) + " coincide");
      }
    }
}

ThetaSet ThetaSet::from_offsets(const ModelParams& params, std::span<const std::pair<std::int64_t, int>> offsets,
                                Provenance provenance) {
  const auto& f = *params.freq;
  std::vector<ThetaPoint> pts;
  pts.reserve(offsets.size());
  Real q(f.q_deep());
  for (const auto& [m, group] : offsets) {
    Real r(phase_residue(f, params.theta, 2 * m));
    Real cosv = cos_pi(r / q);
    r /= q;
    r.scale2(-1);
    pts.push_back({m, group, std::move(r), std::move(cosv)});
  }
  return ThetaSet(std::move(pts), provenance, params.theta);
}

ThetaSet ThetaSet::custom(std::vector<Real> residues) {
  std::vector<ThetaPoint> pts;
  for (auto& r : residues) {
    Real arg = r;
    arg *= 2L;
    Real c = cos_pi(arg);
    pts.push_back({std::nullopt, 0, std::move(r), std::move(c)});
  }
  return ThetaSet(std::move(pts), Provenance::Custom, ThetaKind::Zero);
}

namespace {

void append_range(std::vector<std::pair<std::int64_t, int>>& out, std::int64_t a, std::int64_t b, int group) {
  for (std::int64_t m = a; m <= b; ++m) out.emplace_back(m, group);
}

}  // namespace

ThetaSet regular_set(const ModelParams& params, Site y, int n) {
  auto sc = green::regularity_scale(y, *params.freq, n);
  const std::int64_t sq = sc.s * sc.q_lower;
  std::vector<std::pair<std::int64_t, int>> offs;
  append_range(offs, -2 * sq, -1, 1);
  append_range(offs, y - 2 * sq, y + 2 * sq - 1, 2);
  return ThetaSet::from_offsets(params, offs, Provenance::RegularSet);
}

namespace {

SetScale scale_by_rule(const cfrac::Frequency& f, int n, double eta, double room, const char* name) {
  if (n < 1 || n > f.depth()) throw PreconditionError(std::string(name) + ": level out of range");
  for (int n0 = 1; n0 <= n; ++n0) {
    double q = f.q(n - n0).get_d();
    if (q / eta <= room) {
      SetScale sc;
      sc.n0 = n0;
      sc.q_lower = static_cast<long>(q);
      sc.s = static_cast<long>(std::floor(room / q));
      return sc;
    }
  }
  throw PreconditionError(std::string(name) + ": q_n too small for eta; pass an explicit scale");
}

}  // namespace

SetScale half_peak_scale(const cfrac::Frequency& f, int n, double eta) {
  double qn = f.q(n).get_d();
  return scale_by_rule(f, n, eta, (1.0 / 6 - 2 * eta) * qn, "half_peak_scale");
}

SetScale peak_scale(const cfrac::Frequency& f, int n, double eta) {
  double qn = f.q(n).get_d();
  return scale_by_rule(f, n, eta, qn / 6 - 2, "peak_scale");
}

ThetaSet half_peak_set(const ModelParams& params, int n, long j, double eta, std::optional<SetScale> scale) {
  const auto& f = *params.freq;
  SetScale sc = scale ? *scale : half_peak_scale(f, n, eta);
  const std::int64_t qn = f.q(n).get_si();
  const std::int64_t sq = sc.s * sc.q_lower;
  const std::int64_t w = (sc.s + static_cast<long>(std::floor(eta * sc.s))) * sc.q_lower;
  const std::int64_t c = j * qn + qn / 2;
  std::vector<std::pair<std::int64_t, int>> offs;
  append_range(offs, -2 * sq, -1, 1);
  append_range(offs, c - w, c + w - 1, 2);
  return ThetaSet::from_offsets(params, offs, Provenance::HalfPeakSet);
}

ThetaSet peak_set(const ModelParams& params, int n, long j, double eta, std::optional<SetScale> scale) {
  const auto& f = *params.freq;
  SetScale sc = scale ? *scale : peak_scale(f, n, eta);
  const std::int64_t qn = f.q(n).get_si();
  const std::int64_t sq = sc.s * sc.q_lower;
  const std::int64_t c = j * qn;
  std::vector<std::pair<std::int64_t, int>> offs;
  append_range(offs, -2 * sq, -1, 1);
  append_range(offs, c - 3 * sq, c - 2 * sq - 1, 2);
  append_range(offs, c + 2 * sq, c + 3 * sq - 1, 2);
  append_range(offs, c - 2 * sq, c + 2 * sq - 1, 3);
  return ThetaSet::from_offsets(params, offs, Provenance::PeakSet);
}

namespace {

using ld = long double;

ld log_prod_except(const std::vector<ld>& c, size_t i, ld x) {
  ld s = 0;
  for (size_t j = 0; j < c.size(); ++j)
    if (j != i) s += std::log(std::fabs(x - c[j]));
  return s;
}

}  // namespace

LaTerms la_terms(const ThetaSet& ts) {
  const size_t n = ts.size();
  if (n < 2) throw PreconditionError("la_terms: need at least two points");
  std::vector<ld> c(n);
  for (size_t i = 0; i < n; ++i) c[i] = ts.points()[i].cosv.to_long_double();

  // Chebyshev points plus both endpoints, ascending.
  const int G = static_cast<int>(8 * n);
  std::vector<ld> grid;
  grid.reserve(static_cast<size_t>(G) + 2);
  grid.push_back(-1.0L);
  for (int g = G - 1; g >= 0; --g) grid.push_back(std::cos(static_cast<ld>(M_PIl) * (g + 0.5L) / G));
  grid.push_back(1.0L);
  std::vector<ld> full(grid.size());
  for (size_t g = 0; g < grid.size(); ++g) {
    ld s = 0;
    for (size_t j = 0; j < n; ++j) s += std::log(std::fabs(grid[g] - c[j]));
    full[g] = s;
  }

  LaTerms out;
  out.grid_size = G;
  out.values.reserve(n);
  out.x_star.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    // Denominator in extended precision: neighbouring cosines can be very close.
    Real denom(0);
    for (size_t j = 0; j < n; ++j)
      if (j != i) denom += log(abs(ts.points()[i].cosv - ts.points()[j].cosv));

    size_t best = 0;
    ld best_val = -std::numeric_limits<ld>::infinity();
    for (size_t g = 0; g < grid.size(); ++g) {
      ld d = std::fabs(grid[g] - c[i]);
      ld val = d > 0 ? full[g] - std::log(d) : log_prod_except(c, i, grid[g]);
      if (val > best_val) {
        best_val = val;
        best = g;
      }
    }
    // Bracket between neighbouring grid points, cut at nodes so the
    // log-product is concave on it.
    ld x0 = grid[best];
    ld a = best > 0 ? grid[best - 1] : x0;
    ld b = best + 1 < grid.size() ? grid[best + 1] : x0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (c[j] < x0 && c[j] > a) a = c[j];
      if (c[j] > x0 && c[j] < b) b = c[j];
    }
    ld x_best = x0;
    const ld ratio = (std::sqrt(5.0L) - 1) / 2;
    ld u = b - ratio * (b - a), w = a + ratio * (b - a);
    ld fu = log_prod_except(c, i, u), fw = log_prod_except(c, i, w);
    while (b - a > 1e-12L) {
      if (fu < fw) {
        a = u;
        u = w;
        fu = fw;
        w = a + ratio * (b - a);
        fw = log_prod_except(c, i, w);
      } else {
        b = w;
        w = u;
        fw = fu;
        u = b - ratio * (b - a);
        fu = log_prod_except(c, i, u);
      }
    }
    ld xm = 0.5L * (a + b);
    ld fm = log_prod_except(c, i, xm);
    if (fm > best_val) {
      best_val = fm;
      x_best = xm;
    }
    Real num(static_cast<double>(best_val));
    mpfr_set_ld(num.raw(), best_val, MPFR_RNDN);
    out.values.push_back(num - denom);
    out.x_star.push_back(static_cast<double>(x_best));
  }
  return out;
}

LogSigned q_value(const ModelParams& params, const Real& theta, int k) {
  Real shifted = theta;
  // theta - (k-1) alpha / 2
  Real half = params.freq->to_real() * Real(k - 1);
  half.scale2(-1);
  shifted -= half;
  return det::logdet_at_theta(params, shifted, k);
}

std::vector<LogSigned> node_determinants(const ThetaSet& ts, const ModelParams& params) {
  const int k = static_cast<int>(ts.size()) - 1;
  if (k < 1) throw PreconditionError("node_determinants: need at least two points");
  std::vector<LogSigned> out;
  out.reserve(ts.size());
  bool exact = std::all_of(ts.points().begin(), ts.points().end(), [](const auto& p) { return p.offset.has_value(); });
  if (exact) {
    if (ts.theta_kind() != params.theta) throw PreconditionError("node_determinants: theta kind mismatch");
    // Half step of theta_m - (k-1) alpha / 2 is 2m - (k-1); its sites follow every 2 half steps.
    std::int64_t tmin = std::numeric_limits<std::int64_t>::max(), tmax = std::numeric_limits<std::int64_t>::min();
    for (const auto& p : ts.points()) {
      std::int64_t t = 2 * *p.offset - (k - 1);
      tmin = std::min(tmin, t);
      tmax = std::max(tmax, t + 2 * (k - 1));
    }
    PotentialTable table(params, tmin, tmax, 1);
    for (const auto& p : ts.points()) {
      auto v = table.run(2 * *p.offset - (k - 1), k);
      out.push_back(det::final_det(v, params.energy));
    }
  } else {
    for (const auto& p : ts.points()) out.push_back(q_value(params, p.residue, k));
  }
  return out;
}

Real lagrange_eval(std::span<const Real> nodes, std::span<const Real> values, const Real& x) {
  Real sum(0);
  for (size_t i = 0; i < nodes.size(); ++i) {
    Real term = values[i];
    for (size_t j = 0; j < nodes.size(); ++j) {
      if (j == i) continue;
      term *= x - nodes[j];
      term /= nodes[i] - nodes[j];
    }
    sum += term;
  }
  return sum;
}

UniformityWitness uniformity_witness(const ThetaSet& ts, const LaTerms& la, const ModelParams& params,
                                     const UniformityOptions& opts) {
  const int k = static_cast<int>(ts.size()) - 1;
  if (k < 1) throw PreconditionError("uniformity_witness: k must be >= 1");
  Real ll = opts.log_lambda ? *opts.log_lambda : log(params.lambda);
  Real klnl = ll * Real(k);
  Real base = klnl - log(Real(k + 1));
  auto dets = node_determinants(ts, params);
  UniformityWitness w;
  w.la = la;
  w.margins.reserve(dets.size());
  size_t best = 0;
  for (size_t i = 0; i < dets.size(); ++i) {
    Real m = dets[i].logmag - (base - la.values[i]);
    if (i == 0 || m > w.margins[best]) best = i;
    w.margins.push_back(std::move(m));
  }
  Real allowed = -(Real(opts.slack) * abs(klnl));
  if (w.margins[best] < allowed) {
    throw UniformityViolation("uniformity violation: best margin " + w.margins[best].str(12) + " over " +
                                  std::to_string(dets.size()) + " nodes",
                              w.margins);
  }
  w.index = best;
  w.margin = w.margins[best];
  return w;
}

UniformityWitness uniformity_witness(const ThetaSet& ts, const ModelParams& params, const UniformityOptions& opts) {
  return uniformity_witness(ts, la_terms(ts), params, opts);
}

std::vector<HermanResult> herman_check_many(const ModelParams& params, std::span<const Real> energies, int k,
                                            int quad_points) {
  if (k < 1) throw PreconditionError("herman_check: k must be >= 1");
  if (quad_points < 16 * k) throw PreconditionError("herman_check: quad_points must be >= 16k");
  const double allowance = 1e-3 * k;
  const Real klnl = log(params.lambda) * Real(k);
  // ln(2 pi k) + ln(1e-25): |P_k| below sup|P_k| times this is within 1e-25 of a zero.
  const double near_zero = std::log(2 * M_PI * k) + std::log(1e-25);

  auto summarise = [&](const std::vector<LogSigned>& row, HermanResult& r) {
    Real sup = Real::infinity(-1);
    for (const auto& x : row) sup = fmax(sup, x.logmag);
    Real thr = sup + Real(near_zero);
    int flagged = 0;
    Real sum(0);
    for (const auto& x : row) {
      if (x.is_zero() || x.logmag < thr) ++flagged;
      if (!x.is_zero()) sum += x.logmag;
    }
    r.flagged = flagged;
    r.integral = sum / Real(static_cast<long>(row.size()));
    return flagged;
  };

  auto first = det::theta_sweep(params, energies, k, quad_points, 0.0);
  std::vector<HermanResult> out(energies.size());
  std::vector<Real> redo;
  std::vector<size_t> redo_idx;
  for (size_t e = 0; e < energies.size(); ++e) {
    out[e].allowance = allowance;
    if (summarise(first[e], out[e]) > 0) {
      redo.push_back(energies[e]);
      redo_idx.push_back(e);
    }
  }
  if (!redo.empty()) {
    auto second = det::theta_sweep(params, redo, k, quad_points, 0.5);
    for (size_t r = 0; r < redo.size(); ++r) {
      auto& res = out[redo_idx[r]];
      int before = res.flagged;
      summarise(second[r], res);
      res.shifted = true;
      res.flagged += before;
    }
  }
  for (auto& r : out) r.pass = r.integral >= klnl - Real(allowance);
  return out;
}

HermanResult herman_check(const ModelParams& params, int k, int quad_points) {
  std::vector<Real> e{params.energy};
  return herman_check_many(params, e, k, quad_points).front();
}

SinProduct sin_product_bound(const Real& x, const cfrac::Frequency& f, int n) {
  if (n < 0 || n > f.depth()) throw PreconditionError("sin_product_bound: level out of range");
  const mpz_class& qz = f.q(n);
  if (qz < 2) throw PreconditionError("sin_product_bound: q_n must be >= 2");
  const long q = qz.get_si();
  std::vector<Real> logs(static_cast<size_t>(q));
  long l0 = 0;
  Real smallest = Real::infinity(1);
  for (long l = 0; l < q; ++l) {
    Real arg = x;
    arg += alpha_multiple_frac(f, l);
    Real s = abs(sin_pi(arg));
    if (s < smallest) {
      smallest = s;
      l0 = l;
    }
    logs[static_cast<size_t>(l)] = s.is_zero() ? Real::infinity(-1) : log(s);
  }
  SinProduct out;
  out.l0 = l0;
  out.sum = Real(0);
  for (long l = 0; l < q; ++l)
    if (l != l0) out.sum += logs[static_cast<size_t>(l)];
  out.centered = out.sum + Real::ln2() * Real(q - 1);
  out.c_empirical = (abs(out.centered) / log(Real(q))).to_double();
  return out;
}

std::string la_csv(const ThetaSet& ts, const LaTerms& la) {
  std::ostringstream os;
  os << "i,theta_residue,cos_value,La_i,x_star\n";
  os.precision(17);
  for (size_t i = 0; i < ts.size(); ++i) {
    const auto& p = ts.points()[i];
    os << i << ',' << p.residue.str() << ',' << p.cosv.str() << ',' << la.values[i].str() << ',' << la.x_star[i]
       << '\n';
  }
  return os.str();
}

}  // namespace amolab::interp
