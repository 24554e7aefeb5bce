#include "amolab/green.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "amolab/detkernel.hpp"
#include "amolab/errors.hpp"

namespace amolab::green {

namespace {

void check_member(const Interval& I, Site y) {
  if (I.k() < 1) throw PreconditionError("interval must contain at least one site");
  if (!I.contains(y)) throw PreconditionError("y = " + std::to_string(y) + " is outside the interval");
}

LogSigned flip_if_odd(LogSigned x, Site d) {
  if (d % 2 != 0) x.sign = -x.sign;
  return x;
}

}  // namespace

void check_nonsingular(std::span<const Real> v, const Real& energy) {
  Real scale(2);
  for (const auto& vj : v) scale = fmax(scale, abs(vj - energy) + Real(2));
  Real thr = exp(Real(-40)) * scale;
  for (const auto& g : det::twisted_gammas(v, energy)) {
    if (!g.is_finite() || abs(g) < thr) throw ResonantInterval("E resonant with interval");
  }
}

namespace {

// Columns (H_I - E)^{-1} e_1 and (H_I - E)^{-1} e_n by partial-pivoting
// elimination, as in LAPACK gtsv.
std::pair<std::vector<Real>, std::vector<Real>> boundary_columns(std::span<const Real> v, const Real& energy) {
  const size_t n = v.size();
  std::vector<Real> d(n), du(n > 1 ? n - 1 : 0, Real(1)), dl(n > 1 ? n - 1 : 0, Real(1));
  for (size_t i = 0; i < n; ++i) d[i] = v[i] - energy;
  std::vector<Real> b1(n, Real(0)), b2(n, Real(0));
  b1[0] = Real(1);
  b2[n - 1] += Real(1);
  Real fact, temp;
  for (size_t i = 0; i + 1 < n; ++i) {
    if (abs(d[i]) >= abs(dl[i])) {
      if (d[i].is_zero()) throw ResonantInterval("E resonant with interval");
      fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b1[i + 1] -= fact * b1[i];
      b2[i + 1] -= fact * b2[i];
      dl[i] = Real(0);
    } else {
      fact = d[i] / dl[i];
      d[i] = dl[i];
      temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i + 2 < n) {
        dl[i] = du[i + 1];
        du[i + 1] = -(fact * dl[i]);
      } else {
        dl[i] = Real(0);
      }
      du[i] = temp;
      for (auto* b : {&b1, &b2}) {
        temp = (*b)[i];
        (*b)[i] = (*b)[i + 1];
        (*b)[i + 1] = temp - fact * (*b)[i + 1];
      }
    }
  }
  if (d[n - 1].is_zero()) throw ResonantInterval("E resonant with interval");
  for (auto* b : {&b1, &b2}) {
    auto& x = *b;
    x[n - 1] /= d[n - 1];
    if (n >= 2) x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    if (n >= 3)
      for (size_t i = n - 2; i-- > 0;) x[i] = (x[i] - du[i] * x[i + 1] - dl[i] * x[i + 2]) / d[i];
  }
  return {std::move(b1), std::move(b2)};
}

}  // namespace

GreenPair green_direct(const Interval& I, const PotentialTable& table, const Real& energy, Site y) {
  check_member(I, y);
  auto v = table.site_values(I.x1, I.x2);
  check_nonsingular(v, energy);
  auto [b1, b2] = boundary_columns(v, energy);
  auto idx = static_cast<size_t>(y - I.x1);
  return {LogSigned::from(b1[idx]), LogSigned::from(b2[idx])};
}

GreenPair green_direct(const Interval& I, const ModelParams& params, Site y) {
  auto table = PotentialTable::sites(params, I.x1, I.x2);
  return green_direct(I, table, params.energy, y);
}

GreenPair green_cramer(const Interval& I, const PotentialTable& table, const Real& energy, Site y) {
  check_member(I, y);
  auto v = table.site_values(I.x1, I.x2);
  check_nonsingular(v, energy);
  std::span<const Real> all(v);
  auto off = static_cast<size_t>(y - I.x1);
  LogSigned pk = det::final_det(all, energy);
  LogSigned tail = det::final_det(all.subspan(off + 1), energy);  // sites y+1..x2
  LogSigned head = det::final_det(all.subspan(0, off), energy);   // sites x1..y-1
  return {flip_if_odd(tail / pk, y - I.x1), flip_if_odd(head / pk, I.x2 - y)};
}

GreenPair green_cramer(const Interval& I, const ModelParams& params, Site y) {
  auto table = PotentialTable::sites(params, I.x1, I.x2);
  return green_cramer(I, table, params.energy, y);
}

GreenTable::GreenTable(const Interval& I, const PotentialTable& table, const Real& energy) : interval_(I) {
  if (I.k() < 1) throw PreconditionError("interval must contain at least one site");
  auto v = table.site_values(I.x1, I.x2);
  check_nonsingular(v, energy);
  auto fwd = det::recursion(v, energy);  // fwd[j] = det over x1..x1+j-1
  std::reverse(v.begin(), v.end());
  auto bwd = det::recursion(v, energy);  // bwd[j] = det over x2-j+1..x2
  const int k = I.k();
  LogSigned pk = fwd[static_cast<size_t>(k)].log();
  entries_.reserve(static_cast<size_t>(k));
  for (Site y = I.x1; y <= I.x2; ++y) {
    auto a = static_cast<size_t>(I.x2 - y);
    auto b = static_cast<size_t>(y - I.x1);
    entries_.push_back({flip_if_odd(bwd[a].log() / pk, y - I.x1), flip_if_odd(fwd[b].log() / pk, I.x2 - y)});
  }
}

std::optional<RegularityWitness> is_regular(Site y, const Real& t, int k, const PotentialTable& table,
                                            const Real& energy, const RegularityOptions& opts) {
  if (!(t > Real(0))) throw PreconditionError("is_regular: t must be positive");
  if (k < 7) throw PreconditionError("is_regular: k must be >= 7");
  const Site margin = (k + 6) / 7;
  std::optional<RegularityWitness> best;
  for (Site left = margin; left <= k - 1 - margin; ++left) {
    Interval I{y - left, y - left + k - 1};
    if (opts.lo && I.x1 < *opts.lo) continue;
    if (opts.hi && I.x2 > *opts.hi) continue;
    GreenPair g;
    try {
      g = green_cramer(I, table, energy, y);
    } catch (const ResonantInterval&) {
      continue;
    }
    if (g.left.is_zero() || g.right.is_zero()) continue;
    Real sl = -(t * Real(y - I.x1)) - g.left.logmag;
    Real sr = -(t * Real(I.x2 - y)) - g.right.logmag;
    if (sl < Real(0) || sr < Real(0)) continue;
    RegularityWitness w{y, t, k, I, sl, sr, g};
    if (!best || w.min_slack() > best->min_slack()) best = std::move(w);
  }
  return best;
}

std::optional<RegularityWitness> is_regular(Site y, const Real& t, int k, const ModelParams& params,
                                            const RegularityOptions& opts) {
  auto table = PotentialTable::sites(params, y - k + 1, y + k - 1);
  return is_regular(y, t, k, table, params.energy, opts);
}

RegularityScale regularity_scale(Site y, const cfrac::Frequency& f, int n) {
  if (n < 1 || n > f.depth()) throw PreconditionError("regularity_scale: level out of range");
  RegularityScale out;
  out.n = n;
  out.dist = cfrac::site_distance(y, f.q(n));
  // 4 q <= dist - 2  <=>  8 q <= twice - 4
  mpz_class room = out.dist.twice - 4;
  for (int n0 = 1; n0 <= n; ++n0) {
    const mpz_class& q = f.q(n - n0);
    if (8 * q <= room) {
      out.n0 = n0;
      out.q_lower = q.get_si();
      mpz_class s = room / (8 * q);
      out.s = s.get_si();
      out.k = static_cast<int>(6 * out.s * out.q_lower - 1);
      return out;
    }
  }
  throw PreconditionError("regularity_scale: y = " + std::to_string(y) + " is too close to the q_" +
                          std::to_string(n) + " lattice");
}

Real block_expand_residual(const SiteVector& phi, const Interval& I, const PotentialTable& table,
                           const Real& energy) {
  if (!phi.contains(I.x1 - 1) || !phi.contains(I.x2 + 1))
    throw PreconditionError("block_expand_residual: interval not strictly inside the vector's domain");
  // The pivoted solve rather than determinant ratios: on a nearly resonant
  // interval the forward recursion feeds roundoff into the growing solution.
  auto v = table.site_values(I.x1, I.x2);
  check_nonsingular(v, energy);
  auto [gl, gr] = boundary_columns(v, energy);
  const Real& left = phi.at(I.x1 - 1);
  const Real& right = phi.at(I.x2 + 1);
  Real worst(0);
  for (Site x = I.x1; x <= I.x2; ++x) {
    auto i = static_cast<size_t>(x - I.x1);
    Real r = phi.at(x);
    r += gl[i] * left;
    r += gr[i] * right;
    worst = fmax(worst, abs(r));
  }
  return worst;
}

Real block_expand_residual(const SiteVector& phi, const Interval& I, const ModelParams& params) {
  auto table = PotentialTable::sites(params, I.x1, I.x2);
  return block_expand_residual(phi, I, table, params.energy);
}

std::pair<Site, Site> nonresonant_region(Site start, const cfrac::Frequency& f, int n, double eta, Site lo,
                                         Site hi) {
  auto ok = [&](Site z) { return z != 0 && !cfrac::classify(z, f, n, eta).resonant; };
  if (!ok(start)) throw PreconditionError("start site is n-resonant");
  Site a = start, b = start;
  while (a - 1 >= lo && ok(a - 1)) --a;
  while (b + 1 <= hi && ok(b + 1)) ++b;
  return {a, b};
}

namespace {

double logsumexp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

class ChainSolver {
 public:
  ChainSolver(const ModelParams& params, const PotentialTable& table, const ChainOptions& opts)
      : params_(params), table_(table), opts_(opts) {
    t_ = opts.t;
    if (t_.is_zero()) t_ = log(params.lambda) - Real(opts.eta);
  }

  const std::optional<RegularityWitness>& witness(Site z) {
    auto it = cache_.find(z);
    if (it != cache_.end()) return it->second;
    std::optional<RegularityWitness> w;
    int k = opts_.k;
    bool have_k = k > 0;
    if (!have_k) {
      try {
        k = regularity_scale(z, *params_.freq, opts_.level).k;
        have_k = k >= 7;
      } catch (const PreconditionError&) {
        have_k = false;
      }
    }
    if (have_k) {
      RegularityOptions ro{opts_.domain_lo + 1, opts_.domain_hi - 1};
      w = is_regular(z, t_, k, table_, params_.energy, ro);
    }
    return cache_.emplace(z, std::move(w)).first->second;
  }

  bool has_scale(Site z) const {
    if (opts_.k > 0) return true;
    try {
      return regularity_scale(z, *params_.freq, opts_.level).k >= 7;
    } catch (const PreconditionError&) {
      return false;
    }
  }

  bool in_region(Site z) const { return z >= opts_.region_lo && z <= opts_.region_hi; }

  // ln F(z, h): |phi(z)| <= F(z, h) max over leaves of |phi|.
  double tree(Site z, int h) {
    if (!in_region(z) || h == 0) {
      leaves_.insert(z);
      return 0.0;
    }
    auto key = std::make_pair(z, h);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const auto& w = witness(z);
    double out;
    if (!w) {
      leaves_.insert(z);
      out = 0.0;
    } else {
      double a = w->green.left.logmag.to_double() + tree(w->interval.x1 - 1, h - 1);
      double b = w->green.right.logmag.to_double() + tree(w->interval.x2 + 1, h - 1);
      out = logsumexp(a, b);
    }
    memo_.emplace(key, out);
    return out;
  }

  std::vector<Site> leaves() const { return {leaves_.begin(), leaves_.end()}; }
  const Real& t() const { return t_; }

 private:
  const ModelParams& params_;
  const PotentialTable& table_;
  const ChainOptions& opts_;
  Real t_;
  std::map<Site, std::optional<RegularityWitness>> cache_;
  std::map<std::pair<Site, int>, double> memo_;
  std::set<Site> leaves_;
};

}  // namespace

ExpansionChain expand_chain(Site start, const ModelParams& params, const PotentialTable& table,
                            const ChainOptions& opts) {
  int cap;
  if (opts.max_hops) {
    cap = *opts.max_hops;
  } else {
    auto sc = regularity_scale(start, *params.freq, opts.level);
    mpz_class c = 4 * params.freq->q(opts.level) / sc.q_lower;
    cap = static_cast<int>(c.get_si());
  }
  if (cap < 1) throw PreconditionError("max_hops must be >= 1");
  if (start < opts.region_lo || start > opts.region_hi)
    throw PreconditionError("expand_chain: start outside the region");

  ChainSolver solver(params, table, opts);
  ExpansionChain chain;
  chain.start = start;
  Site z = start;
  std::set<Site> visited{start};
  while (true) {
    if (static_cast<int>(chain.hops.size()) == cap) {
      chain.capped = solver.in_region(z);
      break;
    }
    const auto& w = solver.witness(z);
    if (!w) {
      // Too close to the lattice for any scale: the resonant zone was reached.
      chain.stuck = solver.has_scale(z);
      break;
    }
    // Larger Green value first, but never back to a site already expanded.
    const Site lx = w->interval.x1 - 1, rx = w->interval.x2 + 1;
    const bool lseen = visited.count(lx) > 0, rseen = visited.count(rx) > 0;
    bool go_left = w->green.left.logmag >= w->green.right.logmag;
    if (lseen != rseen) go_left = rseen;
    Hop hop{z, w->interval, go_left ? w->interval.x1 - 1 : w->interval.x2 + 1,
            (go_left ? w->green.left.logmag : w->green.right.logmag).to_double()};
    chain.path_log_bound += hop.log_increment;
    chain.hops.push_back(hop);
    z = hop.exit;
    if (!solver.in_region(z)) break;
    if (!visited.insert(z).second) {
      chain.cycled = true;
      break;
    }
  }
  chain.terminal = z;
  chain.distance = std::fabs(static_cast<double>(z - start));
  double rate = solver.t().to_double();
  chain.realized_slack = chain.distance + chain.path_log_bound / rate;
  chain.certificate = solver.tree(start, cap);
  chain.leaves = solver.leaves();
  return chain;
}

std::string to_json_lines(const ExpansionChain& chain) {
  std::string out;
  for (size_t i = 0; i < chain.hops.size(); ++i) {
    const auto& h = chain.hops[i];
    nlohmann::json j{{"hop", i},          {"z", h.z},       {"x1", h.interval.x1},
                     {"x2", h.interval.x2}, {"exit", h.exit}, {"log_increment", h.log_increment}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace amolab::green
