#include "amolab/cfrac.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "amolab/errors.hpp"

namespace amolab::cfrac {

Frequency Frequency::from_coeffs(std::vector<mpz_class> coeffs) {
  if (coeffs.empty()) throw PreconditionError("a frequency needs at least one partial quotient");
  Frequency f;
  f.convergents_.reserve(coeffs.size() + 1);
  mpz_class p_prev = 1, q_prev = 0;  // level -1
  mpz_class p = 0, q = 1;            // level 0
  f.convergents_.push_back({p, q});
  for (const auto& a : coeffs) {
    if (a < 1) throw PreconditionError("partial quotients must be positive");
    mpz_class pn = a * p + p_prev;
    mpz_class qn = a * q + q_prev;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = pn;
    q = qn;
    f.convergents_.push_back({p, q});
  }
  f.coeffs_ = std::move(coeffs);
  return f;
}

Frequency Frequency::golden(int depth) {
  if (depth < 1) throw PreconditionError("golden truncation depth must be >= 1");
  return from_coeffs(std::vector<mpz_class>(static_cast<size_t>(depth), mpz_class(1)));
}

int Frequency::level_below(const mpz_class& bound) const {
  int best = 0;
  for (int n = 0; n <= depth(); ++n)
    if (q(n) <= bound) best = n;
  return best;
}

Frequency expand(const mpq_class& x_in, int depth) {
  if (depth <= 0) throw PreconditionError("expansion depth must be positive");
  mpq_class x = x_in;
  x.canonicalize();
  if (x <= 0 || x >= 1) throw PreconditionError("expand: x must lie in (0,1)");
  mpz_class num = x.get_num(), den = x.get_den();
  std::vector<mpz_class> coeffs;
  while (num != 0 && static_cast<int>(coeffs.size()) < depth) {
    mpz_class a, r;
    mpz_fdiv_qr(a.get_mpz_t(), r.get_mpz_t(), den.get_mpz_t(), num.get_mpz_t());
    coeffs.push_back(a);
    den = num;
    num = r;
  }
  return Frequency::from_coeffs(std::move(coeffs));
}

Frequency build_liouville(double beta, int levels, std::span<const mpz_class> seed,
                          const LiouvilleOptions& opts) {
  if (!(beta > 0)) throw PreconditionError("beta_target must be positive");
  if (levels < 0) throw PreconditionError("levels must be non-negative");
  std::vector<mpz_class> coeffs(seed.begin(), seed.end());
  mpz_class q_prev = 0, q = 1;
  for (const auto& a : coeffs) {
    mpz_class qn = a * q + q_prev;
    q_prev = q;
    q = qn;
  }
  const double ln10 = std::log(10.0);
  for (int i = 0; i < levels; ++i) {
    // log10 of e^{beta q} must fit the budget before anything is allocated.
    double qd = q.get_d();
    double digits = beta * qd / ln10;
    if (!std::isfinite(digits) || digits > opts.digit_budget) {
      std::ostringstream os;
      os << "build_liouville: level " << coeffs.size() + 1 << " needs about " << digits
         << " decimal digits, budget is " << opts.digit_budget;
      throw BudgetExceeded(os.str());
    }
    auto bits = static_cast<mpfr_prec_t>(beta * qd / std::log(2.0)) + 96;
    PrecisionGuard guard(std::max<mpfr_prec_t>(bits, Real::default_precision()));
    Real e = Real(beta) * Real(q);
    e = exp(e);
    e /= Real(q);
    mpz_class a = to_mpz_round(e);
    if (a < 1) a = 1;
    mpz_class qn = a * q + q_prev;
    q_prev = q;
    q = qn;
    coeffs.push_back(std::move(a));
  }
  return Frequency::from_coeffs(std::move(coeffs));
}

Frequency build_liouville(double beta, int levels, std::span<const long> seed,
                          const LiouvilleOptions& opts) {
  std::vector<mpz_class> s;
  s.reserve(seed.size());
  for (long v : seed) s.emplace_back(v);
  return build_liouville(beta, levels, std::span<const mpz_class>(s), opts);
}

Real BetaEstimate::max_from(int from) const {
  Real best = Real::infinity(-1);
  for (const auto& lv : per_level)
    if (lv.n >= from && lv.value > best) best = lv.value;
  return best;
}

BetaEstimate beta_estimate(const Frequency& f) {
  if (f.depth() < 1) throw PreconditionError("beta_estimate needs at least two convergents");
  BetaEstimate out;
  out.running_max = Real::infinity(-1);
  for (int n = 0; n < f.depth(); ++n) {
    Real v = log(Real(f.q(n + 1)));
    v /= Real(f.q(n));
    if (v > out.running_max) out.running_max = v;
    out.per_level.push_back({n, std::move(v)});
  }
  return out;
}

mpq_class norm_dist_exact(const mpz_class& k, const Frequency& f) {
  const mpz_class& qm = f.q_deep();
  mpz_class r = k * f.p_deep();
  mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), qm.get_mpz_t());
  mpz_class other = qm - r;
  mpq_class out(r < other ? r : other, qm);
  out.canonicalize();
  return out;
}

Real norm_dist(const mpz_class& k, const Frequency& f, int level) {
  if (level < 0 || level > f.depth()) throw PreconditionError("norm_dist: level out of range");
  mpz_class ak = abs(k);
  if (ak == 0) throw PreconditionError("norm_dist: k must be non-zero");
  if (ak >= f.q(level)) throw PreconditionError("norm_dist: convergent too shallow for k");
  mpq_class d = norm_dist_exact(k, f);
  return Real(d.get_num()) / Real(d.get_den());
}

std::string HalfInteger::str() const {
  if (twice % 2 == 0) return mpz_class(twice / 2).get_str();
  return twice.get_str() + "/2";
}

HalfInteger site_distance(std::int64_t y, const mpz_class& q) {
  if (q < 1) throw PreconditionError("site_distance: q must be >= 1");
  // |y - j q/2| = |2y - j q| / 2; minimise over j.
  mpz_class r = mpz_class(static_cast<long>(y)) * 2;
  mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), q.get_mpz_t());
  mpz_class other = q - r;
  return HalfInteger{r < other ? r : other};
}

ResonanceLabel classify(std::int64_t y, const Frequency& f, int n, double eta) {
  if (y == 0) throw PreconditionError("classify: y = 0 is the reference site and is not classified");
  if (!(eta > 0 && eta < 1.0 / 20)) throw PreconditionError("classify: eta must lie in (0, 1/20)");
  ResonanceLabel out{n, site_distance(y, f.q(n)), false, Real(eta) * Real(f.q(n))};
  out.resonant = out.distance.to_real() <= out.b_n;
  return out;
}

std::string to_json(const Frequency& f) {
  nlohmann::json j;
  j["coeffs"] = nlohmann::json::array();
  for (const auto& a : f.coeffs()) j["coeffs"].push_back(a.get_str());
  j["convergents"] = nlohmann::json::array();
  for (const auto& c : f.convergents()) j["convergents"].push_back({c.p.get_str(), c.q.get_str()});
  return j.dump();
}

Frequency frequency_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::vector<mpz_class> coeffs;
  for (const auto& a : j.at("coeffs")) coeffs.emplace_back(a.get<std::string>());
  Frequency f = Frequency::from_coeffs(std::move(coeffs));
  if (j.contains("convergents")) {
    const auto& conv = j.at("convergents");
    if (conv.size() != f.convergents().size())
      throw PreconditionError("frequency JSON: convergent count does not match coeffs");
    for (size_t i = 0; i < conv.size(); ++i) {
      if (mpz_class(conv[i].at(0).get<std::string>()) != f.convergents()[i].p ||
          mpz_class(conv[i].at(1).get<std::string>()) != f.convergents()[i].q)
        throw PreconditionError("frequency JSON: convergents inconsistent with coeffs");
    }
  }
  return f;
}

std::string to_json(const BetaEstimate& b) {
  nlohmann::json j;
  j["per_level"] = nlohmann::json::array();
  for (const auto& lv : b.per_level) j["per_level"].push_back({{"n", lv.n}, {"value", lv.value.str()}});
  j["running_max"] = b.running_max.str();
  j["tail"] = b.tail().str();
  return j.dump();
}

}  // namespace amolab::cfrac
