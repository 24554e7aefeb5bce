#include "amolab/model.hpp"

#include "amolab/errors.hpp"

namespace amolab {

std::string to_string(ThetaKind k) {
  switch (k) {
    case ThetaKind::Zero: return "0";
    case ThetaKind::Half: return "1/2";
    case ThetaKind::HalfAlpha: return "alpha/2";
    case ThetaKind::HalfAlphaPlusHalf: return "alpha/2+1/2";
  }
  return "?";
}

ThetaKind theta_kind_from_string(const std::string& s) {
  if (s == "0" || s == "zero") return ThetaKind::Zero;
  if (s == "1/2" || s == "half") return ThetaKind::Half;
  if (s == "alpha/2" || s == "half_alpha") return ThetaKind::HalfAlpha;
  if (s == "alpha/2+1/2" || s == "half_alpha_plus_half") return ThetaKind::HalfAlphaPlusHalf;
  throw PreconditionError("unknown theta kind '" + s + "'");
}

ModelParams make_params(double lambda, cfrac::Frequency f, ThetaKind theta, Real energy) {
  if (!(lambda >= 0)) throw PreconditionError("lambda must be non-negative");
  return ModelParams{Real(lambda), std::make_shared<const cfrac::Frequency>(std::move(f)), theta,
                     std::move(energy)};
}

namespace {

// 2 q theta for the four resonant phases, in units of 1/(2q).
mpz_class theta_numerator(const cfrac::Frequency& f, ThetaKind theta) {
  switch (theta) {
    case ThetaKind::Zero: return 0;
    case ThetaKind::Half: return f.q_deep();
    case ThetaKind::HalfAlpha: return f.p_deep();
    case ThetaKind::HalfAlphaPlusHalf: return f.p_deep() + f.q_deep();
  }
  return 0;
}

void check_resolvable(const cfrac::Frequency& f, std::int64_t half_steps) {
  mpz_class t = static_cast<long>(half_steps);
  if (abs(t) >= 2 * f.q_deep())
    throw PreconditionError("site " + std::to_string(half_steps / 2) +
                            " is beyond the resolution of the deepest convergent");
}

}  // namespace

mpz_class phase_residue(const cfrac::Frequency& f, ThetaKind theta, std::int64_t half_steps) {
  mpz_class two_q = 2 * f.q_deep();
  mpz_class r = theta_numerator(f, theta) + mpz_class(static_cast<long>(half_steps)) * f.p_deep();
  mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), two_q.get_mpz_t());
  return r;
}

Real alpha_multiple_frac(const cfrac::Frequency& f, std::int64_t j) {
  mpz_class r = mpz_class(static_cast<long>(j)) * f.p_deep();
  mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), f.q_deep().get_mpz_t());
  return Real(r) / Real(f.q_deep());
}

namespace {

// cos 2pi (r / 2q) = cos(pi r / q)
Real cos_of_residue(const mpz_class& r, const mpz_class& q) { return cos_pi(Real(r) / Real(q)); }

}  // namespace

Real potential(Site n, const ModelParams& params) {
  const auto& f = *params.freq;
  check_resolvable(f, 2 * n);
  Real v = cos_of_residue(phase_residue(f, params.theta, 2 * n), f.q_deep());
  v *= params.lambda;
  v *= 2L;
  return v;
}

Real SiteVector::sup_norm() const {
  Real m(0);
  for (const auto& x : values) m = fmax(m, abs(x));
  return m;
}

PotentialTable::PotentialTable(const ModelParams& params, std::int64_t t_lo, std::int64_t t_hi, int stride)
    : t_lo_(t_lo), stride_(stride) {
  if (t_hi < t_lo) throw PreconditionError("PotentialTable: empty range");
  if (stride < 1) throw PreconditionError("PotentialTable: stride must be positive");
  const auto& f = *params.freq;
  check_resolvable(f, t_lo);
  check_resolvable(f, t_hi);
  Real two_lambda = params.lambda * Real(2);
  v_.reserve(static_cast<size_t>((t_hi - t_lo) / stride + 1));
  for (std::int64_t t = t_lo; t <= t_hi; t += stride) {
    Real v = cos_of_residue(phase_residue(f, params.theta, t), f.q_deep());
    v *= two_lambda;
    v_.push_back(std::move(v));
  }
}

PotentialTable PotentialTable::sites(const ModelParams& params, Site lo, Site hi) {
  return PotentialTable(params, 2 * lo, 2 * hi, 2);
}

const Real& PotentialTable::at_half(std::int64_t t) const {
  if (t < t_lo() || t > t_hi() || (t - t_lo_) % stride_ != 0)
    throw PreconditionError("PotentialTable: half step " + std::to_string(t) + " not tabulated");
  return v_[static_cast<size_t>((t - t_lo_) / stride_)];
}

std::vector<Real> PotentialTable::site_values(Site lo, Site hi) const { return run(2 * lo, static_cast<int>(hi - lo + 1)); }

std::vector<Real> PotentialTable::run(std::int64_t t0, int k) const {
  std::vector<Real> out;
  out.reserve(static_cast<size_t>(std::max(k, 0)));
  for (int j = 0; j < k; ++j) out.push_back(at_half(t0 + 2 * j));
  return out;
}

}  // namespace amolab
