#include "amolab/real.hpp"

#include <ostream>
#include <stdexcept>
#include <utility>

namespace amolab {
namespace {

thread_local mpfr_prec_t g_default_precision = 128;

}  // namespace

Real::Real() {
  mpfr_init2(v_, g_default_precision);
  mpfr_set_zero(v_, 1);
}

Real::Real(double v) {
  mpfr_init2(v_, g_default_precision);
  mpfr_set_d(v_, v, MPFR_RNDN);
}

Real::Real(int v) : Real(static_cast<long>(v)) {}

Real::Real(long v) {
  mpfr_init2(v_, g_default_precision);
  mpfr_set_si(v_, v, MPFR_RNDN);
}

Real::Real(long long v) : Real(static_cast<long>(v)) {}

Real::Real(const mpz_class& v) {
  mpfr_init2(v_, g_default_precision);
  mpfr_set_z(v_, v.get_mpz_t(), MPFR_RNDN);
}

Real::Real(std::string_view decimal) {
  mpfr_init2(v_, g_default_precision);
  std::string s(decimal);
  if (mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0) {
    mpfr_clear(v_);
    throw std::invalid_argument("not a decimal number: " + s);
  }
}

Real::Real(const Real& other) {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept {
  // Steal the limb buffer; the source is left without one and skips mpfr_clear.
  v_[0] = other.v_[0];
  other.v_[0]._mpfr_d = nullptr;
}

Real& Real::operator=(const Real& other) {
  if (this != &other) {
    if (v_[0]._mpfr_d == nullptr) mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set_prec(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

Real& Real::operator=(Real&& other) noexcept {
  if (this != &other) {
    if (v_[0]._mpfr_d == nullptr) {
      v_[0] = other.v_[0];
      other.v_[0]._mpfr_d = nullptr;
    } else {
      mpfr_swap(v_, other.v_);
    }
  }
  return *this;
}

Real::~Real() {
  if (v_[0]._mpfr_d != nullptr) mpfr_clear(v_);
}

void Real::set_default_precision(mpfr_prec_t bits) {
  if (bits < MPFR_PREC_MIN || bits > MPFR_PREC_MAX) throw std::invalid_argument("precision out of range");
  g_default_precision = bits;
}

mpfr_prec_t Real::default_precision() { return g_default_precision; }

Real& Real::operator+=(const Real& o) {
  mpfr_add(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator-=(const Real& o) {
  mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator*=(const Real& o) {
  mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator/=(const Real& o) {
  mpfr_div(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
Real& Real::operator*=(long o) {
  mpfr_mul_si(v_, v_, o, MPFR_RNDN);
  return *this;
}
Real& Real::operator/=(long o) {
  mpfr_div_si(v_, v_, o, MPFR_RNDN);
  return *this;
}
Real& Real::scale2(long e) {
  mpfr_mul_2si(v_, v_, e, MPFR_RNDN);
  return *this;
}

Real Real::operator-() const {
  Real r(*this);
  mpfr_neg(r.v_, r.v_, MPFR_RNDN);
  return r;
}

std::string Real::str() const { return str(0); }

std::string Real::str(int digits) const {
  if (is_nan()) return "nan";
  if (!is_finite()) return sign() < 0 ? "-inf" : "inf";
  if (is_zero()) return "0";
  if (digits <= 0) digits = static_cast<int>(mpfr_get_str_ndigits(10, precision()));
  mpfr_exp_t e = 0;
  char* s = mpfr_get_str(nullptr, &e, 10, static_cast<size_t>(digits), v_, MPFR_RNDN);
  std::string m(s);
  mpfr_free_str(s);
  std::string out;
  if (!m.empty() && m[0] == '-') {
    out = "-";
    m.erase(0, 1);
  }
  out += m.substr(0, 1);
  if (m.size() > 1) {
    std::string frac = m.substr(1);
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    if (!frac.empty()) out += "." + frac;
  }
  long exp10 = static_cast<long>(e) - 1;
  if (exp10 != 0) out += "e" + std::to_string(exp10);
  return out;
}

Real Real::pi() {
  Real r;
  mpfr_const_pi(r.v_, MPFR_RNDN);
  return r;
}

Real Real::ln2() {
  Real r;
  mpfr_const_log2(r.v_, MPFR_RNDN);
  return r;
}

Real Real::infinity(int sign) {
  Real r;
  mpfr_set_inf(r.v_, sign);
  return r;
}

Real Real::epsilon() {
  Real r(1);
  r.scale2(1 - static_cast<long>(g_default_precision));
  return r;
}

std::partial_ordering operator<=>(const Real& a, const Real& b) {
  if (a.is_nan() || b.is_nan()) return std::partial_ordering::unordered;
  int c = mpfr_cmp(a.v_, b.v_);
  if (c < 0) return std::partial_ordering::less;
  if (c > 0) return std::partial_ordering::greater;
  return std::partial_ordering::equivalent;
}

#define AMOLAB_UNARY(name, fn)              \
  Real name(const Real& x) {                \
    Real r;                                 \
    fn(r.raw(), x.raw(), MPFR_RNDN);        \
    return r;                               \
  }

AMOLAB_UNARY(abs, mpfr_abs)
AMOLAB_UNARY(log, mpfr_log)
AMOLAB_UNARY(exp, mpfr_exp)
AMOLAB_UNARY(cos, mpfr_cos)
AMOLAB_UNARY(sin, mpfr_sin)
AMOLAB_UNARY(sqrt, mpfr_sqrt)
AMOLAB_UNARY(log1p, mpfr_log1p)

#undef AMOLAB_UNARY

Real cos_pi(const Real& x) {
  // Reduce to y in [0, 1/2] using periodicity and symmetry; then evaluate
  // cos or sin of a first-octant angle.
  Real y = abs(x);
  Real two(2);
  mpfr_fmod(y.raw(), y.raw(), two.raw(), MPFR_RNDN);
  if (y > Real(1)) y = two - y;
  int sign = 1;
  if (y > Real(0.5)) {
    y = Real(1) - y;
    sign = -1;
  }
  Real r;
  if (y > Real(0.25)) {
    Real a = Real(0.5) - y;
    a *= Real::pi();
    r = sin(a);
  } else {
    y *= Real::pi();
    r = cos(y);
  }
  if (sign < 0) mpfr_neg(r.raw(), r.raw(), MPFR_RNDN);
  return r;
}

Real sin_pi(const Real& x) {
  // sin(pi x) = cos(pi (x - 1/2))
  return cos_pi(x - Real(0.5));
}

Real floor(const Real& x) {
  Real r;
  mpfr_floor(r.raw(), x.raw());
  return r;
}

Real round(const Real& x) {
  Real r;
  mpfr_round(r.raw(), x.raw());
  return r;
}

Real fmax(const Real& a, const Real& b) { return a < b ? b : a; }
Real fmin(const Real& a, const Real& b) { return b < a ? b : a; }

mpz_class to_mpz_round(const Real& x) {
  if (!x.is_finite()) throw std::domain_error("cannot round a non-finite value");
  mpz_class z;
  mpfr_get_z(z.get_mpz_t(), x.raw(), MPFR_RNDN);
  return z;
}

std::ostream& operator<<(std::ostream& os, const Real& x) { return os << x.str(); }

}  // namespace amolab
