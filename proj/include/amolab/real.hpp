#pragma once

// Extended-precision real built on MPFR.
//
// Every Real carries its own mantissa width; newly created values take the
// calling thread's default precision (128 bits unless changed). Arithmetic
// rounds to nearest. Hot loops should prefer the compound operators, which
// do not allocate.

#include <mpfr.h>
#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace amolab {

class Real {
 public:
  Real();
  Real(double v);        // NOLINT(google-explicit-constructor)
  Real(int v);           // NOLINT(google-explicit-constructor)
  Real(long v);          // NOLINT(google-explicit-constructor)
  Real(long long v);     // NOLINT(google-explicit-constructor)
  explicit Real(const mpz_class& v);
  explicit Real(std::string_view decimal);

  Real(const Real& other);
  Real(Real&& other) noexcept;
  Real& operator=(const Real& other);
  Real& operator=(Real&& other) noexcept;
  ~Real();

  static void set_default_precision(mpfr_prec_t bits);
  static mpfr_prec_t default_precision();

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  Real& operator+=(const Real& o);
  Real& operator-=(const Real& o);
  Real& operator*=(const Real& o);
  Real& operator/=(const Real& o);
  Real& operator*=(long o);
  Real& operator/=(long o);

  /// Multiplies by 2^e exactly.
  Real& scale2(long e);

  Real operator-() const;

  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  /// Binary exponent e with |x| in [2^(e-1), 2^e); 0 for zero.
  long exponent2() const { return is_zero() || !is_finite() ? 0 : mpfr_get_exp(v_); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long double to_long_double() const { return mpfr_get_ld(v_, MPFR_RNDN); }
  long to_long_floor() const { return mpfr_get_si(v_, MPFR_RNDD); }
  /// Shortest decimal string that reads back to the same value at this precision.
  std::string str() const;
  /// Decimal string with a fixed number of significant digits.
  std::string str(int digits) const;

  void swap(Real& o) noexcept { mpfr_swap(v_, o.v_); }

  static Real pi();
  static Real ln2();
  static Real infinity(int sign = 1);
  /// 2^-(precision) scaled by the magnitude one: unit roundoff of the default precision.
  static Real epsilon();

  friend Real operator+(Real a, const Real& b) { return a += b; }
  friend Real operator-(Real a, const Real& b) { return a -= b; }
  friend Real operator*(Real a, const Real& b) { return a *= b; }
  friend Real operator/(Real a, const Real& b) { return a /= b; }

  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const Real& a, const Real& b);

 private:
  mpfr_t v_;
};

Real abs(const Real& x);
Real log(const Real& x);
Real exp(const Real& x);
Real cos(const Real& x);
Real sin(const Real& x);
Real sqrt(const Real& x);
Real floor(const Real& x);
Real round(const Real& x);
Real log1p(const Real& x);
Real fmax(const Real& a, const Real& b);
Real fmin(const Real& a, const Real& b);
/// cos(pi * x) with the argument reduced before multiplying by pi.
Real cos_pi(const Real& x);
/// sin(pi * x) with the argument reduced before multiplying by pi.
Real sin_pi(const Real& x);

/// Rounds a non-negative finite real to the nearest integer.
mpz_class to_mpz_round(const Real& x);

std::ostream& operator<<(std::ostream& os, const Real& x);

/// Sets the thread's default precision for the lifetime of the guard.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(mpfr_prec_t bits) : saved_(Real::default_precision()) {
    Real::set_default_precision(bits);
  }
  ~PrecisionGuard() { Real::set_default_precision(saved_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  mpfr_prec_t saved_;
};

}  // namespace amolab
