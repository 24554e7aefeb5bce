#pragma once

#include <string>

#include "amolab/real.hpp"

namespace amolab {

/// sign * exp(logmag), for quantities whose magnitude is far outside the
/// double range. Zero is {0, -inf}.
struct LogSigned {
  int sign = 0;
  Real logmag = Real::infinity(-1);

  static LogSigned zero() { return {}; }
  static LogSigned one() { return {1, Real(0)}; }
  static LogSigned from(const Real& x);
  /// mant * 2^exp2.
  static LogSigned from_scaled(const Real& mant, long exp2);

  bool is_zero() const { return sign == 0; }
  /// Converts back to a plain Real; only meaningful when logmag is in range.
  Real value() const;

  friend LogSigned operator*(const LogSigned& a, const LogSigned& b);
  friend LogSigned operator/(const LogSigned& a, const LogSigned& b);
};

std::string to_string(const LogSigned& x);

}  // namespace amolab
