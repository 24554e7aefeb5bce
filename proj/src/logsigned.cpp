#include "amolab/logsigned.hpp"

#include <stdexcept>

namespace amolab {

LogSigned LogSigned::from(const Real& x) {
  if (x.is_zero()) return zero();
  return {x.sign() > 0 ? 1 : -1, log(abs(x))};
}

LogSigned LogSigned::from_scaled(const Real& mant, long exp2) {
  LogSigned out = from(mant);
  if (!out.is_zero() && exp2 != 0) {
    Real shift = Real::ln2();
    shift *= exp2;
    out.logmag += shift;
  }
  return out;
}

Real LogSigned::value() const {
  if (sign == 0) return Real(0);
  Real v = exp(logmag);
  return sign > 0 ? v : -v;
}

LogSigned operator*(const LogSigned& a, const LogSigned& b) {
  if (a.is_zero() || b.is_zero()) return LogSigned::zero();
  return {a.sign * b.sign, a.logmag + b.logmag};
}

LogSigned operator/(const LogSigned& a, const LogSigned& b) {
  if (b.is_zero()) throw std::domain_error("LogSigned division by zero");
  if (a.is_zero()) return LogSigned::zero();
  return {a.sign * b.sign, a.logmag - b.logmag};
}

std::string to_string(const LogSigned& x) {
  if (x.is_zero()) return "0";
  return std::string(x.sign > 0 ? "+" : "-") + "exp(" + x.logmag.str(20) + ")";
}

}  // namespace amolab
