#include <cmath>
#include <limits>

#include "oracle.hpp"

namespace amolab::oracle {

double la_brute(const std::vector<double>& c, size_t i, long grid) {
  long double denom = 0;
  for (size_t j = 0; j < c.size(); ++j)
    if (j != i) denom += std::log(std::fabs(static_cast<long double>(c[i]) - c[j]));
  long double best = -std::numeric_limits<long double>::infinity();
  for (long g = 0; g <= grid; ++g) {
    long double x = -1.0L + 2.0L * g / grid;
    long double s = 0;
    for (size_t j = 0; j < c.size(); ++j)
      if (j != i) s += std::log(std::fabs(x - c[j]));
    best = std::max(best, s);
  }
  return static_cast<double>(best - denom);
}

double sin_sum_direct(double x, const std::vector<double>& l_alpha_frac) {
  size_t skip = 0;
  double smallest = 2;
  std::vector<double> terms;
  for (size_t l = 0; l < l_alpha_frac.size(); ++l) {
    double s = std::fabs(std::sin(M_PI * (x + l_alpha_frac[l])));
    terms.push_back(s);
    if (s < smallest) {
      smallest = s;
      skip = l;
    }
  }
  double sum = 0;
  for (size_t l = 0; l < terms.size(); ++l)
    if (l != skip) sum += std::log(terms[l]);
  return sum;
}

}  // namespace amolab::oracle
