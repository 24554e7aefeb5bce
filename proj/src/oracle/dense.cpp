#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace amolab::oracle {

DenseD tridiagonal(const std::vector<double>& v, double energy) {
  const size_t n = v.size();
  DenseD a(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    a[i][i] = v[i] - energy;
    if (i + 1 < n) a[i][i + 1] = a[i + 1][i] = 1.0;
  }
  return a;
}

DenseR tridiagonal(const std::vector<Real>& v, const Real& energy) {
  const size_t n = v.size();
  DenseR a(n, std::vector<Real>(n, Real(0)));
  for (size_t i = 0; i < n; ++i) {
    a[i][i] = v[i] - energy;
    if (i + 1 < n) a[i][i + 1] = a[i + 1][i] = Real(1);
  }
  return a;
}

JacobiResult jacobi(DenseD a, double tol, int max_sweeps) {
  const size_t n = a.size();
  DenseD v(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0, total = 0;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    if (off <= tol * tol * total) break;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (size_t k = 0; k < n; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t x, size_t y) { return a[x][x] < a[y][y]; });
  JacobiResult r;
  for (size_t i : idx) {
    r.values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (size_t k = 0; k < n; ++k) col[k] = v[k][i];
    r.vectors.push_back(std::move(col));
  }
  return r;
}

Real determinant(DenseR a) {
  const size_t n = a.size();
  Real det(1);
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < n; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (a[piv][c].is_zero()) return Real(0);
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (size_t r = c + 1; r < n; ++r) {
      Real f = a[r][c] / a[c][c];
      for (size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

DenseR inverse(DenseR a) {
  const size_t n = a.size();
  DenseR inv(n, std::vector<Real>(n, Real(0)));
  for (size_t i = 0; i < n; ++i) inv[i][i] = Real(1);
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < n; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (a[piv][c].is_zero()) throw std::domain_error("singular matrix");
    std::swap(a[piv], a[c]);
    std::swap(inv[piv], inv[c]);
    Real p = a[c][c];
    for (size_t k = 0; k < n; ++k) {
      a[c][k] /= p;
      inv[c][k] /= p;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c].is_zero()) continue;
      Real f = a[r][c];
      for (size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

}  // namespace amolab::oracle
