#pragma once

// Reference implementations that share no code paths with the library's
// kernels: dense matrices, Jacobi rotations, brute-force scans.

#include <vector>

#include "amolab/real.hpp"

namespace amolab::oracle {

using DenseD = std::vector<std::vector<double>>;
using DenseR = std::vector<std::vector<Real>>;

/// Tridiagonal AMO restriction with diagonal v - E and unit off-diagonals.
DenseD tridiagonal(const std::vector<double>& v, double energy = 0.0);
DenseR tridiagonal(const std::vector<Real>& v, const Real& energy);

struct JacobiResult {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // vectors[i] belongs to values[i]
};

/// Cyclic Jacobi rotations on a symmetric matrix.
JacobiResult jacobi(DenseD a, double tol = 1e-15, int max_sweeps = 100);

/// Determinant by Gaussian elimination with partial pivoting.
Real determinant(DenseR a);
/// Inverse by Gauss-Jordan with partial pivoting.
DenseR inverse(DenseR a);

/// ln max_{x in [-1,1]} prod_{j != i} |x - c_j| / |c_i - c_j| on a uniform grid.
double la_brute(const std::vector<double>& c, size_t i, long grid = 100000);

/// Direct sum of ln|sin pi(x + l alpha)| over l = 0..q-1 excluding the minimising l.
double sin_sum_direct(double x, const std::vector<double>& l_alpha_frac);

}  // namespace amolab::oracle
