#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "tdscan/error.hpp"

namespace tdscan {

using Matrix = std::vector<std::vector<double>>;

inline Matrix identity_matrix(std::size_t n) {
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j pairs with values[j]
};

// Cyclic Jacobi rotations for symmetric matrices. The inputs here are tiny
// (class counts, n <= ~10s), so robustness and determinism matter more than
// speed.
inline EigenDecomposition symmetric_eigen(Matrix a) {
  const std::size_t n = a.size();
  for (const auto& row : a) {
    if (row.size() != n) throw Error(ErrorKind::DimensionMismatch, "matrix not square");
  }
  Matrix v = identity_matrix(n);
  if (n == 0) return {{}, v};

  auto off_diagonal_sq = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) s += a[i][j] * a[i][j];
    }
    return s;
  };

  const double eps = 1e-14;
  for (int sweep = 0; sweep < 100 && off_diagonal_sq() > eps * eps; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) <= 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v[i][p], viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }

  EigenDecomposition dec;
  dec.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) dec.values[i] = a[i][i];

  // sort ascending, permuting eigenvector columns along
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return dec.values[x] < dec.values[y]; });

  std::vector<double> sorted_values(n);
  Matrix sorted_vectors(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    sorted_values[j] = dec.values[order[j]];
    // sign convention: largest-magnitude entry positive
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(v[i][order[j]]) > std::abs(v[arg][order[j]])) arg = i;
    }
    const double sign = v[arg][order[j]] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) sorted_vectors[i][j] = sign * v[i][order[j]];
  }
  dec.values = std::move(sorted_values);
  dec.vectors = std::move(sorted_vectors);
  return dec;
}

}  // namespace tdscan
