#pragma once

#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

namespace speq::detail {

// Gauss-Jordan on an augmented system (m rows, m+1 columns), partial pivoting;
// solutions land in column m. False when a pivot degenerates.
inline bool gauss_solve(std::vector<std::vector<double>>& aug) {
  const int m = int(aug.size());
  for (int c = 0; c < m; ++c) {
    int piv = c;
    for (int r = c + 1; r < m; ++r) {
      if (std::abs(aug[r][c]) > std::abs(aug[piv][c])) piv = r;
    }
    if (std::abs(aug[piv][c]) < 1e-13) return false;
    std::swap(aug[c], aug[piv]);
    for (int r = 0; r < m; ++r) {
      if (r == c) continue;
      double f = aug[r][c] / aug[c][c];
      if (f == 0.0) continue;
      for (int k = c; k <= m; ++k) aug[r][k] -= f * aug[c][k];
    }
  }
  for (int r = 0; r < m; ++r) aug[r][m] /= aug[r][r];
  return true;
}

// Dense inverse by the same elimination; false when singular.
inline bool gauss_invert(std::vector<std::vector<double>> a,
                         std::vector<std::vector<double>>& inv) {
  const int m = int(a.size());
  inv.assign(size_t(m), std::vector<double>(size_t(m), 0.0));
  for (int i = 0; i < m; ++i) inv[i][i] = 1.0;
  for (int c = 0; c < m; ++c) {
    int piv = c;
    for (int r = c + 1; r < m; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-13) return false;
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    double d = a[c][c];
    for (int k = 0; k < m; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (int r = 0; r < m; ++r) {
      if (r == c) continue;
      double f = a[r][c];
      if (f == 0.0) continue;
      for (int k = 0; k < m; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return true;
}

// Positive value of SPECTRUM_EQ_MAXITER when set, else 0 (no override).
inline int env_iteration_cap() {
  const char* s = std::getenv("SPECTRUM_EQ_MAXITER");
  if (!s || !*s) return 0;
  int v = std::atoi(s);
  return v > 0 ? v : 0;
}

}  // namespace speq::detail
