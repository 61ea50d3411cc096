#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "randeriv/types.hpp"

namespace randeriv {

/**
 * @brief Minimum-cost perfect assignment (Hungarian method, O(n^3)).
 *
 * `cost` is row-major n x n. Returns assignment[row] = column.
 */
inline std::vector<std::size_t> hungarian_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw Error(ErrorKind::InvalidArgument, "cost matrix must be n x n");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

/// Largest distance in the minimum-total-distance matching of two equal-size point lists.
inline double max_matched_distance(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "matched distance needs equal-size sets");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = std::abs(a[i] - b[j]);
  const auto assignment = hungarian_assignment(cost, n);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, cost[i * n + assignment[i]]);
  return worst;
}

/// Mean distance of the optimal matching: exact planar W1 between equal-size uniform atomic measures.
inline double mean_matched_distance(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "matched distance needs equal-size sets");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = std::abs(a[i] - b[j]);
  const auto assignment = hungarian_assignment(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + assignment[i]];
  return total / static_cast<double>(n);
}

}  // namespace randeriv
