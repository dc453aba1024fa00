// Exact minimum-cost bipartite assignment (Kuhn-Munkres with potentials),
// plus a brute-force enumerator used as the test oracle.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "egoact/common.hpp"

namespace egoact {

struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> costs;  // row-major, rows*cols

  CostMatrix() = default;
  CostMatrix(int r, int c, std::vector<double> v) : rows(r), cols(c), costs(std::move(v)) {
    require(r >= 1 && c >= 1, "CostMatrix: need at least one row and column");
    require(static_cast<size_t>(r) * c == costs.size(), "CostMatrix: size mismatch");
  }

  double at(int r, int c) const { return costs[static_cast<size_t>(r) * cols + c]; }
  double& at(int r, int c) { return costs[static_cast<size_t>(r) * cols + c]; }
};

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), |pairs| = min(rows, cols)
  double total_cost = 0.0;
};

namespace detail {

// Jonker-style shortest augmenting path formulation; expects rows <= cols.
// Returns col index per row.
inline std::vector<int> kuhn_munkres_rows_le_cols(const CostMatrix& m) {
  const int n = m.rows;
  const int w = m.cols;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(w + 1, 0.0);
  std::vector<int> p(w + 1, 0), way(w + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(w + 1, inf);
    std::vector<char> used(w + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= w; ++j) {
        if (used[j]) continue;
        double cur = m.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= w; ++j) {
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
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= w; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

// Exact minimum-cost assignment covering min(rows, cols) pairs. Rectangular
// matrices are transposed internally so rows <= cols, then mapped back.
inline Assignment solve_assignment(const CostMatrix& m) {
  require(m.rows >= 1 && m.cols >= 1, "solve_assignment: empty matrix");
  for (double c : m.costs)
    require(std::isfinite(c), "solve_assignment: non-finite cost entry");

  bool transposed = m.rows > m.cols;
  CostMatrix work = m;
  if (transposed) {
    work = CostMatrix(m.cols, m.rows, std::vector<double>(m.costs.size()));
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < m.cols; ++c) work.at(c, r) = m.at(r, c);
  }

  std::vector<int> row_to_col = detail::kuhn_munkres_rows_le_cols(work);

  Assignment out;
  for (int r = 0; r < work.rows; ++r) {
    int c = row_to_col[r];
    if (transposed)
      out.pairs.emplace_back(c, r);
    else
      out.pairs.emplace_back(r, c);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (auto [r, c] : out.pairs) out.total_cost += m.at(r, c);
  return out;
}

// Exhaustive oracle over all injections of the smaller side into the larger.
// No pruning: entries may be negative, so every branch is enumerated. Ties
// break toward the lexicographically smallest sorted pair list.
inline Assignment brute_force_assignment(const CostMatrix& m) {
  require(std::min(m.rows, m.cols) <= 8 && std::max(m.rows, m.cols) <= 10,
          "brute_force_assignment: matrix too large");
  for (double c : m.costs)
    require(std::isfinite(c), "brute_force_assignment: non-finite cost entry");

  const int k = std::min(m.rows, m.cols);
  const int big = std::max(m.rows, m.cols);
  const bool rows_small = m.rows <= m.cols;

  Assignment best;
  best.total_cost = std::numeric_limits<double>::infinity();
  std::vector<int> pick(k);
  std::vector<char> taken(big, 0);

  // depth-first over injections small-index -> large-index
  std::function<void(int, double)> rec = [&](int i, double acc) {
    if (i == k) {
      std::vector<std::pair<int, int>> pairs(k);
      for (int s = 0; s < k; ++s)
        pairs[s] = rows_small ? std::make_pair(s, pick[s]) : std::make_pair(pick[s], s);
      std::sort(pairs.begin(), pairs.end());
      if (acc < best.total_cost || (acc == best.total_cost && pairs < best.pairs)) {
        best.pairs = pairs;
        best.total_cost = acc;
      }
      return;
    }
    for (int j = 0; j < big; ++j) {
      if (taken[j]) continue;
      taken[j] = 1;
      pick[i] = j;
      double c = rows_small ? m.at(i, j) : m.at(j, i);
      rec(i + 1, acc + c);
      taken[j] = 0;
    }
  };
  rec(0, 0.0);
  return best;
}

}  // namespace egoact
