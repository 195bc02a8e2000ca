#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "envcrime/grid.hpp"

namespace envcrime {

/// Smallest accepted neighbor value along each axis (+inf when none).
struct AxisValues {
  double x = kInf;
  double y = kInf;
};

struct MarchResult {
  std::vector<double> values;
  std::vector<std::size_t> order;  // inside gridpoints in acceptance order
};

namespace detail {

struct HeapEntry {
  double value;
  std::size_t index;
  // Min-heap on (value, index): equal values resolve by lexicographic gridpoint index.
  bool operator>(const HeapEntry& o) const {
    return value > o.value || (value == o.value && index > o.index);
  }
};

}  // namespace detail

/// Dijkstra-like one-pass solver for causal upwind schemes with zero data on
/// every outside gridpoint. `update(idx, axis_values)` returns the tentative
/// value at an inside point from its accepted neighbors; it must be
/// non-decreasing in each argument and never below the neighbors it uses.
/// Points where `passable` is false are never accepted and stay +inf.
template <class Update>
MarchResult fast_march(const DomainMask& mask, const std::vector<std::uint8_t>& passable, Update&& update) {
  const Grid2D& g = mask.grid();
  const std::size_t n = g.size();
  enum : std::uint8_t { kFar, kTrial, kAccepted };

  MarchResult res;
  res.values.assign(n, kInf);
  std::vector<std::uint8_t> state(n, kFar);
  for (std::size_t k = 0; k < n; ++k)
    if (!mask.inside(k)) {
      res.values[k] = 0.0;
      state[k] = kAccepted;
    }

  auto axis_values = [&](int i, int j) {
    AxisValues a;
    auto take = [&](int ii, int jj, double& slot) {
      if (!g.valid(ii, jj)) return;
      std::size_t q = g.index(ii, jj);
      if (state[q] == kAccepted && res.values[q] < slot) slot = res.values[q];
    };
    take(i + 1, j, a.x);
    take(i - 1, j, a.x);
    take(i, j + 1, a.y);
    take(i, j - 1, a.y);
    return a;
  };

  std::priority_queue<detail::HeapEntry, std::vector<detail::HeapEntry>, std::greater<>> heap;
  constexpr int di[] = {1, -1, 0, 0};
  constexpr int dj[] = {0, 0, 1, -1};

  auto refresh = [&](int i, int j) {
    std::size_t p = g.index(i, j);
    if (state[p] == kAccepted || !passable[p]) return;
    double v = update(p, axis_values(i, j));
    if (v < res.values[p]) {
      res.values[p] = v;
      state[p] = kTrial;
      heap.push({v, p});
    }
  };

  for (int j = 0; j < g.rows(); ++j)
    for (int i = 0; i < g.cols(); ++i) {
      if (!mask.inside(i, j)) continue;
      for (int d = 0; d < 4; ++d) {
        int ii = i + di[d], jj = j + dj[d];
        if (g.valid(ii, jj) && !mask.inside(ii, jj)) {
          refresh(i, j);
          break;
        }
      }
    }

  res.order.reserve(mask.inside_count());
  while (!heap.empty()) {
    auto [v, p] = heap.top();
    heap.pop();
    if (state[p] == kAccepted || v != res.values[p]) continue;
    state[p] = kAccepted;
    res.order.push_back(p);
    const int i = g.col_of(p), j = g.row_of(p);
    for (int d = 0; d < 4; ++d) {
      int ii = i + di[d], jj = j + dj[d];
      if (g.valid(ii, jj)) refresh(ii, jj);
    }
  }
  return res;
}

}  // namespace envcrime
