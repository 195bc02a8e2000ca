#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "envcrime/grid.hpp"

namespace envcrime {

/// Uniform grid of loot values b_m = min B + m (max B - min B) / n over the
/// inside benefit range. A constant benefit collapses to one node.
class LootGrid {
 public:
  LootGrid(const ScalarField& benefit, const DomainMask& mask, int n) {
    if (n < 1) throw std::invalid_argument("LootGrid: need at least one interval");
    double lo = kInf, hi = -kInf;
    for (std::size_t k = 0; k < benefit.size(); ++k)
      if (mask.inside(k)) {
        lo = std::min(lo, benefit[k]);
        hi = std::max(hi, benefit[k]);
      }
    lo_ = lo;
    hi_ = hi;
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(hi))) {
      nodes_ = {hi};
      return;
    }
    n_ = n;
    nodes_.resize(n + 1);
    for (int m = 0; m <= n; ++m) nodes_[m] = lo + m * (hi - lo) / n;
    nodes_[n] = hi;
  }

  double min() const { return lo_; }
  double max() const { return hi_; }
  int intervals() const { return n_; }
  bool degenerate() const { return nodes_.size() == 1; }
  const std::vector<double>& nodes() const { return nodes_; }
  double width() const { return degenerate() ? 0.0 : (hi_ - lo_) / n_; }

  /// Index m with b in (b_m, b_{m+1}]; the range minimum maps to 0.
  int bracket(double b) const {
    if (degenerate()) return 0;
    if (b < lo_ - 1e-12 * std::max(1.0, std::abs(lo_)) || b > hi_ + 1e-12 * std::max(1.0, std::abs(hi_)))
      throw std::out_of_range("LootGrid: benefit outside the grid span");
    int m = static_cast<int>(std::ceil((b - lo_) / (hi_ - lo_) * n_)) - 1;
    m = std::clamp(m, 0, n_ - 1);
    while (m > 0 && b <= nodes_[m]) --m;
    while (m < n_ - 1 && b > nodes_[m + 1]) ++m;
    return m;
  }

  /// Upper node index of the bracket (equal to the lower one when degenerate).
  int upper(int m) const { return degenerate() ? 0 : m + 1; }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  int n_ = 0;
  std::vector<double> nodes_;
};

}  // namespace envcrime
