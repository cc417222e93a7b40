#pragma once

#include <map>
#include <optional>
#include <vector>

#include "sconn/rational.hpp"

namespace sconn {

using SparseVector = std::map<int, GaussianRational>;

/// Incremental exact row echelon form over Q(i). Each stored row has its
/// pivot as its smallest column, normalized to 1.
class EchelonBasis {
 public:
  struct Row {
    SparseVector coeffs;
    GaussianRational rhs;
  };

  /// Reduces (v, rhs) against the stored rows. Returns true when it added a
  /// new pivot; false when it reduced to 0 = r, in which case `residual`
  /// receives r.
  bool insert(SparseVector v, GaussianRational rhs = {}, GaussianRational* residual = nullptr) {
    reduce(v, rhs);
    if (v.empty()) {
      if (residual) *residual = rhs;
      return false;
    }
    const int pivot = v.begin()->first;
    const GaussianRational inv = v.begin()->second.inverse();
    for (auto& [c, x] : v) x *= inv;
    rhs *= inv;
    rows_.emplace(pivot, Row{std::move(v), std::move(rhs)});
    return true;
  }

  /// True when v lies in the span of the stored rows (rhs ignored).
  bool contains(SparseVector v) const {
    GaussianRational dummy;
    reduce(v, dummy);
    return v.empty();
  }

  int rank() const { return static_cast<int>(rows_.size()); }
  const std::map<int, Row>& rows() const { return rows_; }

  /// One solution with free variables set to zero.
  SparseVector back_substitute() const {
    SparseVector x;
    for (auto it = rows_.rbegin(); it != rows_.rend(); ++it) {
      const auto& [pivot, row] = *it;
      GaussianRational val = row.rhs;
      for (const auto& [c, a] : row.coeffs) {
        if (c == pivot) continue;
        auto xi = x.find(c);
        if (xi != x.end()) val -= a * xi->second;
      }
      if (!val.is_zero()) x[pivot] = std::move(val);
    }
    return x;
  }

  /// Basis of {x : rows . x = 0} over the columns [0, ncols).
  std::vector<SparseVector> nullspace(int ncols) const {
    // Fully reduce to RREF first.
    std::map<int, SparseVector> rref;
    for (auto it = rows_.rbegin(); it != rows_.rend(); ++it) {
      SparseVector v = it->second.coeffs;
      for (auto c = std::next(v.begin()); c != v.end();) {
        auto p = rref.find(c->first);
        if (p == rref.end()) {
          ++c;
          continue;
        }
        const GaussianRational f = c->second;
        const int col = c->first;
        for (const auto& [pc, pa] : p->second) {
          auto& slot = v[pc];
          slot -= f * pa;
        }
        for (auto e = v.begin(); e != v.end();) e = e->second.is_zero() ? v.erase(e) : std::next(e);
        c = v.upper_bound(col);
      }
      rref.emplace(it->first, std::move(v));
    }
    std::vector<SparseVector> basis;
    for (int f = 0; f < ncols; ++f) {
      if (rref.count(f)) continue;
      SparseVector x;
      x[f] = 1;
      for (const auto& [p, row] : rref) {
        auto c = row.find(f);
        if (c != row.end()) x[p] = -c->second;
      }
      basis.push_back(std::move(x));
    }
    return basis;
  }

 private:
  void reduce(SparseVector& v, GaussianRational& rhs) const {
    auto it = v.begin();
    while (it != v.end()) {
      auto p = rows_.find(it->first);
      if (p == rows_.end()) {
        ++it;
        continue;
      }
      const GaussianRational f = it->second;
      const int col = it->first;
      for (const auto& [c, a] : p->second.coeffs) {
        auto& slot = v[c];
        slot -= f * a;
      }
      rhs -= f * p->second.rhs;
      for (auto e = v.begin(); e != v.end();) e = e->second.is_zero() ? v.erase(e) : std::next(e);
      it = v.upper_bound(col);
    }
  }

  std::map<int, Row> rows_;
};

/// Solves sum_c A[r][c] x_c = b_r. Returns nullopt when inconsistent, else
/// the solution with free variables zero.
inline std::optional<SparseVector> solve_sparse(const std::vector<SparseVector>& rows, const std::vector<GaussianRational>& rhs,
                                                int* rank_out = nullptr) {
  EchelonBasis basis;
  bool consistent = true;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    GaussianRational residual;
    if (!basis.insert(rows[r], rhs[r], &residual) && !residual.is_zero()) consistent = false;
  }
  if (rank_out) *rank_out = basis.rank();
  if (!consistent) return std::nullopt;
  return basis.back_substitute();
}

}  // namespace sconn
