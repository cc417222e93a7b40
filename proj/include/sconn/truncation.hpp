#pragma once

#include <compare>
#include <map>
#include <optional>
#include <vector>

#include "sconn/linalg.hpp"
#include "sconn/supermodule.hpp"

namespace sconn {

/// All monomials z^a zbar^b of total degree <= max_degree in a polynomial
/// ring, in a fixed deterministic order.
inline std::vector<Monomial> enumerate_monomials(const RingSpec& ring, int max_degree) {
  if (!ring.is_poly()) throw PreconditionError("monomial truncation needs a polynomial ring");
  std::vector<Monomial> out;
  const int vars = 2 * ring.n;
  std::vector<int> e(static_cast<std::size_t>(vars), 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == vars) {
      Monomial m;
      for (int i = 0; i < ring.n; ++i) {
        m.a[i] = static_cast<std::uint16_t>(e[static_cast<std::size_t>(i)]);
        m.b[i] = static_cast<std::uint16_t>(e[static_cast<std::size_t>(ring.n + i)]);
      }
      out.push_back(m);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      e[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, left - v);
    }
    e[static_cast<std::size_t>(pos)] = 0;
  };
  if (max_degree >= 0) rec(rec, 0, max_degree);
  return out;
}

/// All FormKeys of type (p, q) in n variables.
inline std::vector<FormKey> enumerate_form_keys(int n, int p, int q) {
  std::vector<FormKey> out;
  for (unsigned I = 0; I < (1u << n); ++I)
    for (unsigned J = 0; J < (1u << n); ++J) {
      FormKey k{static_cast<std::uint8_t>(I), static_cast<std::uint8_t>(J)};
      if (k.p() == p && k.q() == q) out.push_back(k);
    }
  return out;
}

/// Scalar coordinate of an operator entry (or a section component when col
/// is 0).
struct EntryCoord {
  int row = 0;
  int col = 0;
  FormKey key;
  Monomial mono;
  friend auto operator<=>(const EntryCoord&, const EntryCoord&) = default;
  friend bool operator==(const EntryCoord&, const EntryCoord&) = default;
};

/// Assigns dense column ids to coordinates on first use.
template <typename Key>
class CoordinateIndex {
 public:
  int id(const Key& k) {
    auto [it, inserted] = ids_.try_emplace(k, static_cast<int>(keys_.size()));
    if (inserted) keys_.push_back(k);
    return it->second;
  }
  std::optional<int> find(const Key& k) const {
    auto it = ids_.find(k);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const Key& key(int id) const { return keys_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(keys_.size()); }

 private:
  std::map<Key, int> ids_;
  std::vector<Key> keys_;
};

inline SparseVector to_coords(const SuperOperator& t, CoordinateIndex<EntryCoord>& index) {
  SparseVector v;
  for (int i = 0; i < t.rows(); ++i)
    for (int k = 0; k < t.cols(); ++k)
      for (const auto& [fk, c] : t.at(i, k).terms())
        for (const auto& [mono, x] : c.terms()) v[index.id({i, k, fk, mono})] += x;
  return v;
}

inline SparseVector to_coords(const Form& f, CoordinateIndex<EntryCoord>& index) {
  SparseVector v;
  for (const auto& [fk, c] : f.terms())
    for (const auto& [mono, x] : c.terms()) v[index.id({0, 0, fk, mono})] += x;
  return v;
}

/// Builds row vectors (one per target coordinate) from column images.
inline std::vector<SparseVector> transpose_columns(const std::vector<SparseVector>& columns, int nrows) {
  std::vector<SparseVector> rows(static_cast<std::size_t>(nrows));
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (const auto& [r, x] : columns[c]) rows[static_cast<std::size_t>(r)][static_cast<int>(c)] = x;
  return rows;
}

/// Finds coefficients x with sum_c x_c images[c] = rhs. All vectors live in
/// the same coordinate space of size `ncoords`.
inline std::optional<SparseVector> solve_columns(const std::vector<SparseVector>& images, const SparseVector& rhs, int ncoords,
                                                 int* rank_out = nullptr) {
  std::vector<SparseVector> rows = transpose_columns(images, ncoords);
  std::vector<GaussianRational> b(static_cast<std::size_t>(ncoords));
  for (const auto& [r, x] : rhs) b.at(static_cast<std::size_t>(r)) = x;
  return solve_sparse(rows, b, rank_out);
}

}  // namespace sconn
