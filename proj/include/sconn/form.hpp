#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <string>

#include "sconn/scalar.hpp"

namespace sconn {

/// Basis monomial dz^I ^ dzbar^J. Bit i-1 of `dz` stands for dz^i. Canonical
/// generator order is all dz factors ascending, then all dzbar ascending.
struct FormKey {
  std::uint8_t dz = 0;
  std::uint8_t dzbar = 0;

  int p() const { return std::popcount(dz); }
  int q() const { return std::popcount(dzbar); }
  int degree() const { return p() + q(); }

  friend auto operator<=>(const FormKey&, const FormKey&) = default;
  friend bool operator==(const FormKey&, const FormKey&) = default;
};

namespace detail {

// Parity of #{(x, y) : x in xs, y in ys, x > y}.
inline int inversion_parity(std::uint8_t xs, std::uint8_t ys) {
  int count = 0;
  for (int x = 0; x < 8; ++x) {
    if (!(xs >> x & 1)) continue;
    count += std::popcount(static_cast<unsigned>(ys & ((1u << x) - 1)));
  }
  return count & 1;
}

}  // namespace detail

/// Sign and key of the product of two basis monomials; sign 0 when a
/// generator repeats.
inline int wedge_keys(FormKey x, FormKey y, FormKey& out) {
  if ((x.dz & y.dz) || (x.dzbar & y.dzbar)) return 0;
  int parity = (x.q() * y.p()) & 1;
  parity ^= detail::inversion_parity(x.dz, y.dz);
  parity ^= detail::inversion_parity(x.dzbar, y.dzbar);
  out = FormKey{static_cast<std::uint8_t>(x.dz | y.dz), static_cast<std::uint8_t>(x.dzbar | y.dzbar)};
  return parity ? -1 : 1;
}

enum class Dolbeault { Del, Delbar, D };

/// Element of the bigraded algebra of forms with Scalar coefficients.
class Form {
 public:
  using TermMap = std::map<FormKey, Scalar>;

  explicit Form(RingSpec ring = RingSpec{}) : ring_(ring) {}
  explicit Form(const Scalar& f) : ring_(f.ring()) { add(FormKey{}, f); }

  static Form basis(RingSpec ring, FormKey key, const Scalar& coeff) {
    Form f(ring);
    f.add(key, coeff);
    return f;
  }
  static Form basis(RingSpec ring, FormKey key) { return basis(ring, key, Scalar::one(ring)); }
  static Form dz(RingSpec ring, int i) { return basis(ring, FormKey{bit(ring, i), 0}); }
  static Form dzbar(RingSpec ring, int i) { return basis(ring, FormKey{0, bit(ring, i)}); }
  static Form constant(RingSpec ring, const GaussianRational& c) { return Form(Scalar::constant(ring, c)); }

  const RingSpec& ring() const { return ring_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// The coefficient of a basis monomial (zero if absent).
  Scalar coeff(FormKey key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? Scalar(ring_) : it->second;
  }
  /// The 0-form part as a Scalar.
  Scalar scalar_part() const { return coeff(FormKey{}); }

  void add(FormKey key, const Scalar& c) {
    require_same_ring(ring_, c.ring());
    if (c.is_zero()) return;
    if (key.dz >> ring_.n || key.dzbar >> ring_.n) throw PreconditionError("form index beyond n");
    auto [it, inserted] = terms_.try_emplace(key, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  Form& operator+=(const Form& o) {
    require_same_ring(ring_, o.ring_);
    for (const auto& [k, c] : o.terms_) add(k, c);
    return *this;
  }
  Form& operator-=(const Form& o) {
    require_same_ring(ring_, o.ring_);
    for (const auto& [k, c] : o.terms_) add(k, -c);
    return *this;
  }
  Form operator-() const {
    Form r = *this;
    for (auto& [k, c] : r.terms_) c = -c;
    return r;
  }
  Form& operator*=(const GaussianRational& c) {
    if (c.is_zero()) terms_.clear();
    for (auto& [k, v] : terms_) v *= c;
    return *this;
  }
  Form& operator*=(const Scalar& s) {
    require_same_ring(ring_, s.ring());
    TermMap out;
    for (auto& [k, v] : terms_) {
      Scalar p = v * s;
      if (!p.is_zero()) out.emplace(k, std::move(p));
    }
    terms_ = std::move(out);
    return *this;
  }

  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(Form a, const GaussianRational& c) { return a *= c; }
  friend Form operator*(const GaussianRational& c, Form a) { return a *= c; }
  friend Form operator*(const Scalar& s, Form a) { return a *= s; }
  friend Form operator*(Form a, const Scalar& s) { return a *= s; }

  friend bool operator==(const Form& x, const Form& y) { return x.ring_ == y.ring_ && x.terms_ == y.terms_; }

  /// Graded product with Koszul signs from reordering generators.
  friend Form wedge(const Form& x, const Form& y) {
    require_same_ring(x.ring_, y.ring_);
    Form r(x.ring_);
    for (const auto& [kx, cx] : x.terms_) {
      for (const auto& [ky, cy] : y.terms_) {
        FormKey k;
        const int s = wedge_keys(kx, ky, k);
        if (s == 0) continue;
        Scalar c = cx * cy;
        r.add(k, s > 0 ? c : -c);
      }
    }
    return r;
  }

  /// del, delbar or d = del + delbar.
  Form dolbeault(Dolbeault kind) const {
    Form r(ring_);
    for (const auto& [k, c] : terms_) {
      for (int i = 1; i <= ring_.n; ++i) {
        const std::uint8_t b = static_cast<std::uint8_t>(1u << (i - 1));
        if (kind != Dolbeault::Delbar && !(k.dz & b)) {
          Scalar dc = c.dz(i);
          if (!dc.is_zero()) {
            FormKey out;
            const int s = wedge_keys(FormKey{b, 0}, k, out);
            r.add(out, s > 0 ? dc : -dc);
          }
        }
        if (kind != Dolbeault::Del && !(k.dzbar & b)) {
          Scalar dc = c.dzbar(i);
          if (!dc.is_zero()) {
            FormKey out;
            const int s = wedge_keys(FormKey{0, b}, k, out);
            r.add(out, s > 0 ? dc : -dc);
          }
        }
      }
    }
    return r;
  }
  Form del() const { return dolbeault(Dolbeault::Del); }
  Form delbar() const { return dolbeault(Dolbeault::Delbar); }
  Form d() const { return dolbeault(Dolbeault::D); }

  /// conj(f dz^I dzbar^J) = conj(f) dzbar^I dz^J, reordered to canonical form.
  Form conj() const {
    Form r(ring_);
    for (const auto& [k, c] : terms_) {
      const bool odd = (k.p() * k.q()) & 1;
      Scalar cc = c.conj();
      r.add(FormKey{k.dzbar, k.dz}, odd ? -cc : cc);
    }
    return r;
  }

  /// Projection onto type (p, q).
  Form component(int p, int q) const {
    if (p < 0 || q < 0 || p > ring_.n || q > ring_.n) throw PreconditionError("component type out of range");
    Form r(ring_);
    for (const auto& [k, c] : terms_)
      if (k.p() == p && k.q() == q) r.terms_.emplace(k, c);
    return r;
  }
  /// Projection onto total degree `deg`.
  Form degree_part(int deg) const {
    Form r(ring_);
    for (const auto& [k, c] : terms_)
      if (k.degree() == deg) r.terms_.emplace(k, c);
    return r;
  }

  /// Keeps only monomials containing (contains = true) or avoiding dzbar^m.
  Form filter_dzbar(int m, bool contains) const {
    const std::uint8_t b = static_cast<std::uint8_t>(1u << (m - 1));
    Form r(ring_);
    for (const auto& [k, c] : terms_)
      if (static_cast<bool>(k.dzbar & b) == contains) r.terms_.emplace(k, c);
    return r;
  }

  /// Applies a coefficient-wise map; keys are unchanged.
  template <typename Fn>
  Form map_coeffs(Fn&& fn, RingSpec target) const {
    Form r(target);
    for (const auto& [k, c] : terms_) r.add(k, fn(c));
    return r;
  }
  Form map_coeffs_same(auto&& fn) const { return map_coeffs(fn, ring_); }

  Form in_ring(RingSpec target) const {
    return map_coeffs([&](const Scalar& s) { return s.in_ring(target); }, target);
  }
  Form standard_part() const {
    return map_coeffs([](const Scalar& s) { return s.standard_part(); }, ring_.with_dual(false));
  }
  Form eps_part() const {
    return map_coeffs([](const Scalar& s) { return s.eps_part(); }, ring_.with_dual(false));
  }

  bool all_coeffs(auto&& pred) const {
    for (const auto& [k, c] : terms_)
      if (!pred(k, c)) return false;
    return true;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [k, c] : terms_) {
      if (!out.empty()) out += " + ";
      out += "[" + c.str() + "]";
      for (int i = 0; i < ring_.n; ++i)
        if (k.dz >> i & 1) out += " dz" + std::to_string(i + 1);
      for (int i = 0; i < ring_.n; ++i)
        if (k.dzbar >> i & 1) out += " dzb" + std::to_string(i + 1);
    }
    return out;
  }

 private:
  static std::uint8_t bit(const RingSpec& ring, int i) {
    if (i < 1 || i > ring.n) throw PreconditionError("form index out of range");
    return static_cast<std::uint8_t>(1u << (i - 1));
  }

  RingSpec ring_;
  TermMap terms_;
};

}  // namespace sconn
