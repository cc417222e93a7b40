#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "sconn/error.hpp"
#include "sconn/rational.hpp"

namespace sconn {

/// Largest number of complex variables a polynomial ring may carry.
inline constexpr int kMaxVars = 4;

enum class RingKind : std::uint8_t { Poly, P1 };

/// Which function ring models the smooth functions. `Poly` is the polydisc
/// model C[z, zbar] in n variables; `P1` is the one-variable compact model
/// spanned by z^a zbar^b (1+z zbar)^(-m). `dual` adjoins eps with eps^2 = 0.
struct RingSpec {
  RingKind kind = RingKind::Poly;
  int n = 1;
  bool dual = false;

  static RingSpec poly(int n, bool dual = false) {
    if (n < 1 || n > kMaxVars) throw PreconditionError("polynomial ring needs 1 <= n <= " + std::to_string(kMaxVars));
    return {RingKind::Poly, n, dual};
  }
  static RingSpec p1(bool dual = false) { return {RingKind::P1, 1, dual}; }

  RingSpec with_dual(bool d) const { return {kind, n, d}; }
  bool is_poly() const { return kind == RingKind::Poly; }
  bool is_p1() const { return kind == RingKind::P1; }

  friend bool operator==(const RingSpec&, const RingSpec&) = default;

  std::string str() const {
    std::string s = is_p1() ? "P1" : "Poly(" + std::to_string(n) + ")";
    return dual ? s + "[eps]" : s;
  }
};

inline void require_same_ring(const RingSpec& a, const RingSpec& b) {
  if (!(a == b)) throw RingMismatch(a.str() + " vs " + b.str());
}

/// Monomial key z^a zbar^b (1+z zbar)^(-m) eps^e. For polynomial rings m is
/// always 0.
struct Monomial {
  std::array<std::uint16_t, kMaxVars> a{};
  std::array<std::uint16_t, kMaxVars> b{};
  std::int32_t m = 0;
  bool eps = false;

  int degree() const {
    int d = 0;
    for (int i = 0; i < kMaxVars; ++i) d += a[i] + b[i];
    return d;
  }
  bool holomorphic() const {
    for (auto e : b)
      if (e) return false;
    return m == 0;
  }

  friend auto operator<=>(const Monomial&, const Monomial&) = default;
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// Exact element of the coefficient ring, kept in canonical form: no zero
/// coefficients, and in the P1 ring no key with a, b, m all positive (such a
/// key still contains a removable factor of 1 + z zbar).
class Scalar {
 public:
  using TermMap = std::map<Monomial, GaussianRational>;

  explicit Scalar(RingSpec ring = RingSpec{}) : ring_(ring) {}

  static Scalar constant(RingSpec ring, const GaussianRational& c) {
    Scalar s(ring);
    s.add_term(Monomial{}, c);
    return s;
  }
  static Scalar one(RingSpec ring) { return constant(ring, 1); }

  /// z_i (1-based index).
  static Scalar z(RingSpec ring, int i = 1) {
    check_index(ring, i);
    Monomial k;
    k.a[i - 1] = 1;
    return from_key(ring, k);
  }
  static Scalar zbar(RingSpec ring, int i = 1) {
    check_index(ring, i);
    Monomial k;
    k.b[i - 1] = 1;
    return from_key(ring, k);
  }
  static Scalar eps(RingSpec ring) {
    if (!ring.dual) throw PreconditionError("eps requires a dual ring");
    Monomial k;
    k.eps = true;
    return from_key(ring, k);
  }
  /// (1 + z zbar)^(-m) for any integer m; negative m expands binomially.
  static Scalar p1_weight(RingSpec ring, int m) {
    if (!ring.is_p1()) throw PreconditionError("p1_weight needs the P1 ring");
    Scalar s(ring);
    if (m >= 0) {
      Monomial k;
      k.m = m;
      s.add_term(k, 1);
      return s;
    }
    mpz_class binom = 1;
    for (int j = 0; j <= -m; ++j) {
      Monomial k;
      k.a[0] = k.b[0] = static_cast<std::uint16_t>(j);
      s.add_term(k, GaussianRational(Rational(binom)));
      binom = binom * (-m - j) / (j + 1);
    }
    return s;
  }
  static Scalar from_key(RingSpec ring, const Monomial& key, const GaussianRational& c = 1) {
    Scalar s(ring);
    s.add_term(key, c);
    return s;
  }

  const RingSpec& ring() const { return ring_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Monomial{}); }
  GaussianRational constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? GaussianRational{} : it->second;
  }
  bool holomorphic() const {
    for (const auto& [k, c] : terms_)
      if (!k.holomorphic()) return false;
    return true;
  }
  int degree() const {
    int d = -1;
    for (const auto& [k, c] : terms_) d = std::max(d, k.degree());
    return d;
  }

  /// Adds c times the key, reducing P1 keys to canonical form.
  void add_term(const Monomial& key, const GaussianRational& c) {
    if (c.is_zero()) return;
    if (key.eps && !ring_.dual) throw RingMismatch("eps term in non-dual ring " + ring_.str());
    if (ring_.is_poly()) {
      if (key.m != 0) throw RingMismatch("denominator power in polynomial ring");
      for (int i = ring_.n; i < kMaxVars; ++i)
        if (key.a[i] || key.b[i]) throw RingMismatch("variable index beyond n in " + ring_.str());
    } else {
      if (key.m < 0) throw RingMismatch("negative denominator power");
      for (int i = 1; i < kMaxVars; ++i)
        if (key.a[i] || key.b[i]) throw RingMismatch("P1 ring has one variable");
      if (key.a[0] > 0 && key.b[0] > 0 && key.m > 0) {
        // z zbar = (1 + z zbar) - 1
        Monomial lower = key;
        --lower.a[0];
        --lower.b[0];
        Monomial absorbed = lower;
        --absorbed.m;
        add_term(absorbed, c);
        add_term(lower, -c);
        return;
      }
    }
    auto [it, inserted] = terms_.try_emplace(key, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  Scalar& operator+=(const Scalar& o) {
    require_same_ring(ring_, o.ring_);
    for (const auto& [k, c] : o.terms_) add_raw(k, c);
    return *this;
  }
  Scalar& operator-=(const Scalar& o) {
    require_same_ring(ring_, o.ring_);
    for (const auto& [k, c] : o.terms_) add_raw(k, -c);
    return *this;
  }
  Scalar operator-() const {
    Scalar r = *this;
    for (auto& [k, c] : r.terms_) c = -c;
    return r;
  }
  Scalar& operator*=(const GaussianRational& c) {
    if (c.is_zero()) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, v] : terms_) v *= c;
    return *this;
  }

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const GaussianRational& c) { return a *= c; }
  friend Scalar operator*(const GaussianRational& c, Scalar a) { return a *= c; }

  friend Scalar operator*(const Scalar& x, const Scalar& y) {
    require_same_ring(x.ring_, y.ring_);
    Scalar r(x.ring_);
    for (const auto& [kx, cx] : x.terms_) {
      for (const auto& [ky, cy] : y.terms_) {
        if (kx.eps && ky.eps) continue;
        Monomial k;
        for (int i = 0; i < kMaxVars; ++i) {
          k.a[i] = static_cast<std::uint16_t>(kx.a[i] + ky.a[i]);
          k.b[i] = static_cast<std::uint16_t>(kx.b[i] + ky.b[i]);
        }
        k.m = kx.m + ky.m;
        k.eps = kx.eps || ky.eps;
        r.add_term(k, cx * cy);
      }
    }
    return r;
  }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  friend bool operator==(const Scalar& x, const Scalar& y) { return x.ring_ == y.ring_ && x.terms_ == y.terms_; }

  /// Complex conjugation: z^a zbar^b -> z^b zbar^a, coefficients conjugated,
  /// eps is real.
  Scalar conj() const {
    Scalar r(ring_);
    for (const auto& [k, c] : terms_) {
      Monomial kc = k;
      std::swap(kc.a, kc.b);
      r.add_raw(kc, c.conj());
    }
    return r;
  }

  /// d/dz_i (holomorphic = true) or d/dzbar_i.
  Scalar wirtinger(bool holomorphic_direction, int index) const {
    check_index(ring_, index);
    const int v = index - 1;
    Scalar r(ring_);
    for (const auto& [k, c] : terms_) {
      const auto& e = holomorphic_direction ? k.a : k.b;
      if (e[v] > 0) {
        Monomial d = k;
        (holomorphic_direction ? d.a : d.b)[v] -= 1;
        r.add_term(d, c * GaussianRational(static_cast<long>(e[v])));
      }
      if (k.m > 0) {
        // d/dz (1+z zbar)^(-m) = -m zbar (1+z zbar)^(-m-1), and symmetrically.
        Monomial d = k;
        (holomorphic_direction ? d.b : d.a)[0] += 1;
        d.m += 1;
        r.add_term(d, c * GaussianRational(static_cast<long>(-k.m)));
      }
    }
    return r;
  }
  Scalar dz(int index) const { return wirtinger(true, index); }
  Scalar dzbar(int index) const { return wirtinger(false, index); }

  /// Canonical antiderivative in zbar_m: zbar_m^b -> zbar_m^(b+1)/(b+1), no
  /// integration constant. Only the polynomial ring supports it.
  Scalar antideriv_zbar(int index) const {
    if (!ring_.is_poly()) throw PreconditionError("antideriv_zbar requires a polynomial ring");
    check_index(ring_, index);
    Scalar r(ring_);
    for (const auto& [k, c] : terms_) {
      Monomial d = k;
      d.b[index - 1] += 1;
      r.add_raw(d, c * GaussianRational(Rational(1, d.b[index - 1])));
    }
    return r;
  }

  /// Integral over C against (i/2) dz ^ dzbar, returned as a multiple of pi.
  PiRational integrate_p1() const {
    if (!ring_.is_p1()) throw PreconditionError("integrate_p1 requires the P1 ring");
    GaussianRational total;
    for (const auto& [k, c] : terms_) {
      if (k.eps) throw PreconditionError("integrate_p1 on an eps term; split the dual parts first");
      if (k.a[0] != k.b[0]) continue;
      const long a = k.a[0];
      if (k.m < a + 2) throw PreconditionError("divergent integrand term z^" + std::to_string(a) + " zbar^" + std::to_string(a) + " (1+z zbar)^-" + std::to_string(k.m));
      mpz_class num, den, rest;
      mpz_fac_ui(num.get_mpz_t(), static_cast<unsigned long>(a));
      mpz_fac_ui(rest.get_mpz_t(), static_cast<unsigned long>(k.m - a - 2));
      mpz_fac_ui(den.get_mpz_t(), static_cast<unsigned long>(k.m - 1));
      total += c * GaussianRational(Rational(num * rest, den));
    }
    return PiRational(total);
  }

  /// eps-free part and eps coefficient, both returned in the non-dual ring.
  Scalar standard_part() const { return split_eps(false); }
  Scalar eps_part() const { return split_eps(true); }

  /// Same function viewed in `target`, which may add or drop the dual flag
  /// (dropping requires no eps terms).
  Scalar in_ring(RingSpec target) const {
    if (target.kind != ring_.kind || target.n != ring_.n) throw RingMismatch("cannot move " + ring_.str() + " to " + target.str());
    Scalar r(target);
    for (const auto& [k, c] : terms_) r.add_raw(k, c);
    return r;
  }

  std::string str() const;

 private:
  static void check_index(const RingSpec& ring, int i) {
    if (i < 1 || i > ring.n) throw PreconditionError("variable index " + std::to_string(i) + " out of range for " + ring.str());
  }

  // Inputs are already canonical keys of this ring's kind.
  void add_raw(const Monomial& key, const GaussianRational& c) {
    if (c.is_zero()) return;
    if (key.eps && !ring_.dual) throw RingMismatch("eps term in non-dual ring " + ring_.str());
    auto [it, inserted] = terms_.try_emplace(key, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  Scalar split_eps(bool want_eps) const {
    Scalar r(ring_.with_dual(false));
    for (const auto& [k, c] : terms_) {
      if (k.eps != want_eps) continue;
      Monomial kk = k;
      kk.eps = false;
      r.add_raw(kk, c);
    }
    return r;
  }

  RingSpec ring_;
  TermMap terms_;
};

inline std::string Scalar::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  const bool p1 = ring_.is_p1();
  for (const auto& [k, c] : terms_) {
    if (!out.empty()) out += " + ";
    out += "(" + c.str() + ")";
    for (int i = 0; i < ring_.n; ++i) {
      const std::string idx = p1 ? "" : std::to_string(i + 1);
      if (k.a[i]) out += "*z" + idx + (k.a[i] > 1 ? "^" + std::to_string(k.a[i]) : "");
      if (k.b[i]) out += "*zb" + idx + (k.b[i] > 1 ? "^" + std::to_string(k.b[i]) : "");
    }
    if (k.m) out += "*(1+z*zb)^-" + std::to_string(k.m);
    if (k.eps) out += "*eps";
  }
  return out;
}

}  // namespace sconn
