#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "sconn/form.hpp"

namespace sconn {

/// Ranks r_j of the graded bundle E^j over a finite degree window. The flat
/// basis orders degrees ascending and, inside a degree, by index.
class GradedBundle {
 public:
  GradedBundle() = default;
  explicit GradedBundle(std::map<int, int> ranks) {
    for (const auto& [deg, r] : ranks) {
      if (r < 0) throw PreconditionError("negative rank");
      if (r > 0) ranks_[deg] = r;
    }
    rebuild();
  }

  const std::map<int, int>& ranks() const { return ranks_; }
  int rank(int deg) const {
    auto it = ranks_.find(deg);
    return it == ranks_.end() ? 0 : it->second;
  }
  int total_rank() const { return static_cast<int>(degree_of_.size()); }
  /// Flat index of the first basis vector of degree `deg`.
  int offset(int deg) const {
    auto it = offsets_.find(deg);
    if (it == offsets_.end()) throw ShapeMismatch("degree " + std::to_string(deg) + " not in bundle");
    return it->second;
  }
  int index(int deg, int i) const {
    if (i < 0 || i >= rank(deg)) throw ShapeMismatch("basis index out of range");
    return offset(deg) + i;
  }
  int degree_of(int flat) const { return degree_of_.at(static_cast<std::size_t>(flat)); }
  int local_index(int flat) const { return flat - offset(degree_of(flat)); }

  /// Alternating rank sum_j (-1)^j r_j.
  int super_rank() const {
    int s = 0;
    for (const auto& [deg, r] : ranks_) s += (deg % 2 == 0) ? r : -r;
    return s;
  }

  /// Degree j data moves to degree j - k.
  GradedBundle shift(int k) const {
    std::map<int, int> out;
    for (const auto& [deg, r] : ranks_) out[deg - k] = r;
    return GradedBundle(out);
  }

  friend bool operator==(const GradedBundle& a, const GradedBundle& b) { return a.ranks_ == b.ranks_; }

  std::string str() const {
    std::string s = "{";
    for (const auto& [deg, r] : ranks_) s += (s.size() > 1 ? ", " : "") + std::to_string(deg) + ":" + std::to_string(r);
    return s + "}";
  }

 private:
  void rebuild() {
    offsets_.clear();
    degree_of_.clear();
    for (const auto& [deg, r] : ranks_) {
      offsets_[deg] = static_cast<int>(degree_of_.size());
      for (int i = 0; i < r; ++i) degree_of_.push_back(deg);
    }
  }

  std::map<int, int> ranks_;
  std::map<int, int> offsets_;
  std::vector<int> degree_of_;
};

/// Direct sum: the basis of `a` precedes the basis of `b` inside each degree.
inline GradedBundle direct_sum(const GradedBundle& a, const GradedBundle& b) {
  std::map<int, int> r = a.ranks();
  for (const auto& [deg, k] : b.ranks()) r[deg] += k;
  return GradedBundle(r);
}

namespace detail {

inline Form parity_part(const Form& f, int parity) {
  Form r(f.ring());
  for (const auto& [k, c] : f.terms())
    if ((k.degree() & 1) == parity) r.add(k, c);
  return r;
}

// Negates the odd-degree terms of f when `flip` is odd.
inline Form odd_sign(const Form& f, int flip) {
  if (!(flip & 1)) return f;
  Form r(f.ring());
  for (const auto& [k, c] : f.terms()) r.add(k, (k.degree() & 1) ? -c : c);
  return r;
}

}  // namespace detail

/// Section of A^{.,.} (x) E: per flat basis index, the Form coefficient of
/// e_k, written as omega_k . e_k.
class Section {
 public:
  Section(RingSpec ring, GradedBundle bundle)
      : ring_(ring), bundle_(std::move(bundle)), comps_(static_cast<std::size_t>(bundle_.total_rank()), Form(ring)) {}

  /// omega . e_k
  static Section basis(RingSpec ring, const GradedBundle& bundle, int flat, const Form& omega) {
    Section s(ring, bundle);
    s.at(flat) = omega;
    return s;
  }

  const RingSpec& ring() const { return ring_; }
  const GradedBundle& bundle() const { return bundle_; }
  Form& at(int flat) { return comps_.at(static_cast<std::size_t>(flat)); }
  const Form& at(int flat) const { return comps_.at(static_cast<std::size_t>(flat)); }
  int size() const { return static_cast<int>(comps_.size()); }

  bool is_zero() const {
    for (const auto& c : comps_)
      if (!c.is_zero()) return false;
    return true;
  }

  Section& operator+=(const Section& o) {
    check(o);
    for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
    return *this;
  }
  Section& operator-=(const Section& o) {
    check(o);
    for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= o.comps_[i];
    return *this;
  }
  friend Section operator+(Section a, const Section& b) { return a += b; }
  friend Section operator-(Section a, const Section& b) { return a -= b; }
  friend bool operator==(const Section& a, const Section& b) {
    return a.ring_ == b.ring_ && a.bundle_ == b.bundle_ && a.comps_ == b.comps_;
  }

  /// Componentwise Dolbeault operator; the basis sections are flat for the
  /// bare operator in the chosen splitting.
  Section dolbeault(Dolbeault kind) const {
    Section r(ring_, bundle_);
    for (std::size_t i = 0; i < comps_.size(); ++i) r.comps_[i] = comps_[i].dolbeault(kind);
    return r;
  }

  Section shift(int k) const {
    Section r(ring_, bundle_.shift(k));
    r.comps_ = comps_;
    return r;
  }

 private:
  void check(const Section& o) const {
    require_same_ring(ring_, o.ring_);
    if (!(bundle_ == o.bundle_)) throw ShapeMismatch("sections over different bundles");
  }

  RingSpec ring_;
  GradedBundle bundle_;
  std::vector<Form> comps_;
};

struct Tridegree {
  int p = 0;
  int q = 0;
  int r = 0;
  int total() const { return p + q + r; }
  friend auto operator<=>(const Tridegree&, const Tridegree&) = default;
};

/// A-linear operator between graded bundles, stored by its matrix on basis
/// sections: T(e_k) = sum_i T(i, k) . e_i. Homogeneous blocks of tridegree
/// (p, q, r) are the entry terms of form type (p, q) with deg(i) - deg(k) = r.
/// On general sections the operator acts by the sign rule
/// T(omega . s) = (-1)^{|T| |omega|} omega . T(s).
class SuperOperator {
 public:
  SuperOperator(RingSpec ring, GradedBundle src, GradedBundle dst)
      : ring_(ring),
        src_(std::move(src)),
        dst_(std::move(dst)),
        entries_(static_cast<std::size_t>(src_.total_rank() * dst_.total_rank()), Form(ring)) {}
  SuperOperator(RingSpec ring, const GradedBundle& bundle) : SuperOperator(ring, bundle, bundle) {}

  static SuperOperator identity(RingSpec ring, const GradedBundle& bundle) {
    SuperOperator t(ring, bundle);
    for (int k = 0; k < bundle.total_rank(); ++k) t.at(k, k) = Form::constant(ring, 1);
    return t;
  }

  const RingSpec& ring() const { return ring_; }
  const GradedBundle& src() const { return src_; }
  const GradedBundle& dst() const { return dst_; }
  int rows() const { return dst_.total_rank(); }
  int cols() const { return src_.total_rank(); }
  bool is_endomorphism() const { return src_ == dst_; }

  Form& at(int i, int k) { return entries_.at(idx(i, k)); }
  const Form& at(int i, int k) const { return entries_.at(idx(i, k)); }
  /// Bundle shift carried by entry (i, k).
  int shift_of(int i, int k) const { return dst_.degree_of(i) - src_.degree_of(k); }

  bool is_zero() const {
    for (const auto& e : entries_)
      if (!e.is_zero()) return false;
    return true;
  }

  SuperOperator& operator+=(const SuperOperator& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
    return *this;
  }
  SuperOperator& operator-=(const SuperOperator& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
    return *this;
  }
  SuperOperator& operator*=(const GaussianRational& c) {
    for (auto& e : entries_) e *= c;
    return *this;
  }
  SuperOperator operator-() const {
    SuperOperator r = *this;
    for (auto& e : r.entries_) e = -e;
    return r;
  }
  friend SuperOperator operator+(SuperOperator a, const SuperOperator& b) { return a += b; }
  friend SuperOperator operator-(SuperOperator a, const SuperOperator& b) { return a -= b; }
  friend SuperOperator operator*(SuperOperator a, const GaussianRational& c) { return a *= c; }
  friend SuperOperator operator*(const GaussianRational& c, SuperOperator a) { return a *= c; }
  friend bool operator==(const SuperOperator& a, const SuperOperator& b) {
    return a.ring_ == b.ring_ && a.src_ == b.src_ && a.dst_ == b.dst_ && a.entries_ == b.entries_;
  }

  /// Tridegrees of the nonzero homogeneous blocks.
  std::set<Tridegree> tridegrees() const {
    std::set<Tridegree> out;
    for (int i = 0; i < rows(); ++i)
      for (int k = 0; k < cols(); ++k)
        for (const auto& [key, c] : at(i, k).terms()) out.insert({key.p(), key.q(), shift_of(i, k)});
    return out;
  }

  /// Homogeneous block of tridegree (p, q, r).
  SuperOperator block(int p, int q, int r) const {
    return filter([&](FormKey key, int shift) { return key.p() == p && key.q() == q && shift == r; });
  }
  /// Part of total degree parity `parity`.
  SuperOperator parity_part(int parity) const {
    return filter([&](FormKey key, int shift) { return ((key.degree() + shift) & 1) == parity; });
  }
  /// Part of total degree `deg`.
  SuperOperator total_degree_part(int deg) const {
    return filter([&](FormKey key, int shift) { return key.degree() + shift == deg; });
  }
  template <typename Pred>
  SuperOperator filter(Pred&& keep) const {
    SuperOperator out(ring_, src_, dst_);
    for (int i = 0; i < rows(); ++i)
      for (int k = 0; k < cols(); ++k) {
        const int shift = shift_of(i, k);
        for (const auto& [key, c] : at(i, k).terms())
          if (keep(key, shift)) out.at(i, k).add(key, c);
      }
    return out;
  }
  /// True when every entry term has the tridegree `pred` accepts.
  template <typename Pred>
  bool all_blocks(Pred&& ok) const {
    for (const auto& t : tridegrees())
      if (!ok(t)) return false;
    return true;
  }

  template <typename Fn>
  SuperOperator map_entries(Fn&& fn, RingSpec target) const {
    SuperOperator out(target, src_, dst_);
    for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] = fn(entries_[i]);
    return out;
  }
  /// Entrywise del / delbar / d. For an operator T this is the supercommutator
  /// of the bare operator with T.
  SuperOperator dolbeault(Dolbeault kind) const {
    return map_entries([&](const Form& f) { return f.dolbeault(kind); }, ring_);
  }
  SuperOperator in_ring(RingSpec target) const {
    return map_entries([&](const Form& f) { return f.in_ring(target); }, target);
  }
  SuperOperator standard_part() const {
    return map_entries([](const Form& f) { return f.standard_part(); }, ring_.with_dual(false));
  }
  SuperOperator eps_part() const {
    return map_entries([](const Form& f) { return f.eps_part(); }, ring_.with_dual(false));
  }

  /// Conjugate transpose: entry (k, i) of the result is conj(T(i, k)).
  SuperOperator conj_transpose() const {
    SuperOperator out(ring_, dst_, src_);
    for (int i = 0; i < rows(); ++i)
      for (int k = 0; k < cols(); ++k) out.at(k, i) = at(i, k).conj();
    return out;
  }

  /// Degree j data moves to degree j - k on both sides; entries unchanged.
  SuperOperator shift(int k) const {
    SuperOperator out(ring_, src_.shift(k), dst_.shift(k));
    out.entries_ = entries_;
    return out;
  }

  std::string str() const {
    std::string s;
    for (int i = 0; i < rows(); ++i)
      for (int k = 0; k < cols(); ++k)
        if (!at(i, k).is_zero()) s += "  (" + std::to_string(i) + "," + std::to_string(k) + "): " + at(i, k).str() + "\n";
    return s.empty() ? "  0\n" : s;
  }

 private:
  std::size_t idx(int i, int k) const {
    if (i < 0 || k < 0 || i >= rows() || k >= cols()) throw ShapeMismatch("operator entry out of range");
    return static_cast<std::size_t>(i * cols() + k);
  }
  void check_same_shape(const SuperOperator& o) const {
    require_same_ring(ring_, o.ring_);
    if (!(src_ == o.src_) || !(dst_ == o.dst_)) throw ShapeMismatch("operators of different shape");
  }

  RingSpec ring_;
  GradedBundle src_;
  GradedBundle dst_;
  std::vector<Form> entries_;
};

/// T applied to a section, extended from basis sections by the sign rule.
inline Section apply_operator(const SuperOperator& t, const Section& s) {
  require_same_ring(t.ring(), s.ring());
  if (!(t.src() == s.bundle())) throw ShapeMismatch("operator source does not match section bundle");
  Section out(t.ring(), t.dst());
  for (int k = 0; k < t.cols(); ++k) {
    const Form& omega = s.at(k);
    if (omega.is_zero()) continue;
    const Form omega_even = detail::parity_part(omega, 0);
    const Form omega_odd = detail::parity_part(omega, 1);
    for (int i = 0; i < t.rows(); ++i) {
      const Form& e = t.at(i, k);
      if (e.is_zero()) continue;
      // Entry terms of odd total degree pick up a sign past odd omega.
      Form e_signed = detail::odd_sign(e, 1);
      if (t.shift_of(i, k) & 1) e_signed = -e_signed;
      out.at(i) += wedge(omega_even, e);
      out.at(i) += wedge(omega_odd, e_signed);
    }
  }
  return out;
}

/// S o T, determined by apply(S o T, s) = apply(S, apply(T, s)):
/// (S o T)(i, k) = sum_j (-1)^{|T(j,k)|_form (deg i - deg j)} S(i, j) ^ T(j, k).
inline SuperOperator compose(const SuperOperator& s, const SuperOperator& t) {
  require_same_ring(s.ring(), t.ring());
  if (!(s.src() == t.dst())) throw ShapeMismatch("compose: S source differs from T target");
  SuperOperator out(s.ring(), t.src(), s.dst());
  for (int i = 0; i < s.rows(); ++i) {
    for (int j = 0; j < s.cols(); ++j) {
      const Form& sij = s.at(i, j);
      if (sij.is_zero()) continue;
      const int flip = s.shift_of(i, j);
      for (int k = 0; k < t.cols(); ++k) {
        const Form& tjk = t.at(j, k);
        if (tjk.is_zero()) continue;
        out.at(i, k) += wedge(sij, detail::odd_sign(tjk, flip));
      }
    }
  }
  return out;
}

/// Supercommutator S o T - (-1)^{|S||T|} T o S, extended bilinearly over the
/// parity decomposition.
inline SuperOperator bracket(const SuperOperator& s, const SuperOperator& t) {
  SuperOperator out(s.ring(), t.src(), s.dst());
  for (int a = 0; a < 2; ++a) {
    const SuperOperator sa = s.parity_part(a);
    if (sa.is_zero()) continue;
    for (int b = 0; b < 2; ++b) {
      const SuperOperator tb = t.parity_part(b);
      if (tb.is_zero()) continue;
      out += compose(sa, tb);
      if (a & b)
        out += compose(tb, sa);
      else
        out -= compose(tb, sa);
    }
  }
  return out;
}

/// sum_j (-1)^j tr(T_jj); blocks shifting bundle degree do not contribute.
inline Form supertrace(const SuperOperator& t) {
  if (!t.is_endomorphism()) throw ShapeMismatch("supertrace of a non-endomorphism");
  Form out(t.ring());
  for (int k = 0; k < t.rows(); ++k) {
    if (t.src().degree_of(k) % 2 == 0)
      out += t.at(k, k);
    else
      out -= t.at(k, k);
  }
  return out;
}

/// T^m for an endomorphism, T^0 = id.
inline SuperOperator power(const SuperOperator& t, int m) {
  SuperOperator out = SuperOperator::identity(t.ring(), t.src());
  for (int i = 0; i < m; ++i) out = compose(out, t);
  return out;
}

/// Block-diagonal sum on direct_sum(a.src, b.src) -> direct_sum(a.dst, b.dst).
inline SuperOperator direct_sum(const SuperOperator& a, const SuperOperator& b) {
  require_same_ring(a.ring(), b.ring());
  const GradedBundle src = direct_sum(a.src(), b.src());
  const GradedBundle dst = direct_sum(a.dst(), b.dst());
  SuperOperator out(a.ring(), src, dst);
  auto place = [&](const SuperOperator& x, bool second) {
    for (int i = 0; i < x.rows(); ++i) {
      const int di = x.dst().degree_of(i);
      const int ii = dst.offset(di) + x.dst().local_index(i) + (second ? a.dst().rank(di) : 0);
      for (int k = 0; k < x.cols(); ++k) {
        const int dk = x.src().degree_of(k);
        const int kk = src.offset(dk) + x.src().local_index(k) + (second ? a.src().rank(dk) : 0);
        out.at(ii, kk) = x.at(i, k);
      }
    }
  };
  place(a, false);
  place(b, true);
  return out;
}

/// Flat index of a basis vector of `part` inside direct_sum(first, second).
inline int summand_index(const GradedBundle& first, const GradedBundle& second, bool in_second, int flat) {
  const GradedBundle& part = in_second ? second : first;
  const GradedBundle sum = direct_sum(first, second);
  const int deg = part.degree_of(flat);
  return sum.offset(deg) + part.local_index(flat) + (in_second ? first.rank(deg) : 0);
}

}  // namespace sconn
