#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "sconn/chern.hpp"
#include "sconn/connection.hpp"

namespace sconn {

/// Seeded source of random exact data. Draws come from std::mt19937_64 (whose
/// output sequence is fixed by the standard) reduced by modulo, so a seed
/// reproduces the same instances on every platform.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin() { return rng_() & 1; }

  /// Small nonzero Gaussian rational with denominators in {1, 2}.
  GaussianRational coefficient(bool complex = true) {
    auto part = [&] { return make_rational(uniform(-3, 3), uniform(1, 2)); };
    GaussianRational c;
    do {
      c = GaussianRational(part(), complex && coin() ? part() : Rational(0));
    } while (c.is_zero());
    return c;
  }

  Monomial monomial(const RingSpec& ring, int max_degree, bool holomorphic = false) {
    Monomial m;
    int left = uniform(0, max_degree);
    while (left > 0) {
      const int v = uniform(0, ring.n - 1);
      if (holomorphic || coin())
        ++m.a[static_cast<std::size_t>(v)];
      else
        ++m.b[static_cast<std::size_t>(v)];
      --left;
    }
    return m;
  }

  Scalar scalar(const RingSpec& ring, int max_degree, int max_terms, bool holomorphic = false, bool complex = true) {
    Scalar s(ring);
    const int terms = uniform(1, max_terms);
    for (int t = 0; t < terms; ++t) s.add_term(monomial(ring, max_degree, holomorphic), coefficient(complex));
    return s;
  }

  /// Polynomial or P1 scalar; on P1 the denominator power is drawn too.
  Scalar any_scalar(const RingSpec& ring, int max_degree, int max_terms) {
    if (ring.is_poly()) return scalar(ring, max_degree, max_terms);
    Scalar s(ring);
    const int terms = uniform(1, max_terms);
    for (int t = 0; t < terms; ++t) {
      Monomial m;
      m.a[0] = static_cast<std::uint16_t>(uniform(0, max_degree));
      m.b[0] = static_cast<std::uint16_t>(uniform(0, max_degree));
      m.m = uniform(0, 3);
      s.add_term(m, coefficient());
    }
    return s;
  }

  /// Random form with coefficients of degree <= max_degree in every type.
  Form form(const RingSpec& ring, int max_degree, int max_terms) {
    Form f(ring);
    const int terms = uniform(1, max_terms);
    for (int t = 0; t < terms; ++t) {
      const FormKey k{static_cast<std::uint8_t>(rng_() % (1u << ring.n)), static_cast<std::uint8_t>(rng_() % (1u << ring.n))};
      f.add(k, any_scalar(ring, max_degree, 2));
    }
    return f;
  }

  /// Random form of type (p, q).
  Form form_of_type(const RingSpec& ring, int p, int q, int max_degree, int max_terms) {
    const auto keys = enumerate_form_keys(ring.n, p, q);
    Form f(ring);
    if (keys.empty()) return f;
    const int terms = uniform(1, max_terms);
    for (int t = 0; t < terms; ++t) f.add(keys[static_cast<std::size_t>(uniform(0, static_cast<int>(keys.size()) - 1))], any_scalar(ring, max_degree, 2));
    return f;
  }

  /// Random operator of tridegree (p, q, r); each admissible entry is filled
  /// with probability about one half. `dzbar_mask` restricts the dzbar factors.
  SuperOperator block(const RingSpec& ring, const GradedBundle& e, int p, int q, int r, int max_degree, unsigned dzbar_mask = 0xff) {
    SuperOperator t(ring, e);
    std::vector<FormKey> keys;
    for (const FormKey& k : enumerate_form_keys(ring.n, p, q))
      if ((k.dzbar & ~dzbar_mask) == 0) keys.push_back(k);
    if (keys.empty()) return t;
    for (int i = 0; i < e.total_rank(); ++i)
      for (int k = 0; k < e.total_rank(); ++k) {
        if (e.degree_of(i) - e.degree_of(k) != r || !coin()) continue;
        const FormKey key = keys[static_cast<std::size_t>(uniform(0, static_cast<int>(keys.size()) - 1))];
        t.at(i, k).add(key, ring.is_poly() ? scalar(ring, max_degree, 2) : any_scalar(ring, max_degree, 2));
      }
    return t;
  }

  /// Strict gauge parameter phi_1 + ... + phi_n. With `phi1_first_variable`
  /// phi_1 only uses dzbar^1, which keeps A free of dzbar^m for m >= 2.
  GaugeParameter strict_gauge(const RingSpec& ring, const GradedBundle& e, int max_degree, bool phi1_first_variable) {
    std::vector<SuperOperator> phis;
    for (int i = 1; i <= ring.n; ++i) phis.push_back(block(ring, e, 0, i, -i, max_degree, (i == 1 && phi1_first_variable) ? 1u : 0xffu));
    return GaugeParameter(ring, e, std::move(phis));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Instance families

/// Koszul complex of f_1, ..., f_r: degree -j has the j-subsets of {1..r} in
/// lexicographic order, and d e_S = sum_{i in S} (-1)^{pos(i)} f_i e_{S - i}.
inline std::pair<GradedBundle, SuperOperator> koszul(const RingSpec& ring, const std::vector<Scalar>& f) {
  const int r = static_cast<int>(f.size());
  std::vector<std::vector<unsigned>> by_size(static_cast<std::size_t>(r + 1));
  for (unsigned s = 0; s < (1u << r); ++s) by_size[static_cast<std::size_t>(std::popcount(s))].push_back(s);
  for (auto& v : by_size) {
    std::sort(v.begin(), v.end(), [](unsigned x, unsigned y) {
      for (int i = 0; i < 32; ++i) {
        const bool bx = x >> i & 1, by = y >> i & 1;
        if (bx != by) return bx;
      }
      return false;
    });
  }
  std::map<int, int> ranks;
  for (int j = 0; j <= r; ++j) ranks[-j] = static_cast<int>(by_size[static_cast<std::size_t>(j)].size());
  GradedBundle e(ranks);
  SuperOperator d(ring, e);
  auto flat = [&](unsigned s) {
    const int j = std::popcount(s);
    const auto& v = by_size[static_cast<std::size_t>(j)];
    return e.index(-j, static_cast<int>(std::find(v.begin(), v.end(), s) - v.begin()));
  };
  for (unsigned s = 1; s < (1u << r); ++s) {
    int pos = 0;
    for (int i = 0; i < r; ++i) {
      if (!(s >> i & 1)) continue;
      Scalar c = f[static_cast<std::size_t>(i)];
      if (pos & 1) c = -c;
      d.at(flat(s & ~(1u << i)), flat(s)) += Form(c);
      ++pos;
    }
  }
  return {e, d};
}

/// Koszul superconnection of a regular sequence z_i + g_i(z_{i+1}, ...) with
/// random holomorphic g_i and unit leading coefficients.
inline DbarSuperconnection random_koszul(Generator& gen, const RingSpec& ring, int max_degree) {
  std::vector<Scalar> f;
  for (int i = 1; i <= ring.n; ++i) {
    Scalar s = Scalar::z(ring, i) * GaussianRational(gen.uniform(1, 2));
    if (i < ring.n && gen.coin()) {
      Monomial m;
      m.a[static_cast<std::size_t>(gen.uniform(i, ring.n - 1))] = static_cast<std::uint16_t>(gen.uniform(1, max_degree));
      s.add_term(m, gen.coefficient(false));
    }
    f.push_back(std::move(s));
  }
  auto [e, d] = koszul(ring, f);
  return from_complex(e, d);
}

/// A normal-form superconnection gauged by a random strict parameter whose
/// phi_1 only involves dzbar^1.
inline DbarSuperconnection random_gauged_koszul(Generator& gen, const RingSpec& ring, int max_degree) {
  const DbarSuperconnection m = random_koszul(gen, ring, 1);
  return gauge(m, gen.strict_gauge(ring, m.bundle(), max_degree, true));
}

/// Constant positive definite metric L L^dagger + 1 blockwise.
inline HermitianMetric random_constant_metric(Generator& gen, const RingSpec& ring, const GradedBundle& e) {
  SuperOperator h(ring, e);
  for (const auto& [deg, r] : e.ranks()) {
    const int off = e.offset(deg);
    std::vector<std::vector<GaussianRational>> l(static_cast<std::size_t>(r), std::vector<GaussianRational>(static_cast<std::size_t>(r)));
    for (auto& row : l)
      for (auto& x : row) x = gen.coin() ? gen.coefficient() : GaussianRational();
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < r; ++k) {
        GaussianRational v = i == k ? GaussianRational(1) : GaussianRational();
        for (int j = 0; j < r; ++j) v += l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * l[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)].conj();
        h.at(off + i, off + k) = Form::constant(ring, v);
      }
  }
  return HermitianMetric::constant(h);
}

/// Unimodular degree-0 gauge 1 + N with N strictly upper triangular inside
/// each degree block, together with its inverse.
inline std::pair<SuperOperator, SuperOperator> random_unimodular(Generator& gen, const RingSpec& ring, const GradedBundle& e, int max_degree) {
  SuperOperator n(ring, e);
  for (const auto& [deg, r] : e.ranks())
    for (int i = 0; i < r; ++i)
      for (int k = i + 1; k < r; ++k)
        if (gen.coin()) n.at(e.index(deg, i), e.index(deg, k)) = Form(gen.scalar(ring, max_degree, 2));
  const SuperOperator id = SuperOperator::identity(ring, e);
  SuperOperator inv = id, pw = id;
  for (int j = 1; j <= e.total_rank(); ++j) {
    pw = compose(pw, n);
    inv += (j & 1) ? -pw : pw;
  }
  return {id + n, inv};
}

/// h-self-adjoint perturbation: delta = h^{-1} H for a random Hermitian
/// polynomial (or P1) function matrix H.
inline SuperOperator random_self_adjoint(Generator& gen, const HermitianMetric& h, int max_degree) {
  const RingSpec& ring = h.ring();
  const GradedBundle& e = h.bundle();
  SuperOperator x(ring, e);
  for (const auto& [deg, r] : e.ranks())
    for (int i = 0; i < r; ++i)
      for (int k = i; k < r; ++k) {
        if (!gen.coin()) continue;
        const Scalar s = ring.is_poly() ? gen.scalar(ring, max_degree, 2) : gen.any_scalar(ring, max_degree, 2);
        const int a = e.index(deg, i), b = e.index(deg, k);
        if (a == b) {
          x.at(a, a) += Form(s + s.conj());
        } else {
          x.at(a, b) += Form(s);
          x.at(b, a) += Form(s.conj());
        }
      }
  return compose(h.h_inverse(), x);
}

/// P1 line-bundle model O(k): rank 1 in degree 0, h = (1 + z zbar)^(-k).
inline std::pair<DbarSuperconnection, HermitianMetric> p1_line(int k) {
  const RingSpec ring = RingSpec::p1();
  const GradedBundle e(std::map<int, int>{{0, 1}});
  return {DbarSuperconnection(ring, e), HermitianMetric::p1_diagonal(ring, e, {{Rational(1), k}})};
}

/// Zero-differential complex with O(degrees[j].second) placed in bundle
/// degree degrees[j].first, one line each.
inline std::pair<DbarSuperconnection, HermitianMetric> p1_split(const std::vector<std::pair<int, int>>& lines) {
  const RingSpec ring = RingSpec::p1();
  std::map<int, int> ranks;
  for (const auto& [deg, k] : lines) ++ranks[deg];
  const GradedBundle e(ranks);
  std::vector<std::pair<Rational, int>> w(static_cast<std::size_t>(e.total_rank()));
  std::map<int, int> used;
  for (const auto& [deg, k] : lines) w[static_cast<std::size_t>(e.index(deg, used[deg]++))] = {Rational(1), k};
  return {DbarSuperconnection(ring, e), HermitianMetric::p1_diagonal(ring, e, w)};
}

}  // namespace sconn
