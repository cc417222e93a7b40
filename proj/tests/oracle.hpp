#pragma once

#include <cmath>
#include <vector>

#include "sconn/sconn.hpp"

namespace sconn::test {

/// Point evaluation with exact Gaussian rationals; zbar evaluates to the
/// conjugate of the point. A ring homomorphism independent of the term
/// bookkeeping in Scalar.
inline GaussianRational evaluate(const Scalar& s, const std::vector<GaussianRational>& point) {
  GaussianRational total;
  for (const auto& [m, c] : s.terms()) {
    GaussianRational v = c;
    for (std::size_t i = 0; i < point.size(); ++i) {
      for (int e = 0; e < m.a[i]; ++e) v *= point[i];
      for (int e = 0; e < m.b[i]; ++e) v *= point[i].conj();
    }
    if (m.m != 0) {
      const GaussianRational w = GaussianRational(1) + point[0] * point[0].conj();
      for (int e = 0; e < m.m; ++e) v *= w.inverse();
    }
    if (m.eps) v = GaussianRational();
    total += v;
  }
  return total;
}

inline std::vector<GaussianRational> random_point(Generator& gen, int n) {
  std::vector<GaussianRational> p;
  for (int i = 0; i < n; ++i) p.push_back(GaussianRational(make_rational(gen.uniform(-5, 5), gen.uniform(1, 4)), make_rational(gen.uniform(-5, 5), gen.uniform(1, 4))));
  return p;
}

/// Random section: each component a random form.
inline Section random_section(Generator& gen, const RingSpec& ring, const GradedBundle& e, int max_degree) {
  Section s(ring, e);
  for (int k = 0; k < e.total_rank(); ++k)
    if (gen.coin()) s.at(k) = gen.form(ring, max_degree, 2);
  return s;
}

/// Random homogeneous operator of tridegree (p, q, r).
inline SuperOperator random_block(Generator& gen, const RingSpec& ring, const GradedBundle& e, int p, int q, int r, int max_degree) {
  return gen.block(ring, e, p, q, r, max_degree);
}

inline GradedBundle random_bundle(Generator& gen, int max_total = 3) {
  std::map<int, int> ranks;
  const int total = gen.uniform(1, max_total);
  for (int i = 0; i < total; ++i) ++ranks[gen.uniform(-1, 1)];
  return GradedBundle(ranks);
}

inline RingSpec random_ring(Generator& gen, bool allow_p1 = true) {
  if (allow_p1 && gen.uniform(0, 3) == 0) return RingSpec::p1();
  return RingSpec::poly(gen.uniform(1, 3));
}

/// Koszul superconnection of (z_1, ..., z_n).
inline DbarSuperconnection koszul_of_coordinates(const RingSpec& ring) {
  std::vector<Scalar> f;
  for (int i = 1; i <= ring.n; ++i) f.push_back(Scalar::z(ring, i));
  auto [e, d] = koszul(ring, f);
  return from_complex(e, d);
}

/// Numerical quadrature of pi * int_0^inf u^a (1+u)^(-m) du, the polar form
/// of int_C |z|^{2a} (1+|z|^2)^{-m} dA, via u = t / (1 - t) and Simpson's rule.
inline double beta_integral_quadrature(int a, int m) {
  const int steps = 2000;
  // u^a (1+u)^-m du = t^a (1-t)^(m-a-2) dt
  auto f = [&](double t) { return std::pow(t, a) * std::pow(1.0 - t, m - a - 2); };
  const double h = 1.0 / steps;
  double sum = f(0.0) + f(1.0);
  for (int i = 1; i < steps; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return M_PI * sum * h / 3.0;
}

inline double to_double(const Rational& r) { return r.get_d(); }

}  // namespace sconn::test
