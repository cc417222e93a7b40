#pragma once

#include <bit>
#include <utility>
#include <vector>

#include "sconn/connection.hpp"

namespace sconn {

struct NormalizationCertificate {
  GaugeParameter phi_total;
  DbarSuperconnection normal;
};

namespace detail {

inline bool mentions_dzbar_above(const SuperOperator& op, int m) {
  const unsigned mask = 0xffu << m;
  for (int i = 0; i < op.rows(); ++i)
    for (int k = 0; k < op.cols(); ++k)
      for (const auto& [fk, c] : op.at(i, k).terms()) {
        if (fk.dzbar & mask) return true;
        for (const auto& [mono, x] : c.terms())
          for (int j = m; j < kMaxVars; ++j)
            if (mono.b[static_cast<std::size_t>(j)]) return true;
      }
  return false;
}

inline bool mentions_dzbar(const SuperOperator& op, int m) {
  const unsigned bit = 1u << (m - 1);
  for (int i = 0; i < op.rows(); ++i)
    for (int k = 0; k < op.cols(); ++k)
      for (const auto& [fk, c] : op.at(i, k).terms())
        if (fk.dzbar & bit) return true;
  return false;
}

// phi_k with delbar_{zbar_m}-part of [delbar, phi_k] equal to -x, where x is
// the dzbar^m part of beta_{k+1}.
inline SuperOperator antiderivative_gauge(const SuperOperator& x, int m) {
  const std::uint8_t bit = static_cast<std::uint8_t>(1u << (m - 1));
  SuperOperator phi(x.ring(), x.src(), x.dst());
  for (int i = 0; i < x.rows(); ++i)
    for (int k = 0; k < x.cols(); ++k)
      for (const auto& [fk, c] : x.at(i, k).terms()) {
        if (!(fk.dzbar & bit)) continue;
        const std::uint8_t rest = static_cast<std::uint8_t>(fk.dzbar & ~bit);
        const int below = std::popcount(static_cast<unsigned>(rest & (bit - 1)));
        // delbar(g dz^I dzbar^J') contains d_{zbar_m} g dzbar^m ^ dz^I ^ dzbar^J';
        // moving dzbar^m into place passes |I| + #{j in J' : j < m} generators.
        const int sign_parity = (std::popcount(fk.dz) + below) & 1;
        Scalar g = c.antideriv_zbar(m);
        if (!sign_parity) g = -g;
        phi.at(i, k).add(FormKey{fk.dz, rest}, g);
      }
  return phi;
}

}  // namespace detail

/// One step of the normal-form recursion: removes dzbar^m from every beta_i
/// by gauging with phi_1, phi_2, ... (none of which contains dzbar^m).
inline std::pair<DbarSuperconnection, GaugeParameter> eliminate_variable(const DbarSuperconnection& input, int m) {
  const RingSpec& ring = input.ring();
  if (!ring.is_poly()) throw PreconditionError("eliminate_variable requires a polynomial ring");
  if (m < 1 || m > ring.n) throw PreconditionError("variable index out of range");
  if (!is_flat(input)) throw PreconditionError("superconnection is not flat");
  if (detail::mentions_dzbar(input.a(), m)) throw PreconditionError("A has a nonzero dzbar^" + std::to_string(m) + " component");
  for (int q = 0; q <= ring.n; ++q)
    if (detail::mentions_dzbar_above(input.part(q), m))
      throw PreconditionError("data is not holomorphic in the variables after " + std::to_string(m));

  DbarSuperconnection cur = input;
  GaugeParameter total(ring, input.bundle());
  for (int k = 1; k + 1 <= ring.n; ++k) {
    const SuperOperator x = cur.beta(k + 1).filter([&](FormKey fk, int) { return (fk.dzbar >> (m - 1)) & 1; });
    if (x.is_zero()) continue;
    std::vector<SuperOperator> phis(static_cast<std::size_t>(k), SuperOperator(ring, input.bundle()));
    phis.back() = detail::antiderivative_gauge(x, m);
    const GaugeParameter step(ring, input.bundle(), std::move(phis));
    cur = gauge(cur, step);
    total = compose_gauge(total, step);
  }
  for (const auto& b : cur.betas())
    if (detail::mentions_dzbar(b, m)) throw VerificationFailure("beta still contains dzbar^" + std::to_string(m) + " after elimination");
  return {cur, total};
}

/// Strict gauge to a superconnection with all betas zero, by eliminating
/// dzbar^n, ..., dzbar^2 in turn. The certificate is checked by recomputing
/// the gauge action of the composed parameter on the input.
inline NormalizationCertificate normalize(const DbarSuperconnection& input) {
  const RingSpec& ring = input.ring();
  if (!ring.is_poly()) throw PreconditionError("normalize requires a polynomial ring");
  if (!is_flat(input)) throw PreconditionError("superconnection is not flat");
  DbarSuperconnection cur = input;
  GaugeParameter total(ring, input.bundle());
  for (int m = ring.n; m >= 2; --m) {
    auto [next, phi] = eliminate_variable(cur, m);
    cur = std::move(next);
    total = compose_gauge(total, phi);
  }
  cur.trim();
  if (!cur.betas_vanish()) throw VerificationFailure("normal form still has betas");
  if (!(gauge(input, total) == cur)) throw VerificationFailure("gauge certificate does not reproduce the normal form");
  if (!is_flat(cur)) throw VerificationFailure("normal form is not flat");
  return {total, cur};
}

}  // namespace sconn
