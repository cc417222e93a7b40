#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sconn/connection.hpp"
#include "sconn/truncation.hpp"

namespace sconn {

namespace detail {

using DenseMatrix = std::vector<std::vector<GaussianRational>>;

// Gauss-Jordan inverse; nullopt when singular.
inline std::optional<DenseMatrix> dense_inverse(DenseMatrix a) {
  const std::size_t n = a.size();
  DenseMatrix inv(n, std::vector<GaussianRational>(n));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c].is_zero()) ++p;
    if (p == n) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const GaussianRational f = a[c][c].inverse();
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] *= f;
      inv[c][j] *= f;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c].is_zero()) continue;
      const GaussianRational g = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= g * a[c][j];
        inv[r][j] -= g * inv[c][j];
      }
    }
  }
  return inv;
}

// Positive definiteness of a Hermitian matrix by symmetric elimination: every
// pivot must be real and positive.
inline bool positive_definite(DenseMatrix a) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    const GaussianRational piv = a[c][c];
    if (!piv.is_real() || sgn(piv.re()) <= 0) return false;
    const GaussianRational inv = piv.inverse();
    for (std::size_t r = c + 1; r < n; ++r) {
      const GaussianRational f = a[r][c] * inv;
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return true;
}

inline bool is_zero_form_operator(const SuperOperator& t) {
  for (int i = 0; i < t.rows(); ++i)
    for (int k = 0; k < t.cols(); ++k)
      for (const auto& [fk, c] : t.at(i, k).terms())
        if (fk.degree() != 0 || t.shift_of(i, k) != 0) return false;
  return true;
}

}  // namespace detail

/// Hermitian metric on a graded bundle, block diagonal across degrees, with
/// its exact inverse. (omega1 e_k, omega2 e_l) = (-1)^{|omega2| deg k}
/// conj(omega1) ^ omega2 h_kl.
class HermitianMetric {
 public:
  HermitianMetric(SuperOperator h, SuperOperator h_inv) : h_(std::move(h)), h_inv_(std::move(h_inv)) { validate(); }

  static HermitianMetric identity(RingSpec ring, const GradedBundle& bundle) {
    const SuperOperator id = SuperOperator::identity(ring, bundle);
    return {id, id};
  }

  /// Constant entries; checks positive definiteness and inverts exactly.
  static HermitianMetric constant(const SuperOperator& h) {
    if (!detail::is_zero_form_operator(h)) throw PreconditionError("metric must be block diagonal with function entries");
    SuperOperator inv(h.ring(), h.src());
    for (const auto& [deg, r] : h.src().ranks()) {
      detail::DenseMatrix m(static_cast<std::size_t>(r), std::vector<GaussianRational>(static_cast<std::size_t>(r)));
      const int off = h.src().offset(deg);
      for (int i = 0; i < r; ++i)
        for (int k = 0; k < r; ++k) {
          const Scalar s = h.at(off + i, off + k).scalar_part();
          if (!s.is_constant()) throw PreconditionError("constant metric has a non-constant entry");
          m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = s.constant_term();
        }
      if (!detail::positive_definite(m)) throw PreconditionError("metric block of degree " + std::to_string(deg) + " is not positive definite");
      const auto mi = detail::dense_inverse(m);
      for (int i = 0; i < r; ++i)
        for (int k = 0; k < r; ++k)
          inv.at(off + i, off + k) = Form::constant(h.ring(), (*mi)[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
    }
    return {h, inv};
  }

  /// P1 model: diagonal entries c_k (1 + z zbar)^(-m_k), c_k > 0.
  static HermitianMetric p1_diagonal(RingSpec ring, const GradedBundle& bundle, const std::vector<std::pair<Rational, int>>& weights) {
    if (!ring.is_p1()) throw PreconditionError("p1_diagonal needs the P1 ring");
    if (static_cast<int>(weights.size()) != bundle.total_rank()) throw ShapeMismatch("one weight per basis vector expected");
    SuperOperator h(ring, bundle), inv(ring, bundle);
    for (int k = 0; k < bundle.total_rank(); ++k) {
      const auto& [c, m] = weights[static_cast<std::size_t>(k)];
      if (sgn(c) <= 0) throw PreconditionError("metric weight must be positive");
      h.at(k, k) = Form(Scalar::p1_weight(ring, m) * GaussianRational(c));
      inv.at(k, k) = Form(Scalar::p1_weight(ring, -m) * GaussianRational(Rational(1) / c));
    }
    return {h, inv};
  }

  const RingSpec& ring() const { return h_.ring(); }
  const GradedBundle& bundle() const { return h_.src(); }
  const SuperOperator& h() const { return h_; }
  const SuperOperator& h_inverse() const { return h_inv_; }

  /// g^dagger h g for an invertible degree-0 function matrix g.
  HermitianMetric gauged(const SuperOperator& g, const SuperOperator& g_inv) const {
    if (!(compose(g, g_inv) == SuperOperator::identity(ring(), bundle()))) throw PreconditionError("g_inv is not the inverse of g");
    return {compose(compose(g.conj_transpose(), h_), g), compose(compose(g_inv, h_inv_), g_inv.conj_transpose())};
  }

  /// Metric over the dual ring with (s1, s2)_eps = (s1, s2) + eps (s1, delta s2);
  /// delta must be h-self-adjoint.
  HermitianMetric perturbed(const SuperOperator& delta) const {
    if (ring().dual) throw PreconditionError("metric is already over the dual ring");
    if (!detail::is_zero_form_operator(delta)) throw PreconditionError("delta h must be a degree-0 function matrix");
    const SuperOperator hd = compose(h_, delta);
    if (!(hd.conj_transpose() == hd)) throw PreconditionError("delta h is not self-adjoint for h");
    const RingSpec dual = ring().with_dual(true);
    const Scalar eps = Scalar::eps(dual);
    auto times_eps = [&](const SuperOperator& t) {
      return t.in_ring(dual).map_entries([&](const Form& f) { return f * eps; }, dual);
    };
    return {h_.in_ring(dual) + times_eps(hd), h_inv_.in_ring(dual) - times_eps(compose(delta, h_inv_))};
  }

  /// h_j(t) = t^j h_j.
  HermitianMetric rescaled(const Rational& t) const {
    if (sgn(t) == 0) throw PreconditionError("rescaling parameter must be nonzero");
    SuperOperator h = h_, inv = h_inv_;
    for (int k = 0; k < bundle().total_rank(); ++k) {
      const int j = bundle().degree_of(k);
      Rational f = 1;
      for (int e = 0; e < std::abs(j); ++e) f *= t;
      if (j < 0) f = 1 / f;
      for (int i = 0; i < bundle().total_rank(); ++i) {
        h.at(i, k) *= GaussianRational(f);
        inv.at(i, k) *= GaussianRational(1 / f);
      }
    }
    return {h, inv};
  }

  HermitianMetric in_ring(RingSpec target) const { return {h_.in_ring(target), h_inv_.in_ring(target)}; }

 private:
  void validate() const {
    require_same_ring(h_.ring(), h_inv_.ring());
    if (!h_.is_endomorphism() || !(h_.src() == h_inv_.src()) || !h_inv_.is_endomorphism()) throw ShapeMismatch("metric shapes differ");
    if (!detail::is_zero_form_operator(h_) || !detail::is_zero_form_operator(h_inv_))
      throw PreconditionError("metric must be block diagonal with function entries");
    if (!(h_.conj_transpose() == h_)) throw PreconditionError("metric is not Hermitian");
    if (!(compose(h_, h_inv_) == SuperOperator::identity(h_.ring(), h_.src()))) throw PreconditionError("h_inverse is not the inverse of h");
  }

  SuperOperator h_;
  SuperOperator h_inv_;
};

/// The sesquilinear pairing of two sections with values in forms.
inline Form pairing(const HermitianMetric& h, const Section& s1, const Section& s2) {
  Form out(h.ring());
  for (int k = 0; k < s1.size(); ++k) {
    if (s1.at(k).is_zero()) continue;
    const Form c1 = s1.at(k).conj();
    for (int l = 0; l < s2.size(); ++l) {
      const Form& hkl = h.h().at(k, l);
      if (hkl.is_zero() || s2.at(l).is_zero()) continue;
      out += wedge(c1, detail::odd_sign(s2.at(l), h.bundle().degree_of(k))) * hkl.scalar_part();
    }
  }
  return out;
}

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

/// D = del + B, the F = D^2 + [D, D-bar] + D-bar^2 curvature and the
/// supertraces omega_k = str F^k.
struct ChernData {
  SuperOperator B{RingSpec{}, GradedBundle{}};
  SuperOperator F{RingSpec{}, GradedBundle{}};
  std::vector<Form> omegas;
  std::vector<Check> checks;
  /// Whether the conjugate equation also holds with D-bar itself in place of
  /// D-bar^P; false as soon as a block of odd bundle shift is present.
  bool literal_conjugate_equation = true;

  /// beta_i, the block of tridegree (i, 0, i-1).
  SuperOperator beta(int i) const { return B.block(i, 0, i - 1); }
};

namespace detail {

inline std::vector<Form> spanning_samples(const RingSpec& ring) {
  std::vector<Form> out{Form::constant(ring, 1)};
  if (ring.is_p1()) {
    out.push_back(Form(Scalar::p1_weight(ring, 1)));
  } else {
    out.push_back(Form(Scalar::z(ring, 1)));
  }
  out.push_back(Form(Scalar::zbar(ring, 1)));
  for (int i = 1; i <= ring.n; ++i) {
    out.push_back(Form::dz(ring, i));
    out.push_back(Form::dzbar(ring, i));
  }
  return out;
}

struct Sample {
  Section s;
  int degree;
};

inline std::vector<Sample> spanning_sections(const RingSpec& ring, const GradedBundle& e) {
  std::vector<Sample> out;
  for (const Form& w : spanning_samples(ring)) {
    const int fd = w.terms().begin()->first.degree();
    for (int k = 0; k < e.total_rank(); ++k) out.push_back({Section::basis(ring, e, k, w), fd + e.degree_of(k)});
  }
  return out;
}

inline Section apply_D(const SuperOperator& b, const Section& s) { return s.dolbeault(Dolbeault::Del) + apply_operator(b, s); }

inline Check make_check(std::string name, bool pass, std::string detail = {}) { return Check{std::move(name), pass, std::move(detail)}; }

}  // namespace detail

/// Closed form of the operator determined by
///   delbar (s1, s2) = (D s1, s2) + (-1)^{|s1|} (s1, D-bar s2),
/// followed by the mandatory checks: the defining equation and its conjugate
/// on a spanning set of section pairs, D^2 = 0, and the (i, 0, i-1) block law.
inline ChernData chern_D(const DbarSuperconnection& m, const HermitianMetric& h) {
  require_same_ring(m.ring(), h.ring());
  if (!(m.bundle() == h.bundle())) throw ShapeMismatch("metric over a different bundle");
  if (!is_flat(m)) throw PreconditionError("superconnection is not flat");
  const RingSpec& ring = m.ring();
  const GradedBundle& e = m.bundle();
  const SuperOperator gamma = m.matrix();

  // (e_k, G e_l) = (-1)^{deg k} odd_sign((h G)_kl, deg k).
  const SuperOperator hg = compose(h.h(), gamma);
  SuperOperator s(ring, e);
  for (int k = 0; k < e.total_rank(); ++k) {
    const int dk = e.degree_of(k);
    for (int l = 0; l < e.total_rank(); ++l) {
      Form v = detail::odd_sign(hg.at(k, l), dk);
      s.at(k, l) = (dk & 1) ? -v : v;
    }
  }
  const SuperOperator b_dagger = compose(h.h().dolbeault(Dolbeault::Delbar) - s, h.h_inverse());
  ChernData out;
  out.B = b_dagger.conj_transpose();

  // Defining equation and its conjugate. Conjugating the defining equation
  // with (s2, s1) = (-1)^{|s1||s2|} conj(P s1, s2), P = (-1)^{bundle degree},
  // gives del (s1, s2) = (D-bar^P s1, s2) + (-1)^{|s1|} (s1, D s2) where
  // D-bar^P negates the blocks of odd bundle shift.
  const SuperOperator gamma_p = gamma.filter([](FormKey, int r) { return (r & 1) == 0; }) - gamma.filter([](FormKey, int r) { return (r & 1) != 0; });
  const auto samples = detail::spanning_sections(ring, e);
  std::vector<Section> d_img, dbar_img, dbar_p_img;
  for (const auto& x : samples) {
    d_img.push_back(detail::apply_D(out.B, x.s));
    dbar_img.push_back(m.apply(x.s));
    dbar_p_img.push_back(x.s.dolbeault(Dolbeault::Delbar) + apply_operator(gamma_p, x.s));
  }
  bool defining = true, conjugate = true, literal = true;
  std::string where, where_conj;
  const std::size_t unit = static_cast<std::size_t>(e.total_rank());
  for (std::size_t a = 0; a < samples.size(); ++a)
    for (std::size_t b = 0; b < samples.size(); ++b) {
      // Leibniz reduces the check to pairs where one side is a basis section,
      // plus a few pairs of form multiples.
      if (a >= unit && b >= unit && (a >= 4 * unit || b >= 4 * unit)) continue;
      const Form p = pairing(h, samples[a].s, samples[b].s);
      const bool odd = samples[a].degree & 1;
      auto side = [&](const Section& x1, const Section& y2) {
        Form r = pairing(h, x1, samples[b].s);
        Form t = pairing(h, samples[a].s, y2);
        return odd ? r - t : r + t;
      };
      if (!(p.delbar() == side(d_img[a], dbar_img[b]))) {
        defining = false;
        where = "pair (" + std::to_string(a) + "," + std::to_string(b) + ")";
      }
      const Form dp = p.del();
      if (!(dp == side(dbar_p_img[a], d_img[b]))) {
        conjugate = false;
        where_conj = "pair (" + std::to_string(a) + "," + std::to_string(b) + ")";
      }
      if (!(dp == side(dbar_img[a], d_img[b]))) literal = false;
    }
  out.checks.push_back(detail::make_check("defining_equation", defining, defining ? "" : where));
  out.checks.push_back(detail::make_check("conjugate_equation", conjugate, conjugate ? "" : where_conj));
  const SuperOperator d_sq = out.B.dolbeault(Dolbeault::Del) + compose(out.B, out.B);
  out.checks.push_back(detail::make_check("D_squared_zero", d_sq.is_zero()));
  out.checks.push_back(detail::make_check("D_block_law", out.B.all_blocks([](const Tridegree& t) { return t.q == 0 && t.r == t.p - 1; })));
  for (const auto& c : out.checks)
    if (!c.pass) throw VerificationFailure("chern_D check " + c.name + " failed " + c.detail);
  out.literal_conjugate_equation = literal;
  return out;
}

/// F = delbar B + del G + [B, G]; checked against the square of
/// d + B + G on a spanning set, for its block law and for Bianchi.
inline SuperOperator curvature(const DbarSuperconnection& m, ChernData& data) {
  const SuperOperator gamma = m.matrix();
  const SuperOperator& b = data.B;
  SuperOperator f = b.dolbeault(Dolbeault::Delbar) + gamma.dolbeault(Dolbeault::Del) + bracket(b, gamma);
  const SuperOperator total = b + gamma;
  bool brute = true;
  for (const auto& x : detail::spanning_sections(m.ring(), m.bundle())) {
    auto calD = [&](const Section& s) { return s.dolbeault(Dolbeault::D) + apply_operator(total, s); };
    if (!(calD(calD(x.s)) == apply_operator(f, x.s))) brute = false;
  }
  data.checks.push_back(detail::make_check("curvature_brute_force", brute));
  data.checks.push_back(detail::make_check("curvature_block_law", f.all_blocks([](const Tridegree& t) { return t.r == t.p - t.q; })));
  data.checks.push_back(detail::make_check("bianchi", (f.dolbeault(Dolbeault::D) + bracket(total, f)).is_zero()));
  for (const auto& c : data.checks)
    if (!c.pass) throw VerificationFailure("curvature check " + c.name + " failed");
  data.F = f;
  return f;
}

/// Full Chern data: D, F and omega_0 .. omega_max_k, with closedness and the
/// (p, q), p != q, vanishing checked for every omega_k.
inline ChernData chern(const DbarSuperconnection& m, const HermitianMetric& h, int max_k) {
  if (max_k < 0) throw PreconditionError("k must be nonnegative");
  ChernData data = chern_D(m, h);
  curvature(m, data);
  SuperOperator pw = SuperOperator::identity(m.ring(), m.bundle());
  for (int k = 0; k <= max_k; ++k) {
    if (k > 0) pw = compose(pw, data.F);
    Form w = supertrace(pw);
    const std::string tag = "omega_" + std::to_string(k);
    data.checks.push_back(detail::make_check(tag + "_closed", w.d().is_zero()));
    bool pq = true;
    for (const auto& [fk, c] : w.terms())
      if (fk.p() != fk.q()) pq = false;
    data.checks.push_back(detail::make_check(tag + "_pq_vanishing", pq));
    data.omegas.push_back(std::move(w));
  }
  for (const auto& c : data.checks)
    if (!c.pass) throw VerificationFailure("chern form check " + c.name + " failed");
  return data;
}

inline Form chern_form(const DbarSuperconnection& m, const HermitianMetric& h, int k) { return chern(m, h, k).omegas.back(); }

/// The (k, k) part of omega_k.
inline Form top_component(const Form& w, int k, int n) { return k <= n ? w.component(k, k) : Form(w.ring()); }

/// ch_k = coefficient * pi^{-k} * omega_k with coefficient i^k / (2^k k!).
struct ChernCharacterTerm {
  int k = 0;
  Form omega;
  GaussianRational coefficient;
};

inline ChernCharacterTerm chern_character_term(const Form& omega_k, int k) {
  GaussianRational c = 1;
  for (int j = 1; j <= k; ++j) c *= GaussianRational(0, Rational(1, 2 * j));
  return {k, omega_k, c};
}

/// Integral of ch_k over P1. ch_0 is the super-rank; ch_1 integrates the
/// dz ^ dzbar coefficient f of omega_1: (i / 2 pi) int f dz ^ dzbar =
/// (1/pi) int f dA. Higher k vanish by dimension.
inline Rational chern_number(const DbarSuperconnection& m, const HermitianMetric& h, int k) {
  if (!m.ring().is_p1()) throw PreconditionError("chern_number requires the P1 ring");
  if (m.ring().dual) throw PreconditionError("chern_number needs a non-dual ring");
  if (k < 0) throw PreconditionError("k must be nonnegative");
  if (k == 0) return m.bundle().super_rank();
  if (k >= 2) return 0;
  const Form w = chern(m, h, 1).omegas[1];
  const Scalar f = w.coeff(FormKey{1, 1});
  const GaussianRational v = f.integrate_p1().value();
  if (!v.is_real()) throw VerificationFailure("chern number is not real: " + v.str());
  return v.re();
}

// ---------------------------------------------------------------------------
// Rescaling and variation

struct LawReport {
  std::vector<Check> checks;
  bool pass() const { return all_pass(checks); }
};

inline Rational rational_power(const Rational& t, int e) {
  Rational r = 1;
  for (int i = 0; i < std::abs(e); ++i) r *= t;
  return e < 0 ? 1 / r : r;
}

/// Direction of the metric rescaling: h_j(t) = t^{sign * j} h_j.
enum class RescaleConvention { PowerJ = 1, PowerMinusJ = -1 };

/// Recomputes D and omega_k with h_j(t) = t^{s j} h_j (s = +-1) and compares
/// omega_k^{p,p}(t) = t^{s (k-p)} omega_k^{p,p} and beta_i(t) = t^{s (1-i)} beta_i.
/// With s = -1 these are the exponents p - k and i - 1.
inline LawReport rescale_and_check(const DbarSuperconnection& m, const HermitianMetric& h, int k, const Rational& t,
                                   RescaleConvention conv = RescaleConvention::PowerJ) {
  const int s = static_cast<int>(conv);
  const ChernData base = chern(m, h, k);
  const ChernData scaled = chern(m, h.rescaled(s > 0 ? t : 1 / t), k);
  LawReport rep;
  for (int kk = 0; kk <= k; ++kk)
    for (int p = 0; p <= m.ring().n; ++p) {
      const Form expect = base.omegas[static_cast<std::size_t>(kk)].component(p, p) * GaussianRational(rational_power(t, s * (kk - p)));
      rep.checks.push_back(detail::make_check("omega_" + std::to_string(kk) + "^(" + std::to_string(p) + "," + std::to_string(p) + ")",
                                              scaled.omegas[static_cast<std::size_t>(kk)].component(p, p) == expect));
    }
  for (int i = 0; i <= m.ring().n; ++i)
    rep.checks.push_back(
        detail::make_check("beta_" + std::to_string(i), scaled.beta(i) == base.beta(i) * GaussianRational(rational_power(t, s * (1 - i)))));
  return rep;
}

/// First-order variation along h -> h + eps h delta: the eps part of omega_k
/// equals k delbar del str(delta F^{k-1}), and delta D = del(delta) + [B, delta].
inline LawReport variation_check(const DbarSuperconnection& m, const HermitianMetric& h, const SuperOperator& delta, int k) {
  if (m.ring().dual) throw PreconditionError("variation_check takes the undeformed data");
  const RingSpec dual = m.ring().with_dual(true);
  const HermitianMetric hd = h.perturbed(delta);
  const ChernData base = chern(m, h, k);
  const ChernData var = chern(m.in_ring(dual), hd, k);
  LawReport rep;
  for (int kk = 0; kk <= k; ++kk) {
    const Form& wv = var.omegas[static_cast<std::size_t>(kk)];
    rep.checks.push_back(detail::make_check("omega_" + std::to_string(kk) + "_standard_part", wv.standard_part() == base.omegas[static_cast<std::size_t>(kk)]));
    Form rhs(m.ring());
    if (kk >= 1) rhs = supertrace(compose(delta, power(base.F, kk - 1))).del().delbar() * GaussianRational(kk);
    rep.checks.push_back(detail::make_check("omega_" + std::to_string(kk) + "_variation", wv.eps_part() == rhs));
  }
  rep.checks.push_back(detail::make_check("delta_D", var.B.eps_part() == delta.dolbeault(Dolbeault::Del) + bracket(base.B, delta)));
  rep.checks.push_back(detail::make_check("delta_D_standard_part", var.B.standard_part() == base.B));
  return rep;
}

// ---------------------------------------------------------------------------
// Exactness witnesses

enum class WitnessKind { D, DDbar };
enum class WitnessStatus { Found, NotExact, TruncationOverflow };

struct WitnessResult {
  WitnessStatus status = WitnessStatus::NotExact;
  Form eta;
  int unknowns = 0;
  int rank = 0;
  int bound = 0;
};

namespace detail {

inline Form witness_operator(const Form& x, WitnessKind kind) { return kind == WitnessKind::D ? x.d() : x.del().delbar(); }

inline std::optional<Form> solve_witness(const Form& w, WitnessKind kind, int bound, int* unknowns, int* rank) {
  const RingSpec& ring = w.ring();
  std::set<std::pair<int, int>> types;
  for (const auto& [fk, c] : w.terms()) {
    if (kind == WitnessKind::DDbar) {
      if (fk.p() >= 1 && fk.q() >= 1) types.insert({fk.p() - 1, fk.q() - 1});
    } else {
      const int deg = fk.degree() - 1;
      for (int p = 0; p <= deg; ++p)
        if (p <= ring.n && deg - p <= ring.n) types.insert({p, deg - p});
    }
  }
  std::vector<Form> basis;
  std::vector<SparseVector> images;
  CoordinateIndex<EntryCoord> index;
  const auto monos = enumerate_monomials(ring, bound);
  for (const auto& [p, q] : types)
    for (const FormKey& fk : enumerate_form_keys(ring.n, p, q))
      for (const Monomial& mono : monos) {
        Form x = Form::basis(ring, fk, Scalar::from_key(ring, mono));
        images.push_back(to_coords(witness_operator(x, kind), index));
        basis.push_back(std::move(x));
      }
  const SparseVector rhs = to_coords(w, index);
  *unknowns = static_cast<int>(basis.size());
  const auto sol = solve_columns(images, rhs, index.size(), rank);
  if (!sol) return std::nullopt;
  Form eta(ring);
  for (const auto& [c, val] : *sol) eta += basis[static_cast<std::size_t>(c)] * val;
  return eta;
}

}  // namespace detail

/// Solves d eta = w (kind D) or del delbar eta = w (kind DDbar) over
/// polynomial coefficients of degree <= bound. On failure a second solve at
/// max(bound + slack, deg w + 2) separates truncation shortfall from
/// non-exactness; the second bound is enough for every exact form.
inline WitnessResult exactness_witness(const Form& w, WitnessKind kind, int bound, int slack = 2) {
  if (!w.ring().is_poly()) throw PreconditionError("exactness_witness requires a polynomial ring");
  if (w.ring().dual) throw PreconditionError("exactness_witness needs a non-dual ring");
  if (!w.d().is_zero()) throw PreconditionError("form is not d-closed");
  if (kind == WitnessKind::DDbar)
    for (const auto& [fk, c] : w.terms())
      if (fk.p() != fk.q()) throw PreconditionError("ddbar witness needs a sum of (p,p) forms");
  WitnessResult res;
  res.bound = bound;
  if (w.is_zero()) {
    res.status = WitnessStatus::Found;
    res.eta = Form(w.ring());
    return res;
  }
  auto eta = detail::solve_witness(w, kind, bound, &res.unknowns, &res.rank);
  if (eta) {
    if (!(detail::witness_operator(*eta, kind) == w)) throw VerificationFailure("witness does not reproduce the form");
    res.status = WitnessStatus::Found;
    res.eta = std::move(*eta);
    return res;
  }
  // del and delbar lower the z- and zbar-degree by one, so an exact polynomial
  // form has a potential of degree <= deg(w) + 2 (deg(w) + 1 for d).
  int top = 0;
  for (const auto& [fk, c] : w.terms())
    for (const auto& [m, x] : c.terms()) top = std::max(top, m.degree());
  const int certain = top + (kind == WitnessKind::D ? 1 : 2);
  int u2 = 0, r2 = 0;
  res.status = detail::solve_witness(w, kind, std::max(bound + slack, certain), &u2, &r2) ? WitnessStatus::TruncationOverflow
                                                                                         : WitnessStatus::NotExact;
  res.eta = Form(w.ring());
  return res;
}

}  // namespace sconn
