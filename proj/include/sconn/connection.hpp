#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sconn/supermodule.hpp"
#include "sconn/truncation.hpp"

namespace sconn {

/// D-bar = delbar + gamma + A + sum_{i>=2} beta_i on A^{0,.} (x) E. The bare
/// delbar is implicit; components are stored separately and each must be
/// homogeneous: gamma (0,0,1), A (0,1,0), beta_i (0,i,1-i). Flatness is a
/// checked property.
class DbarSuperconnection {
 public:
  DbarSuperconnection(RingSpec ring, GradedBundle bundle)
      : ring_(ring), bundle_(bundle), gamma_(ring, bundle), a_(ring, bundle) {}

  DbarSuperconnection(RingSpec ring, GradedBundle bundle, SuperOperator gamma, SuperOperator a, std::vector<SuperOperator> betas = {})
      : ring_(ring), bundle_(std::move(bundle)), gamma_(std::move(gamma)), a_(std::move(a)), betas_(std::move(betas)) {
    validate();
  }

  /// Splits a total-degree-1 matrix part by antiholomorphic form degree.
  static DbarSuperconnection from_matrix(const SuperOperator& gamma_total) {
    const RingSpec& ring = gamma_total.ring();
    if (!gamma_total.is_endomorphism()) throw ShapeMismatch("superconnection matrix must be an endomorphism");
    for (const auto& t : gamma_total.tridegrees())
      if (t.p != 0 || t.total() != 1) throw PreconditionError("matrix part has a block outside tridegrees (0,q,1-q)");
    std::vector<SuperOperator> betas;
    for (int q = 2; q <= ring.n; ++q) betas.push_back(gamma_total.block(0, q, 1 - q));
    DbarSuperconnection m(ring, gamma_total.src(), gamma_total.block(0, 0, 1), gamma_total.block(0, 1, 0), std::move(betas));
    m.trim();
    return m;
  }

  const RingSpec& ring() const { return ring_; }
  const GradedBundle& bundle() const { return bundle_; }
  const SuperOperator& gamma() const { return gamma_; }
  const SuperOperator& a() const { return a_; }
  const std::vector<SuperOperator>& betas() const { return betas_; }

  /// beta_i for i >= 2 (zero when not stored).
  SuperOperator beta(int i) const {
    if (i < 2) throw PreconditionError("beta index starts at 2");
    const auto idx = static_cast<std::size_t>(i - 2);
    return idx < betas_.size() ? betas_[idx] : SuperOperator(ring_, bundle_);
  }
  /// Component of antiholomorphic form degree q: gamma, A, beta_2, ...
  SuperOperator part(int q) const {
    if (q == 0) return gamma_;
    if (q == 1) return a_;
    return beta(q);
  }
  bool betas_vanish() const {
    for (const auto& b : betas_)
      if (!b.is_zero()) return false;
    return true;
  }

  /// gamma + A + sum beta_i.
  SuperOperator matrix() const {
    SuperOperator m = gamma_ + a_;
    for (const auto& b : betas_) m += b;
    return m;
  }

  /// D-bar applied to a section: delbar componentwise plus the matrix part.
  Section apply(const Section& s) const { return s.dolbeault(Dolbeault::Delbar) + apply_operator(matrix(), s); }

  /// Drops trailing zero betas so equal operators compare equal.
  void trim() {
    while (!betas_.empty() && betas_.back().is_zero()) betas_.pop_back();
  }

  friend bool operator==(const DbarSuperconnection& x, const DbarSuperconnection& y) {
    if (!(x.ring_ == y.ring_) || !(x.bundle_ == y.bundle_)) return false;
    const std::size_t n = std::max(x.betas_.size(), y.betas_.size());
    for (std::size_t i = 0; i < n; ++i)
      if (!(x.beta(static_cast<int>(i) + 2) == y.beta(static_cast<int>(i) + 2))) return false;
    return x.gamma_ == y.gamma_ && x.a_ == y.a_;
  }

  DbarSuperconnection in_ring(RingSpec target) const {
    std::vector<SuperOperator> b;
    for (const auto& x : betas_) b.push_back(x.in_ring(target));
    return {target, bundle_, gamma_.in_ring(target), a_.in_ring(target), std::move(b)};
  }

 private:
  void validate() const {
    auto check = [&](const SuperOperator& op, int q, const char* name) {
      require_same_ring(ring_, op.ring());
      if (!(op.src() == bundle_) || !(op.dst() == bundle_)) throw ShapeMismatch(std::string(name) + " is not an endomorphism of the bundle");
      for (const auto& t : op.tridegrees())
        if (t.p != 0 || t.q != q || t.r != 1 - q)
          throw PreconditionError(std::string(name) + " has a block of tridegree (" + std::to_string(t.p) + "," + std::to_string(t.q) + "," +
                                  std::to_string(t.r) + ")");
    };
    check(gamma_, 0, "gamma");
    check(a_, 1, "A");
    for (std::size_t i = 0; i < betas_.size(); ++i) check(betas_[i], static_cast<int>(i) + 2, "beta");
  }

  RingSpec ring_;
  GradedBundle bundle_;
  SuperOperator gamma_;
  SuperOperator a_;
  std::vector<SuperOperator> betas_;
};

// ---------------------------------------------------------------------------
// Flatness

/// Graded components of D-bar^2, indexed by antiholomorphic form degree q:
/// q = 0: gamma^2, q = 1: [gamma, nabla], q = 2: nabla^2 + [gamma, beta_2], ...
/// Each is delbar(part(q-1)) + sum_{a+b=q} part(a) part(b).
inline std::vector<SuperOperator> flatness_residues(const DbarSuperconnection& m) {
  std::vector<SuperOperator> parts;
  for (int q = 0; q <= m.ring().n; ++q) parts.push_back(m.part(q));
  std::vector<SuperOperator> out;
  for (int q = 0; q <= m.ring().n; ++q) {
    SuperOperator r(m.ring(), m.bundle());
    if (q >= 1) r += parts[static_cast<std::size_t>(q - 1)].dolbeault(Dolbeault::Delbar);
    for (int a = 0; a <= q; ++a) r += compose(parts[static_cast<std::size_t>(a)], parts[static_cast<std::size_t>(q - a)]);
    out.push_back(std::move(r));
  }
  return out;
}

inline bool is_flat(const DbarSuperconnection& m) {
  for (const auto& r : flatness_residues(m))
    if (!r.is_zero()) return false;
  return true;
}

/// Independent route to D-bar^2: applies D-bar twice to the basis sections and
/// reads off the matrix. Also checks A-linearity of the square on
/// omega . e_k for every sample form omega; returns false in `linear` if that
/// fails.
inline SuperOperator brute_force_square(const DbarSuperconnection& m, const std::vector<Form>& samples, bool* linear = nullptr) {
  const GradedBundle& e = m.bundle();
  SuperOperator sq(m.ring(), e);
  bool ok = true;
  for (int k = 0; k < e.total_rank(); ++k) {
    const Section base = Section::basis(m.ring(), e, k, Form::constant(m.ring(), 1));
    const Section img = m.apply(m.apply(base));
    for (int i = 0; i < e.total_rank(); ++i) sq.at(i, k) = img.at(i);
    for (const Form& omega : samples) {
      const Section s = Section::basis(m.ring(), e, k, omega);
      const Section lhs = m.apply(m.apply(s));
      Section rhs(m.ring(), e);
      for (int i = 0; i < e.total_rank(); ++i) rhs.at(i) = wedge(omega, img.at(i));
      if (!(lhs == rhs)) ok = false;
    }
  }
  if (linear) *linear = ok;
  return sq;
}

/// Superconnection of a holomorphic complex: A = 0, no betas.
inline DbarSuperconnection from_complex(const GradedBundle& bundle, const SuperOperator& gamma) {
  for (int i = 0; i < gamma.rows(); ++i)
    for (int k = 0; k < gamma.cols(); ++k)
      for (const auto& [fk, c] : gamma.at(i, k).terms())
        if (!c.holomorphic()) throw PreconditionError("complex differential has a non-holomorphic entry");
  DbarSuperconnection m(gamma.ring(), bundle, gamma, SuperOperator(gamma.ring(), bundle));
  if (!compose(gamma, gamma).is_zero()) throw PreconditionError("complex differential does not square to zero");
  return m;
}

// ---------------------------------------------------------------------------
// Gauge transformations

/// Finite exponential of a nilpotent endomorphism.
inline SuperOperator exp_nilpotent(const SuperOperator& x) {
  SuperOperator out = SuperOperator::identity(x.ring(), x.src());
  SuperOperator term = out;
  for (long m = 1;; ++m) {
    term = compose(term, x);
    if (term.is_zero()) break;
    term *= GaussianRational(Rational(1, m));
    out += term;
    if (m > 64) throw Error("exp_nilpotent: operator is not nilpotent");
  }
  return out;
}

/// log(u) for u - 1 nilpotent.
inline SuperOperator log_unipotent(const SuperOperator& u) {
  const SuperOperator x = u - SuperOperator::identity(u.ring(), u.src());
  SuperOperator out(u.ring(), u.src());
  SuperOperator pw = SuperOperator::identity(u.ring(), u.src());
  for (long m = 1;; ++m) {
    pw = compose(pw, x);
    if (pw.is_zero()) break;
    out += pw * GaussianRational(Rational(m % 2 ? 1 : -1, m));
    if (m > 64) throw Error("log_unipotent: argument is not unipotent");
  }
  return out;
}

/// Strict gauge parameter phi = phi_1 + phi_2 + ..., phi_i of tridegree
/// (0, i, -i). `phis()[0]` is phi_1.
class GaugeParameter {
 public:
  GaugeParameter(RingSpec ring, GradedBundle bundle) : ring_(ring), bundle_(std::move(bundle)) {}
  GaugeParameter(RingSpec ring, GradedBundle bundle, std::vector<SuperOperator> phis)
      : ring_(ring), bundle_(std::move(bundle)), phis_(std::move(phis)) {
    for (std::size_t i = 0; i < phis_.size(); ++i) {
      require_same_ring(ring_, phis_[i].ring());
      if (!(phis_[i].src() == bundle_) || !(phis_[i].dst() == bundle_)) throw ShapeMismatch("gauge component is not an endomorphism");
      const int deg = static_cast<int>(i) + 1;
      for (const auto& t : phis_[i].tridegrees())
        if (t.p != 0 || t.q != deg || t.r != -deg) throw PreconditionError("gauge parameter is not strict: block outside (0,i,-i)");
    }
  }

  /// Splits an endomorphism into strict components; rejects a (0,0,0) part.
  static GaugeParameter from_total(const SuperOperator& phi) {
    std::vector<SuperOperator> parts;
    for (const auto& t : phi.tridegrees())
      if (t.p != 0 || t.q < 1 || t.r != -t.q) throw PreconditionError("gauge parameter is not strict");
    for (int i = 1; i <= phi.ring().n; ++i) parts.push_back(phi.block(0, i, -i));
    while (!parts.empty() && parts.back().is_zero()) parts.pop_back();
    return GaugeParameter(phi.ring(), phi.src(), std::move(parts));
  }

  const RingSpec& ring() const { return ring_; }
  const GradedBundle& bundle() const { return bundle_; }
  const std::vector<SuperOperator>& phis() const { return phis_; }
  SuperOperator phi(int i) const {
    const auto idx = static_cast<std::size_t>(i - 1);
    return idx < phis_.size() ? phis_[idx] : SuperOperator(ring_, bundle_);
  }
  SuperOperator total() const {
    SuperOperator t(ring_, bundle_);
    for (const auto& p : phis_) t += p;
    return t;
  }
  bool is_zero() const { return total().is_zero(); }
  /// Parameter of e^{-phi}.
  GaugeParameter inverse() const {
    std::vector<SuperOperator> neg;
    for (const auto& p : phis_) neg.push_back(-p);
    return GaugeParameter(ring_, bundle_, std::move(neg));
  }

 private:
  RingSpec ring_;
  GradedBundle bundle_;
  std::vector<SuperOperator> phis_;
};

/// Parameter of e^{phi} e^{psi}, computed through the nilpotent logarithm.
inline GaugeParameter compose_gauge(const GaugeParameter& phi, const GaugeParameter& psi) {
  const SuperOperator u = compose(exp_nilpotent(phi.total()), exp_nilpotent(psi.total()));
  return GaugeParameter::from_total(log_unipotent(u));
}

/// e^{-phi} D-bar e^{phi}: matrix part e^{-phi} (delbar e^{phi}) + e^{-phi} G e^{phi}.
inline DbarSuperconnection gauge(const DbarSuperconnection& m, const GaugeParameter& phi) {
  require_same_ring(m.ring(), phi.ring());
  if (!(m.bundle() == phi.bundle())) throw ShapeMismatch("gauge parameter over a different bundle");
  const SuperOperator t = phi.total();
  if (t.is_zero()) return m;
  const SuperOperator e = exp_nilpotent(t);
  const SuperOperator e_inv = exp_nilpotent(-t);
  const SuperOperator g = compose(e_inv, e.dolbeault(Dolbeault::Delbar)) + compose(compose(e_inv, m.matrix()), e);
  return DbarSuperconnection::from_matrix(g);
}

// ---------------------------------------------------------------------------
// Twists, shifts, cones

/// Thrown when a twisting cochain fails the Maurer-Cartan equation.
class MaurerCartanViolation : public VerificationFailure {
 public:
  explicit MaurerCartanViolation(SuperOperator residue)
      : VerificationFailure("twisting cochain violates the Maurer-Cartan equation"), residue_(std::move(residue)) {}
  const SuperOperator& residue() const { return residue_; }
  int exit_code() const override { return 2; }

 private:
  SuperOperator residue_;
};

/// A degree-1 endomorphism alpha intended as a twist of D-bar.
struct TwistCochain {
  SuperOperator alpha;
};

/// D-bar_Hom(alpha) + alpha^2 = delbar(alpha) + [G, alpha] + alpha^2.
inline SuperOperator maurer_cartan_residue(const DbarSuperconnection& m, const TwistCochain& c) {
  return c.alpha.dolbeault(Dolbeault::Delbar) + bracket(m.matrix(), c.alpha) + compose(c.alpha, c.alpha);
}

inline DbarSuperconnection twist(const DbarSuperconnection& m, const TwistCochain& c) {
  require_same_ring(m.ring(), c.alpha.ring());
  if (!(c.alpha.src() == m.bundle()) || !(c.alpha.dst() == m.bundle())) throw ShapeMismatch("twist cochain over a different bundle");
  for (const auto& t : c.alpha.tridegrees())
    if (t.p != 0 || t.total() != 1) throw PreconditionError("twist cochain must have tridegrees (0,q,1-q)");
  SuperOperator res = maurer_cartan_residue(m, c);
  if (!res.is_zero()) throw MaurerCartanViolation(std::move(res));
  return DbarSuperconnection::from_matrix(m.matrix() + c.alpha);
}

/// Shift of the superconnection: degree j moves to j - k. For odd k the
/// module structure is twisted by the parity of forms, which turns the matrix
/// part G into -(-1)^{|form|} G (the bare delbar is unchanged).
inline DbarSuperconnection shift(const DbarSuperconnection& m, int k) {
  SuperOperator g = m.matrix().shift(k);
  if (k & 1) g = -g.map_entries([](const Form& f) { return detail::odd_sign(f, 1); }, m.ring());
  return DbarSuperconnection::from_matrix(g);
}

/// Direct sum of superconnections.
inline DbarSuperconnection direct_sum(const DbarSuperconnection& x, const DbarSuperconnection& y) {
  return DbarSuperconnection::from_matrix(direct_sum(x.matrix(), y.matrix()));
}

/// D-bar_Hom(f) = delbar f + G_N f - (-1)^{|f|} f G_M for a homogeneous map.
inline SuperOperator hom_differential(const DbarSuperconnection& m, const DbarSuperconnection& n, const SuperOperator& f) {
  SuperOperator out = f.dolbeault(Dolbeault::Delbar);
  for (int par = 0; par < 2; ++par) {
    const SuperOperator fp = f.parity_part(par);
    if (fp.is_zero()) continue;
    out += compose(n.matrix(), fp);
    if (par)
      out += compose(fp, m.matrix());
    else
      out -= compose(fp, m.matrix());
  }
  return out;
}

/// Cone of a closed degree-0 map f: M -> N, realized as the twist of
/// shift(M, 1) (+) N by the one-sided cochain carrying f. Degree i of the
/// cone is M^{i+1} (+) N^i.
inline DbarSuperconnection cone(const DbarSuperconnection& m, const DbarSuperconnection& n, const SuperOperator& f) {
  require_same_ring(m.ring(), n.ring());
  if (!(f.src() == m.bundle()) || !(f.dst() == n.bundle())) throw ShapeMismatch("cone map has the wrong shape");
  for (const auto& t : f.tridegrees())
    if (t.p != 0 || t.total() != 0) throw PreconditionError("cone map must have degree 0");
  if (!hom_differential(m, n, f).is_zero()) throw PreconditionError("cone map is not closed");
  const DbarSuperconnection ms = shift(m, 1);
  const DbarSuperconnection sum = direct_sum(ms, n);
  SuperOperator alpha(m.ring(), sum.bundle());
  for (int i = 0; i < f.rows(); ++i)
    for (int k = 0; k < f.cols(); ++k)
      alpha.at(summand_index(ms.bundle(), n.bundle(), true, i), summand_index(ms.bundle(), n.bundle(), false, k)) = f.at(i, k);
  return twist(sum, TwistCochain{alpha});
}

// ---------------------------------------------------------------------------
// Hom superconnection

/// Basis of Hom(E_M, E_N): elementary maps e^M_k -> e^N_i, grouped by degree
/// deg(i) - deg(k).
struct HomBasis {
  GradedBundle bundle;
  std::vector<std::pair<int, int>> pairs;  // flat hom index -> (i in N, k in M)
};

inline HomBasis hom_basis(const GradedBundle& m, const GradedBundle& n) {
  std::map<int, std::vector<std::pair<int, int>>> by_degree;
  for (int i = 0; i < n.total_rank(); ++i)
    for (int k = 0; k < m.total_rank(); ++k) by_degree[n.degree_of(i) - m.degree_of(k)].push_back({i, k});
  std::map<int, int> ranks;
  HomBasis hb;
  for (const auto& [deg, list] : by_degree) {
    ranks[deg] = static_cast<int>(list.size());
    hb.pairs.insert(hb.pairs.end(), list.begin(), list.end());
  }
  hb.bundle = GradedBundle(ranks);
  return hb;
}

/// Hom superconnection with D-bar_Hom(phi) = D-bar_N phi - (-1)^{|phi|} phi D-bar_M.
inline DbarSuperconnection hom_sc(const DbarSuperconnection& m, const DbarSuperconnection& n) {
  require_same_ring(m.ring(), n.ring());
  const HomBasis hb = hom_basis(m.bundle(), n.bundle());
  SuperOperator g(m.ring(), hb.bundle);
  std::map<std::pair<int, int>, int> where;
  for (std::size_t u = 0; u < hb.pairs.size(); ++u) where[hb.pairs[u]] = static_cast<int>(u);
  for (std::size_t u = 0; u < hb.pairs.size(); ++u) {
    SuperOperator e(m.ring(), m.bundle(), n.bundle());
    e.at(hb.pairs[u].first, hb.pairs[u].second) = Form::constant(m.ring(), 1);
    const SuperOperator img = hom_differential(m, n, e);
    for (int a = 0; a < img.rows(); ++a)
      for (int b = 0; b < img.cols(); ++b)
        if (!img.at(a, b).is_zero()) g.at(where.at({a, b}), static_cast<int>(u)) = img.at(a, b);
  }
  return DbarSuperconnection::from_matrix(g);
}

/// Hom section (component per elementary map) -> operator M -> N.
inline SuperOperator hom_section_to_operator(const HomBasis& hb, const Section& s, const GradedBundle& m, const GradedBundle& n) {
  SuperOperator f(s.ring(), m, n);
  for (std::size_t u = 0; u < hb.pairs.size(); ++u) f.at(hb.pairs[u].first, hb.pairs[u].second) = s.at(static_cast<int>(u));
  return f;
}

struct H0Result {
  int dimension = 0;
  std::vector<SuperOperator> basis;
  int kernel_dimension = 0;
};

namespace detail {

// Elements of total degree `deg` in the Hom complex with coefficients of
// degree <= bound, each as (section, D-bar_Hom image).
inline std::vector<Section> hom_cochains(const DbarSuperconnection& h, int deg, int bound) {
  std::vector<Section> out;
  const auto monos = enumerate_monomials(h.ring(), bound);
  for (int u = 0; u < h.bundle().total_rank(); ++u) {
    const int q = deg - h.bundle().degree_of(u);
    if (q < 0 || q > h.ring().n) continue;
    for (const FormKey& fk : enumerate_form_keys(h.ring().n, 0, q))
      for (const Monomial& mono : monos)
        out.push_back(Section::basis(h.ring(), h.bundle(), u, Form::basis(h.ring(), fk, Scalar::from_key(h.ring(), mono))));
  }
  return out;
}

inline SparseVector section_coords(const Section& s, CoordinateIndex<EntryCoord>& index) {
  SparseVector v;
  for (int u = 0; u < s.size(); ++u)
    for (const auto& [fk, c] : s.at(u).terms())
      for (const auto& [mono, x] : c.terms()) v[index.id({u, 0, fk, mono})] += x;
  return v;
}

inline int h0_dimension(const DbarSuperconnection& h, int bound, int image_bound, std::vector<Section>* reps) {
  CoordinateIndex<EntryCoord> target;
  const std::vector<Section> zero_cochains = hom_cochains(h, 0, bound);
  std::vector<SparseVector> images;
  for (const auto& s : zero_cochains) images.push_back(section_coords(h.apply(s), target));
  // Kernel of D-bar_Hom on degree-0 cochains.
  EchelonBasis eq;
  for (const auto& row : transpose_columns(images, target.size())) eq.insert(row);
  const auto kernel = eq.nullspace(static_cast<int>(zero_cochains.size()));
  // Kernel vectors and exact cochains in a shared coordinate space.
  CoordinateIndex<EntryCoord> space;
  std::vector<SparseVector> kernel_vecs;
  std::vector<Section> kernel_secs;
  for (const auto& x : kernel) {
    Section s(h.ring(), h.bundle());
    for (const auto& [c, val] : x) {
      Section term = zero_cochains[static_cast<std::size_t>(c)];
      for (int u = 0; u < term.size(); ++u) term.at(u) *= val;
      s += term;
    }
    kernel_vecs.push_back(section_coords(s, space));
    kernel_secs.push_back(std::move(s));
  }
  EchelonBasis span;
  for (const auto& s : hom_cochains(h, -1, image_bound)) span.insert(section_coords(h.apply(s), space));
  int dim = 0;
  for (std::size_t i = 0; i < kernel_vecs.size(); ++i) {
    if (span.insert(kernel_vecs[i])) {
      ++dim;
      if (reps) reps->push_back(kernel_secs[i]);
    }
  }
  return dim;
}

}  // namespace detail

/// Degree-0 cohomology of the global Hom complex restricted to polynomial
/// coefficients: cocycles of degree <= bound modulo coboundaries of cochains
/// of degree <= bound + 1. Throws TruncationOverflow when allowing one more
/// degree for the coboundaries changes the answer.
inline H0Result h0_hom(const DbarSuperconnection& m, const DbarSuperconnection& n, int bound) {
  if (!m.ring().is_poly()) throw PreconditionError("h0_hom requires a polynomial ring");
  const HomBasis hb = hom_basis(m.bundle(), n.bundle());
  const DbarSuperconnection h = hom_sc(m, n);
  std::vector<Section> reps;
  H0Result out;
  out.dimension = detail::h0_dimension(h, bound, bound + 1, &reps);
  const int wider = detail::h0_dimension(h, bound, bound + 2, nullptr);
  if (wider != out.dimension)
    throw TruncationOverflow("h0_hom: coboundaries need degree > bound + 1 (dimension " + std::to_string(out.dimension) + " -> " +
                             std::to_string(wider) + ")");
  for (const auto& s : reps) out.basis.push_back(hom_section_to_operator(hb, s, m.bundle(), n.bundle()));
  return out;
}

// ---------------------------------------------------------------------------
// Completion to a flat superconnection

struct Obstruction {
  int stage = 0;          ///< ladder index q (equation for beta_q)
  SuperOperator residue;  ///< u_q that could not be cancelled
  bool truncation = false;  ///< solvable with a larger bound
  std::string message;
};

namespace detail {

// Solves [gamma, X] = rhs for X of tridegree (0, q, 1-q), coefficients of
// degree <= bound.
inline std::optional<SuperOperator> solve_gamma_bracket(const SuperOperator& gamma, const SuperOperator& rhs, int q, int bound) {
  const RingSpec& ring = gamma.ring();
  const GradedBundle& e = gamma.src();
  CoordinateIndex<EntryCoord> index;
  std::vector<SuperOperator> unknowns;
  std::vector<SparseVector> images;
  const auto monos = enumerate_monomials(ring, bound);
  const auto keys = enumerate_form_keys(ring.n, 0, q);
  for (int i = 0; i < e.total_rank(); ++i)
    for (int k = 0; k < e.total_rank(); ++k) {
      if (e.degree_of(i) - e.degree_of(k) != 1 - q) continue;
      for (const FormKey& fk : keys)
        for (const Monomial& mono : monos) {
          SuperOperator x(ring, e);
          x.at(i, k) = Form::basis(ring, fk, Scalar::from_key(ring, mono));
          images.push_back(to_coords(bracket(gamma, x), index));
          unknowns.push_back(std::move(x));
        }
    }
  const SparseVector b = to_coords(rhs, index);
  const auto sol = solve_columns(images, b, index.size());
  if (!sol) return std::nullopt;
  SuperOperator x(ring, e);
  for (const auto& [c, val] : *sol) x += unknowns[static_cast<std::size_t>(c)] * val;
  return x;
}

}  // namespace detail

/// Solves the flatness ladder for beta_2, beta_3, ... given gamma and A with
/// gamma^2 = 0, delbar gamma = 0 and [delbar + A, gamma] = 0. At stage q the
/// equation is [gamma, beta_q] + u_q = 0 with u_q = delbar(part(q-1)) +
/// sum_{a+b=q, a,b>=1} part(a) part(b); the Bianchi condition [gamma, u_q] = 0
/// is asserted before each solve.
inline std::variant<DbarSuperconnection, Obstruction> complete_to_flat(const GradedBundle& bundle, const SuperOperator& gamma,
                                                                       const SuperOperator& a, int bound, int retry_slack = 2) {
  const RingSpec& ring = gamma.ring();
  if (!ring.is_poly()) throw PreconditionError("complete_to_flat requires a polynomial ring");
  DbarSuperconnection m(ring, bundle, gamma, a);
  if (!compose(gamma, gamma).is_zero()) throw PreconditionError("gamma^2 != 0");
  if (!gamma.dolbeault(Dolbeault::Delbar).is_zero()) throw PreconditionError("gamma is not holomorphic");
  if (!(bracket(gamma, a) + gamma.dolbeault(Dolbeault::Delbar)).is_zero()) throw PreconditionError("[delbar + A, gamma] != 0");

  std::vector<SuperOperator> parts{gamma, a};
  for (int q = 2; q <= ring.n; ++q) {
    SuperOperator u = parts[static_cast<std::size_t>(q - 1)].dolbeault(Dolbeault::Delbar);
    for (int x = 1; x < q; ++x) u += compose(parts[static_cast<std::size_t>(x)], parts[static_cast<std::size_t>(q - x)]);
    if (!bracket(gamma, u).is_zero()) throw VerificationFailure("Bianchi condition [gamma, u_" + std::to_string(q) + "] != 0");
    auto beta = detail::solve_gamma_bracket(gamma, -u, q, bound);
    if (!beta) {
      Obstruction ob{q, u, false, {}};
      if (detail::solve_gamma_bracket(gamma, -u, q, bound + retry_slack)) {
        ob.truncation = true;
        ob.message = "ladder equation " + std::to_string(q) + " needs coefficients above degree " + std::to_string(bound);
      } else {
        ob.message = "ladder equation " + std::to_string(q) + " has no solution up to degree " + std::to_string(bound + retry_slack);
      }
      return ob;
    }
    parts.push_back(std::move(*beta));
  }
  std::vector<SuperOperator> betas(parts.begin() + 2, parts.end());
  DbarSuperconnection out(ring, bundle, gamma, a, std::move(betas));
  out.trim();
  if (!is_flat(out)) throw VerificationFailure("completed superconnection is not flat");
  return out;
}

}  // namespace sconn
