#include "support.hpp"

using namespace sconn;
using namespace sconn::test;

namespace {

const RingSpec R1 = RingSpec::poly(1);
const RingSpec R2 = RingSpec::poly(2);

GradedBundle bundle(std::map<int, int> r) { return GradedBundle(std::move(r)); }

DbarSuperconnection unit(const RingSpec& ring) { return DbarSuperconnection(ring, bundle({{0, 1}})); }

SuperOperator brute_square(const DbarSuperconnection& m, bool* linear = nullptr) {
  return brute_force_square(m, detail::spanning_samples(m.ring()), linear);
}

SuperOperator residue_sum(const DbarSuperconnection& m) {
  SuperOperator s(m.ring(), m.bundle());
  for (const auto& r : flatness_residues(m)) s += r;
  return s;
}

long binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(FromComplex, KoszulIsFlat) {
  const DbarSuperconnection m = koszul_of_coordinates(R2);
  EXPECT_EQ(m.bundle(), bundle({{-2, 1}, {-1, 2}, {0, 1}}));
  EXPECT_TRUE(is_flat(m));
  for (const auto& r : flatness_residues(m)) EXPECT_TRUE(r.is_zero());
  EXPECT_TRUE(brute_square(m).is_zero());
}

TEST(FromComplex, ZeroDifferentialIsBareDolbeault) {
  const GradedBundle e = bundle({{0, 2}});
  const DbarSuperconnection m = from_complex(e, SuperOperator(R2, e));
  EXPECT_TRUE(m.gamma().is_zero());
  EXPECT_TRUE(m.a().is_zero());
  EXPECT_TRUE(m.betas_vanish());
  EXPECT_TRUE(is_flat(m));
}

TEST(FromComplex, RejectsNonHolomorphicEntries) {
  const GradedBundle e = bundle({{-1, 1}, {0, 1}});
  SuperOperator g(R1, e);
  g.at(1, 0) = Form(Scalar::zbar(R1));
  EXPECT_THROW(from_complex(e, g), PreconditionError);
}

TEST(Flatness, GammaSquaredIsFirstResidue) {
  const GradedBundle e = bundle({{-1, 1}, {0, 1}, {1, 1}});
  SuperOperator g(R1, e);
  g.at(1, 0) = Form::constant(R1, 1);
  g.at(2, 1) = Form::constant(R1, 1);
  const DbarSuperconnection m(R1, e, g, SuperOperator(R1, e));
  EXPECT_EQ(flatness_residues(m)[0], compose(g, g));
  EXPECT_FALSE(compose(g, g).is_zero());
}

TEST(Flatness, PerturbedBetaBreaksFlatness) {
  // a flat instance with beta_2 perturbed by a block that does not
  // commute with gamma; the residue is recomputed by expanding D-bar^2.
  Generator gen(17);
  const DbarSuperconnection flat = random_gauged_koszul(gen, R2, 1);
  ASSERT_TRUE(is_flat(flat));
  SuperOperator bump(R2, flat.bundle());
  bump.at(flat.bundle().index(-1, 0), flat.bundle().index(0, 0)) = wedge(Form::dzbar(R2, 1), Form::dzbar(R2, 2));
  ASSERT_FALSE(bracket(flat.gamma(), bump).is_zero());
  const DbarSuperconnection m(R2, flat.bundle(), flat.gamma(), flat.a(), {flat.beta(2) + bump});
  EXPECT_FALSE(is_flat(m));
  bool linear = false;
  EXPECT_EQ(brute_square(m, &linear), residue_sum(m));
  EXPECT_TRUE(linear);
}

TEST(Superconnection, RejectsMisplacedBlocks) {
  const GradedBundle e = bundle({{-1, 1}, {0, 1}});
  SuperOperator a(R1, e);
  a.at(1, 0) = Form::dzbar(R1, 1);
  EXPECT_THROW(DbarSuperconnection(R1, e, SuperOperator(R1, e), a), PreconditionError);
}

TEST(Gauge, ZeroParameterIsIdentity) {
  const DbarSuperconnection m = koszul_of_coordinates(R2);
  EXPECT_EQ(gauge(m, GaugeParameter(R2, m.bundle())), m);
}

TEST(Gauge, GammaInvariantAndNablaShift) {
  Generator gen(23);
  for (int trial = 0; trial < 20; ++trial) {
    const RingSpec ring = RingSpec::poly(2 + trial % 2);
    const DbarSuperconnection m = random_gauged_koszul(gen, ring, 1);
    const GaugeParameter phi = gen.strict_gauge(ring, m.bundle(), 1, false);
    const DbarSuperconnection g = gauge(m, phi);
    EXPECT_EQ(g.gamma(), m.gamma());
    const GaugeParameter only1(ring, m.bundle(), {phi.phi(1)});
    const DbarSuperconnection g1 = gauge(m, only1);
    const SuperOperator expected = m.a() + bracket(m.gamma(), phi.phi(1));
    for (int r = -1; r <= 1; ++r) EXPECT_EQ(g1.a().block(0, 1, r), expected.block(0, 1, r));
    EXPECT_TRUE(is_flat(g));
    EXPECT_EQ(gauge(g, phi.inverse()), m);
  }
}

TEST(Gauge, CompositionLaw) {
  Generator gen(29);
  const DbarSuperconnection m = koszul_of_coordinates(R2);
  const GaugeParameter phi = gen.strict_gauge(R2, m.bundle(), 1, false);
  const GaugeParameter psi = gen.strict_gauge(R2, m.bundle(), 1, false);
  EXPECT_EQ(gauge(m, compose_gauge(phi, psi)), gauge(gauge(m, phi), psi));
  EXPECT_TRUE(compose_gauge(phi, phi.inverse()).is_zero());
}

TEST(Gauge, RejectsNonStrictParameter) {
  const DbarSuperconnection m = koszul_of_coordinates(R2);
  EXPECT_THROW(GaugeParameter(R2, m.bundle(), {SuperOperator::identity(R2, m.bundle())}), PreconditionError);
}

TEST(Twist, ZeroCochain) {
  const DbarSuperconnection m = koszul_of_coordinates(R2);
  EXPECT_EQ(twist(m, TwistCochain{SuperOperator(R2, m.bundle())}), m);
}

TEST(Twist, GaugeDifferenceIsMaurerCartan) {
  // alpha = e^{-phi} D-bar e^{phi} - D-bar, residue by expansion.
  Generator gen(31);
  const DbarSuperconnection m = koszul_of_coordinates(R2);
  const DbarSuperconnection g = gauge(m, gen.strict_gauge(R2, m.bundle(), 1, false));
  const TwistCochain alpha{g.matrix() - m.matrix()};
  EXPECT_TRUE(maurer_cartan_residue(m, alpha).is_zero());
  const DbarSuperconnection t = twist(m, alpha);
  EXPECT_TRUE(is_flat(t));
  EXPECT_EQ(t, g);
}

TEST(Twist, ViolationCarriesResidue) {
  SuperOperator alpha(R2, bundle({{0, 1}}));
  alpha.at(0, 0) = wedge(Form(Scalar::zbar(R2, 1)), Form::dzbar(R2, 2));
  try {
    twist(unit(R2), TwistCochain{alpha});
    FAIL() << "expected MaurerCartanViolation";
  } catch (const MaurerCartanViolation& e) {
    EXPECT_EQ(e.residue().at(0, 0), wedge(Form::dzbar(R2, 1), Form::dzbar(R2, 2)));
    EXPECT_EQ(e.exit_code(), 2);
  }
}

TEST(Shift, OddShiftKeepsFlatness) {
  Generator gen(37);
  const DbarSuperconnection m = random_gauged_koszul(gen, R2, 1);
  for (int k : {-1, 1, 2}) {
    const DbarSuperconnection s = shift(m, k);
    EXPECT_EQ(s.bundle(), m.bundle().shift(k));
    EXPECT_TRUE(is_flat(s));
    EXPECT_EQ(brute_square(s), residue_sum(s));
  }
  EXPECT_EQ(shift(shift(m, 1), -1), m);
}

TEST(Hom, UnitDifferentialIsDelbar) {
  const DbarSuperconnection h = hom_sc(unit(R2), unit(R2));
  EXPECT_TRUE(h.gamma().is_zero());
  EXPECT_TRUE(h.a().is_zero());
  EXPECT_EQ(h.bundle(), bundle({{0, 1}}));
}

TEST(Hom, IdentityIsClosedAndHomIsFlat) {
  Generator gen(41);
  const DbarSuperconnection m = random_gauged_koszul(gen, R2, 1);
  EXPECT_TRUE(hom_differential(m, m, SuperOperator::identity(R2, m.bundle())).is_zero());
  const DbarSuperconnection k = koszul_of_coordinates(R2);
  EXPECT_TRUE(is_flat(hom_sc(k, k)));
  EXPECT_TRUE(is_flat(hom_sc(m, k)));
}

TEST(Hom, UnitH0CountsHolomorphicPolynomials) {
  // kernel of delbar on the truncated monomial basis is spanned by
  // the holomorphic monomials, C(n + d, n) of them.
  for (int n = 1; n <= 2; ++n)
    for (int d = 0; d <= 3; ++d) {
      const RingSpec ring = RingSpec::poly(n);
      int holomorphic = 0;
      for (const Monomial& m : enumerate_monomials(ring, d)) holomorphic += m.holomorphic() ? 1 : 0;
      EXPECT_EQ(holomorphic, binomial(n + d, n));
      EXPECT_EQ(h0_hom(unit(ring), unit(ring), d).dimension, holomorphic) << "n=" << n << " d=" << d;
    }
}

TEST(Hom, UnitToShiftedUnitVanishes) {
  // every polynomial (0,1)-form in one variable is delbar-exact.
  for (int d = 0; d <= 3; ++d) {
    EXPECT_EQ(h0_hom(unit(R1), shift(unit(R1), 1), d).dimension, 0);
    EXPECT_EQ(h0_hom(unit(R1), shift(unit(R1), -1), d).dimension, 0);
  }
}

TEST(Hom, ConeOfIdentityHasNoDegreeZeroClasses) {
  const DbarSuperconnection u = unit(R1);
  const DbarSuperconnection c = cone(u, u, SuperOperator::identity(R1, u.bundle()));
  EXPECT_TRUE(is_flat(c));
  EXPECT_EQ(c.bundle(), bundle({{-1, 1}, {0, 1}}));
  for (int d = 0; d <= 2; ++d) EXPECT_EQ(h0_hom(c, c, d).dimension, 0);
}

TEST(Hom, ConeRejectsNonClosedMap) {
  const DbarSuperconnection u = unit(R1);
  SuperOperator f(R1, u.bundle());
  f.at(0, 0) = Form(Scalar::zbar(R1));
  EXPECT_THROW(cone(u, u, f), PreconditionError);
}

TEST(Complete, FlatConnectionNeedsNoBetas) {
  const GradedBundle e = bundle({{0, 2}});
  SuperOperator a(R2, e);
  a.at(0, 1) = Form::dzbar(R2, 1);
  auto out = complete_to_flat(e, SuperOperator(R2, e), a, 2);
  ASSERT_TRUE(std::holds_alternative<DbarSuperconnection>(out));
  EXPECT_TRUE(std::get<DbarSuperconnection>(out).betas_vanish());
}

TEST(Complete, RestoresDiscardedBetas) {
  // flat instances with nonzero beta_2 have their betas removed.
  Generator gen(43);
  int restored = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const DbarSuperconnection flat = random_gauged_koszul(gen, R2, 1);
    if (flat.betas_vanish()) continue;
    ++restored;
    auto out = complete_to_flat(flat.bundle(), flat.gamma(), flat.a(), 3);
    ASSERT_TRUE(std::holds_alternative<DbarSuperconnection>(out));
    const auto& done = std::get<DbarSuperconnection>(out);
    EXPECT_TRUE(is_flat(done));
    EXPECT_EQ(done.gamma(), flat.gamma());
    EXPECT_EQ(done.a(), flat.a());
  }
  EXPECT_GE(restored, 5);
}

TEST(Complete, CurvedConnectionWithZeroGammaIsObstructed) {
  const GradedBundle e = bundle({{0, 2}});
  SuperOperator a(R2, e);
  a.at(0, 1) = wedge(Form(Scalar::zbar(R2, 1)), Form::dzbar(R2, 2));
  auto out = complete_to_flat(e, SuperOperator(R2, e), a, 3);
  ASSERT_TRUE(std::holds_alternative<Obstruction>(out));
  const auto& ob = std::get<Obstruction>(out);
  EXPECT_EQ(ob.stage, 2);
  EXPECT_FALSE(ob.truncation);
  EXPECT_EQ(ob.residue, a.dolbeault(Dolbeault::Delbar) + compose(a, a));
}

TEST(Complete, PreconditionsAreChecked) {
  const GradedBundle e = bundle({{-1, 1}, {0, 1}});
  SuperOperator g(R1, e);
  g.at(1, 0) = Form(Scalar::zbar(R1));
  EXPECT_THROW(complete_to_flat(e, g, SuperOperator(R1, e), 2), PreconditionError);
}

// Property: D-bar^2 = 0 iff the residues vanish, with D-bar^2 expanded on a
// spanning set of sections, for flat and perturbed instances.
TEST(ConnectionProperty, BruteForceSquareMatchesResidues) {
  Generator gen(47);
  for (int trial = 0; trial < 24; ++trial) {
    const RingSpec ring = RingSpec::poly(1 + trial % 3);
    DbarSuperconnection m = random_gauged_koszul(gen, ring, 1);
    if (trial % 2) {
      const SuperOperator bump = gen.block(ring, m.bundle(), 0, 1, 0, 1);
      m = DbarSuperconnection(ring, m.bundle(), m.gamma(), m.a() + bump, m.betas());
    }
    bool linear = false;
    const SuperOperator sq = brute_square(m, &linear);
    EXPECT_TRUE(linear);
    EXPECT_EQ(sq, residue_sum(m));
    EXPECT_EQ(sq.is_zero(), is_flat(m));
  }
}
