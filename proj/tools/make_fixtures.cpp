// Writes the fixture instances: make_fixtures <output-dir>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "sconn/sconn.hpp"

using namespace sconn;

namespace {

Instance base(RingSpec ring, std::string description) {
  Instance in;
  in.ring = ring;
  in.description = std::move(description);
  return in;
}

GradedBundle ranks(std::map<int, int> r) { return GradedBundle(std::move(r)); }

DbarSuperconnection koszul_sc(const RingSpec& ring) {
  std::vector<Scalar> f;
  for (int i = 1; i <= ring.n; ++i) f.push_back(Scalar::z(ring, i));
  auto [e, d] = koszul(ring, f);
  return from_complex(e, d);
}

Instance unit_poly1() {
  Instance in = base(RingSpec::poly(1), "unit bundle on Poly(1)");
  in.superconnection = DbarSuperconnection(in.ring, ranks({{0, 1}}));
  in.metric = HermitianMetric::identity(in.ring, in.superconnection->bundle());
  return in;
}

Instance koszul_poly2() {
  Instance in = base(RingSpec::poly(2), "Koszul complex of (z1, z2)");
  in.superconnection = koszul_sc(in.ring);
  Generator gen(11);
  in.metric = random_constant_metric(gen, in.ring, in.superconnection->bundle());
  in.deltah = random_self_adjoint(gen, *in.metric, 1);
  in.params.max_k = 2;
  return in;
}

Instance gauged(int n, std::uint64_t seed) {
  Instance in = base(RingSpec::poly(n), "Koszul complex of (z1, ..., z" + std::to_string(n) + ") under a strict gauge");
  Generator gen(seed);
  const DbarSuperconnection m = koszul_sc(in.ring);
  in.superconnection = gauge(m, gen.strict_gauge(in.ring, m.bundle(), 1, true));
  in.metric = HermitianMetric::identity(in.ring, m.bundle());
  return in;
}

Instance complete_koszul_poly2() {
  Instance in = gauged(2, 5);
  in.description = "gauged Koszul complex with its betas discarded";
  const DbarSuperconnection& m = *in.superconnection;
  in.superconnection = DbarSuperconnection(in.ring, m.bundle(), m.gamma(), m.a());
  in.metric.reset();
  in.params.degree_bound = 3;
  return in;
}

Instance complete_obstruction_poly2() {
  Instance in = base(RingSpec::poly(2), "gamma = 0 with a connection of nonzero curvature");
  const GradedBundle e = ranks({{0, 2}});
  SuperOperator a(in.ring, e);
  a.at(0, 1) = wedge(Form(Scalar::zbar(in.ring, 1)), Form::dzbar(in.ring, 2));
  in.superconnection = DbarSuperconnection(in.ring, e, SuperOperator(in.ring, e), a);
  in.params.degree_bound = 3;
  return in;
}

Instance two_term_poly1() {
  Instance in = base(RingSpec::poly(1), "two-term complex O --z--> O in degrees -1, 0");
  const GradedBundle e = ranks({{-1, 1}, {0, 1}});
  SuperOperator g(in.ring, e);
  g.at(1, 0) = Form(Scalar::z(in.ring, 1));
  in.superconnection = from_complex(e, g);
  SuperOperator h(in.ring, e);
  h.at(0, 0) = Form::constant(in.ring, 2);
  h.at(1, 1) = Form::constant(in.ring, 1);
  in.metric = HermitianMetric::constant(h);
  in.params.max_k = 1;
  return in;
}

Instance p1_line_fixture(int k) {
  auto [m, h] = p1_line(k);
  Instance in = base(m.ring(), "O(" + std::to_string(k) + ") on P1 with the Fubini-Study power metric");
  in.superconnection = m;
  in.metric = h;
  in.params.max_k = 1;
  return in;
}

Instance p1_split_fixture() {
  auto [m, h] = p1_split({{0, 3}, {1, 1}});
  Instance in = base(m.ring(), "O(3) -> O(1) with the zero map, degrees 0 and 1");
  in.superconnection = m;
  in.metric = h;
  in.params.max_k = 1;
  return in;
}

Instance p1_cone_id() {
  auto [o1, h1] = p1_line(1);
  const DbarSuperconnection c = cone(o1, o1, SuperOperator::identity(o1.ring(), o1.bundle()));
  Instance in = base(c.ring(), "cone of the identity of O(1) on P1");
  in.superconnection = c;
  in.metric = HermitianMetric::p1_diagonal(c.ring(), c.bundle(), {{Rational(1), 1}, {Rational(1), 1}});
  in.params.max_k = 1;
  return in;
}

Instance twist_gauge_poly2() {
  Instance in = base(RingSpec::poly(2), "Koszul complex with the twist e^{-phi} Dbar e^{phi} - Dbar");
  Generator gen(3);
  const DbarSuperconnection m = koszul_sc(in.ring);
  const DbarSuperconnection g = gauge(m, gen.strict_gauge(in.ring, m.bundle(), 1, false));
  in.superconnection = m;
  in.twist = g.matrix() - m.matrix();
  return in;
}

Instance twist_bad_poly2() {
  Instance in = base(RingSpec::poly(2), "twist violating the Maurer-Cartan equation");
  const GradedBundle e = ranks({{0, 1}});
  in.superconnection = DbarSuperconnection(in.ring, e);
  SuperOperator alpha(in.ring, e);
  alpha.at(0, 0) = wedge(Form(Scalar::zbar(in.ring, 1)), Form::dzbar(in.ring, 2));
  in.twist = alpha;
  return in;
}

Instance hom_unit_shift_poly1() {
  Instance in = base(RingSpec::poly(1), "Hom(unit, unit shifted to degree -1)");
  const DbarSuperconnection unit(in.ring, ranks({{0, 1}}));
  in.superconnection = unit;
  in.target = shift(unit, 1);
  in.params.degree_bound = 3;
  return in;
}

Instance hom_unit_poly2() {
  Instance in = base(RingSpec::poly(2), "Hom(unit, unit) on Poly(2)");
  const DbarSuperconnection unit(in.ring, ranks({{0, 1}}));
  in.superconnection = unit;
  in.target = unit;
  in.params.degree_bound = 2;
  return in;
}

Instance witness_poly2() {
  Instance in = base(RingSpec::poly(2), "Koszul complex with metrics h and g^dagger h g");
  Generator gen(21);
  in.superconnection = koszul_sc(in.ring);
  in.metric = random_constant_metric(gen, in.ring, in.superconnection->bundle());
  auto [g, g_inv] = random_unimodular(gen, in.ring, in.superconnection->bundle(), 1);
  in.metric_alt = in.metric->gauged(g, g_inv);
  in.params.max_k = 2;
  in.params.degree_bound = 4;
  in.params.kind = "ddbar";
  return in;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::function<Instance()>>> all{
      {"unit_poly1", unit_poly1},
      {"koszul_poly2", koszul_poly2},
      {"gauged_koszul_poly2", [] { return gauged(2, 7); }},
      {"gauged_koszul_poly3", [] { return gauged(3, 9); }},
      {"complete_koszul_poly2", complete_koszul_poly2},
      {"complete_obstruction_poly2", complete_obstruction_poly2},
      {"two_term_poly1", two_term_poly1},
      {"p1_O2", [] { return p1_line_fixture(2); }},
      {"p1_O_minus1", [] { return p1_line_fixture(-1); }},
      {"p1_split_3_1", p1_split_fixture},
      {"p1_cone_id", p1_cone_id},
      {"twist_gauge_poly2", twist_gauge_poly2},
      {"twist_bad_poly2", twist_bad_poly2},
      {"hom_unit_shift_poly1", hom_unit_shift_poly1},
      {"hom_unit_poly2", hom_unit_poly2},
      {"witness_poly2", witness_poly2},
  };
  try {
    for (const auto& [name, build] : all) {
      std::ofstream out(dir / (name + ".json"), std::ios::binary);
      out << serialize_instance(build());
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.exit_code();
  }
  return 0;
}
