#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "sconn/chern.hpp"
#include "sconn/connection.hpp"

namespace sconn {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace io {

inline void require_object(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ParseError(where + ": unknown field '" + key + "'");
}

inline const Json& field(const Json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline int get_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where + ": expected an integer");
  return j.get<int>();
}

inline Rational get_rational(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": rationals are written as strings \"p/q\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline std::vector<int> get_int_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_int(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// ---------------------------------------------------------------------------
// Rings and bundles

inline Json ring_to_json(const RingSpec& r) {
  Json j;
  j["kind"] = r.is_p1() ? "p1" : "poly";
  j["n"] = r.n;
  j["dual"] = r.dual;
  return j;
}

inline RingSpec ring_from_json(const Json& j, const std::string& where) {
  require_object(j, where, {"kind", "n", "dual"});
  const Json& kind = field(j, where, "kind");
  if (!kind.is_string()) throw ParseError(where + ".kind: expected \"poly\" or \"p1\"");
  bool dual = false;
  if (j.contains("dual")) {
    if (!j["dual"].is_boolean()) throw ParseError(where + ".dual: expected a boolean");
    dual = j["dual"].get<bool>();
  }
  if (kind == "p1") {
    if (j.contains("n") && get_int(j["n"], where + ".n") != 1) throw ParseError(where + ".n: the P1 ring has n = 1");
    return RingSpec::p1(dual);
  }
  if (kind != "poly") throw ParseError(where + ".kind: expected \"poly\" or \"p1\"");
  const int n = get_int(field(j, where, "n"), where + ".n");
  if (n < 1 || n > kMaxVars) throw ParseError(where + ".n: must be in 1.." + std::to_string(kMaxVars));
  return RingSpec::poly(n, dual);
}

inline Json ranks_to_json(const GradedBundle& e) {
  Json arr = Json::array();
  for (const auto& [deg, r] : e.ranks()) arr.push_back(Json{{"degree", deg}, {"rank", r}});
  return arr;
}

inline GradedBundle ranks_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of {degree, rank}");
  std::map<int, int> ranks;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    require_object(j[i], w, {"degree", "rank"});
    const int deg = get_int(field(j[i], w, "degree"), w + ".degree");
    const int r = get_int(field(j[i], w, "rank"), w + ".rank");
    if (r < 0) throw ParseError(w + ".rank: must be nonnegative");
    if (ranks.count(deg)) throw ParseError(w + ": degree listed twice");
    ranks[deg] = r;
  }
  return GradedBundle(ranks);
}

// ---------------------------------------------------------------------------
// Terms, forms, operators

inline Json term_to_json(const RingSpec& ring, FormKey fk, const Monomial& m, const GaussianRational& c) {
  Json t;
  Json a = Json::array(), b = Json::array(), dz = Json::array(), dzbar = Json::array();
  for (int i = 0; i < ring.n; ++i) {
    a.push_back(m.a[static_cast<std::size_t>(i)]);
    b.push_back(m.b[static_cast<std::size_t>(i)]);
    if (fk.dz >> i & 1) dz.push_back(i + 1);
    if (fk.dzbar >> i & 1) dzbar.push_back(i + 1);
  }
  t["a"] = a;
  t["b"] = b;
  t["denom_pow"] = m.m;
  t["re"] = format_rational(c.re());
  t["im"] = format_rational(c.im());
  t["dz"] = dz;
  t["dzbar"] = dzbar;
  t["eps"] = m.eps;
  return t;
}

inline Json form_to_json(const Form& f) {
  Json arr = Json::array();
  for (const auto& [fk, c] : f.terms())
    for (const auto& [m, x] : c.terms()) arr.push_back(term_to_json(f.ring(), fk, m, x));
  return arr;
}

inline std::uint8_t index_mask(const Json& j, const RingSpec& ring, const std::string& where) {
  unsigned mask = 0;
  int prev = 0;
  for (int i : get_int_list(j, where)) {
    if (i < 1 || i > ring.n) throw ParseError(where + ": index " + std::to_string(i) + " out of range");
    if (i <= prev) throw ParseError(where + ": indices must be strictly increasing");
    prev = i;
    mask |= 1u << (i - 1);
  }
  return static_cast<std::uint8_t>(mask);
}

inline Form form_from_json(const Json& j, const RingSpec& ring, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of terms");
  Form f(ring);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const Json& t = j[i];
    require_object(t, w, {"a", "b", "denom_pow", "re", "im", "dz", "dzbar", "eps"});
    Monomial m;
    const auto a = get_int_list(field(t, w, "a"), w + ".a");
    const auto b = get_int_list(field(t, w, "b"), w + ".b");
    if (static_cast<int>(a.size()) != ring.n || static_cast<int>(b.size()) != ring.n)
      throw ParseError(w + ": exponent lists need exactly n = " + std::to_string(ring.n) + " entries");
    for (int v = 0; v < ring.n; ++v) {
      if (a[static_cast<std::size_t>(v)] < 0 || b[static_cast<std::size_t>(v)] < 0 || a[static_cast<std::size_t>(v)] > 60000 || b[static_cast<std::size_t>(v)] > 60000)
        throw ParseError(w + ": exponent out of range");
      m.a[static_cast<std::size_t>(v)] = static_cast<std::uint16_t>(a[static_cast<std::size_t>(v)]);
      m.b[static_cast<std::size_t>(v)] = static_cast<std::uint16_t>(b[static_cast<std::size_t>(v)]);
    }
    if (t.contains("denom_pow")) m.m = get_int(t["denom_pow"], w + ".denom_pow");
    if (t.contains("eps")) {
      if (!t["eps"].is_boolean()) throw ParseError(w + ".eps: expected a boolean");
      m.eps = t["eps"].get<bool>();
    }
    const Rational re = get_rational(field(t, w, "re"), w + ".re");
    const Rational im = t.contains("im") ? get_rational(t["im"], w + ".im") : Rational(0);
    const FormKey fk{t.contains("dz") ? index_mask(t["dz"], ring, w + ".dz") : std::uint8_t{0},
                     t.contains("dzbar") ? index_mask(t["dzbar"], ring, w + ".dzbar") : std::uint8_t{0}};
    try {
      Scalar s(ring);
      s.add_term(m, GaussianRational(re, im));
      f.add(fk, s);
    } catch (const Error& e) {
      throw ParseError(w + ": " + e.what());
    }
  }
  return f;
}

inline Json operator_to_json(const SuperOperator& t) {
  Json arr = Json::array();
  for (int i = 0; i < t.rows(); ++i)
    for (int k = 0; k < t.cols(); ++k) {
      const Form& f = t.at(i, k);
      if (f.is_zero()) continue;
      Json e;
      e["source_degree"] = t.src().degree_of(k);
      e["target_degree"] = t.dst().degree_of(i);
      e["row"] = t.dst().local_index(i);
      e["col"] = t.src().local_index(k);
      e["terms"] = form_to_json(f);
      arr.push_back(std::move(e));
    }
  return arr;
}

inline SuperOperator operator_from_json(const Json& j, const RingSpec& ring, const GradedBundle& src, const GradedBundle& dst,
                                        const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of entries");
  SuperOperator t(ring, src, dst);
  for (std::size_t n = 0; n < j.size(); ++n) {
    const std::string w = where + "[" + std::to_string(n) + "]";
    require_object(j[n], w, {"source_degree", "target_degree", "row", "col", "terms"});
    const int sd = get_int(field(j[n], w, "source_degree"), w + ".source_degree");
    const int td = j[n].contains("target_degree") ? get_int(j[n]["target_degree"], w + ".target_degree") : sd;
    const int row = get_int(field(j[n], w, "row"), w + ".row");
    const int col = get_int(field(j[n], w, "col"), w + ".col");
    if (row < 0 || row >= dst.rank(td) || col < 0 || col >= src.rank(sd)) throw ParseError(w + ": entry index outside the bundle");
    t.at(dst.index(td, row), src.index(sd, col)) += form_from_json(field(j[n], w, "terms"), ring, w + ".terms");
  }
  return t;
}

// ---------------------------------------------------------------------------
// Superconnections and metrics

inline Json superconnection_to_json(const DbarSuperconnection& m) {
  Json j;
  j["ranks"] = ranks_to_json(m.bundle());
  j["gamma"] = operator_to_json(m.gamma());
  j["A"] = operator_to_json(m.a());
  Json betas = Json::array();
  for (const auto& b : m.betas()) betas.push_back(operator_to_json(b));
  j["betas"] = betas;
  return j;
}

inline DbarSuperconnection superconnection_from_json(const Json& j, const RingSpec& ring, const std::string& where) {
  require_object(j, where, {"ranks", "gamma", "A", "betas"});
  const GradedBundle e = ranks_from_json(field(j, where, "ranks"), where + ".ranks");
  SuperOperator gamma(ring, e), a(ring, e);
  if (j.contains("gamma")) gamma = operator_from_json(j["gamma"], ring, e, e, where + ".gamma");
  if (j.contains("A")) a = operator_from_json(j["A"], ring, e, e, where + ".A");
  std::vector<SuperOperator> betas;
  if (j.contains("betas")) {
    if (!j["betas"].is_array()) throw ParseError(where + ".betas: expected a list of operators (beta_2, beta_3, ...)");
    for (std::size_t i = 0; i < j["betas"].size(); ++i)
      betas.push_back(operator_from_json(j["betas"][i], ring, e, e, where + ".betas[" + std::to_string(i) + "]"));
  }
  try {
    DbarSuperconnection m(ring, e, gamma, a, betas);
    m.trim();
    return m;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& err) {
    throw ParseError(where + ": " + err.what());
  }
}

inline Json metric_to_json(const HermitianMetric& h) {
  Json j;
  j["h"] = operator_to_json(h.h());
  j["h_inverse"] = operator_to_json(h.h_inverse());
  return j;
}

namespace detail_io {

// Inverse of a diagonal P1 metric with single-term entries c (1+z zbar)^(-m).
inline std::optional<SuperOperator> p1_diagonal_inverse(const SuperOperator& h) {
  SuperOperator inv(h.ring(), h.src());
  for (int i = 0; i < h.rows(); ++i)
    for (int k = 0; k < h.cols(); ++k) {
      const Scalar s = h.at(i, k).scalar_part();
      if (i != k) {
        if (!h.at(i, k).is_zero()) return std::nullopt;
        continue;
      }
      if (s.size() != 1) return std::nullopt;
      const auto& [m, c] = *s.terms().begin();
      if (m.a[0] || m.b[0] || m.eps) return std::nullopt;
      inv.at(i, i) = Form(Scalar::p1_weight(h.ring(), -m.m) * c.inverse());
    }
  return inv;
}

}  // namespace detail_io

/// Metric blocks; `h_inverse` may be omitted for constant metrics and for
/// diagonal P1 metrics, where the inverse is computed.
inline HermitianMetric metric_from_json(const Json& j, const RingSpec& ring, const GradedBundle& e, const std::string& where) {
  require_object(j, where, {"h", "h_inverse"});
  const SuperOperator h = operator_from_json(field(j, where, "h"), ring, e, e, where + ".h");
  try {
    if (j.contains("h_inverse")) return HermitianMetric(h, operator_from_json(j["h_inverse"], ring, e, e, where + ".h_inverse"));
    if (ring.is_p1())
      if (auto inv = detail_io::p1_diagonal_inverse(h)) return HermitianMetric(h, *inv);
    return HermitianMetric::constant(h);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& err) {
    throw ParseError(where + ": " + err.what());
  }
}

}  // namespace io

// ---------------------------------------------------------------------------
// Instance files

struct InstanceParams {
  std::optional<int> max_k;
  std::optional<int> degree_bound;
  std::optional<Rational> t;
  std::optional<std::string> kind;
  std::optional<std::string> convention;
};

/// Parsed instance file. Optional parts are used by the commands that need
/// them: `target` (hom-h0), `metric`/`metric_alt`/`deltah` (chern family),
/// `twist` (twist), `form` (witness).
struct Instance {
  RingSpec ring;
  std::string description;
  std::optional<DbarSuperconnection> superconnection;
  std::optional<DbarSuperconnection> target;
  std::optional<HermitianMetric> metric;
  std::optional<HermitianMetric> metric_alt;
  std::optional<SuperOperator> deltah;
  std::optional<SuperOperator> twist;
  std::optional<Form> form;
  InstanceParams params;
};

inline Json instance_to_json(const Instance& in) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  if (!in.description.empty()) j["description"] = in.description;
  j["ring"] = io::ring_to_json(in.ring);
  if (in.superconnection) j["superconnection"] = io::superconnection_to_json(*in.superconnection);
  if (in.target) j["target"] = io::superconnection_to_json(*in.target);
  if (in.metric) j["metric"] = io::metric_to_json(*in.metric);
  if (in.metric_alt) j["metric_alt"] = io::metric_to_json(*in.metric_alt);
  if (in.deltah) j["deltah"] = io::operator_to_json(*in.deltah);
  if (in.twist) j["twist"] = io::operator_to_json(*in.twist);
  if (in.form) j["form"] = io::form_to_json(*in.form);
  Json p = Json::object();
  if (in.params.max_k) p["max_k"] = *in.params.max_k;
  if (in.params.degree_bound) p["degree_bound"] = *in.params.degree_bound;
  if (in.params.t) p["t"] = format_rational(*in.params.t);
  if (in.params.kind) p["kind"] = *in.params.kind;
  if (in.params.convention) p["convention"] = *in.params.convention;
  if (!p.empty()) j["params"] = p;
  return j;
}

inline Instance instance_from_json(const Json& j) {
  io::require_object(j, "instance",
                     {"schema_version", "description", "ring", "superconnection", "target", "metric", "metric_alt", "deltah", "twist", "form", "params"});
  const int version = io::get_int(io::field(j, "instance", "schema_version"), "schema_version");
  if (version != kSchemaVersion) throw ParseError("schema_version " + std::to_string(version) + " is not supported");
  Instance in;
  in.ring = io::ring_from_json(io::field(j, "instance", "ring"), "ring");
  if (j.contains("description")) {
    if (!j["description"].is_string()) throw ParseError("description: expected a string");
    in.description = j["description"].get<std::string>();
  }
  if (j.contains("superconnection")) in.superconnection = io::superconnection_from_json(j["superconnection"], in.ring, "superconnection");
  if (j.contains("target")) in.target = io::superconnection_from_json(j["target"], in.ring, "target");
  auto bundle = [&](const char* what) -> const GradedBundle& {
    if (!in.superconnection) throw ParseError(std::string(what) + " requires a superconnection");
    return in.superconnection->bundle();
  };
  if (j.contains("metric")) in.metric = io::metric_from_json(j["metric"], in.ring, bundle("metric"), "metric");
  if (j.contains("metric_alt")) in.metric_alt = io::metric_from_json(j["metric_alt"], in.ring, bundle("metric_alt"), "metric_alt");
  if (j.contains("deltah")) in.deltah = io::operator_from_json(j["deltah"], in.ring, bundle("deltah"), bundle("deltah"), "deltah");
  if (j.contains("twist")) in.twist = io::operator_from_json(j["twist"], in.ring, bundle("twist"), bundle("twist"), "twist");
  if (j.contains("form")) in.form = io::form_from_json(j["form"], in.ring, "form");
  if (j.contains("params")) {
    const Json& p = j["params"];
    io::require_object(p, "params", {"max_k", "degree_bound", "t", "kind", "convention"});
    if (p.contains("max_k")) in.params.max_k = io::get_int(p["max_k"], "params.max_k");
    if (p.contains("degree_bound")) in.params.degree_bound = io::get_int(p["degree_bound"], "params.degree_bound");
    if (p.contains("t")) in.params.t = io::get_rational(p["t"], "params.t");
    for (const char* key : {"kind", "convention"})
      if (p.contains(key)) {
        if (!p[key].is_string()) throw ParseError(std::string("params.") + key + ": expected a string");
        (std::string(key) == "kind" ? in.params.kind : in.params.convention) = p[key].get<std::string>();
      }
  }
  return in;
}

/// Canonical text: two-space indented JSON with a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Instance parse_instance(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return instance_from_json(j);
}

inline std::string serialize_instance(const Instance& in) { return dump(instance_to_json(in)); }

}  // namespace sconn
