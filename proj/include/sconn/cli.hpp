#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sconn/chern.hpp"
#include "sconn/connection.hpp"
#include "sconn/normalform.hpp"
#include "sconn/random.hpp"
#include "sconn/serialize.hpp"

namespace sconn {

struct RunFlags {
  std::optional<int> max_k;
  std::optional<int> degree_bound;
  std::uint64_t seed = 0;
  std::optional<Rational> t;
  std::optional<std::string> kind;
  std::optional<std::string> convention;
  bool timing = false;
};

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  Json results = Json::object();
  std::string status = "pass";
  int exit_code = 0;
  std::optional<Json> error;
  std::optional<double> seconds;
  /// Instance produced by the command (normal form, completion, twist,
  /// generated instance), written by --emit-instance.
  std::optional<Instance> emitted;

  void finish_checks() {
    if (error) return;
    if (!all_pass(checks)) {
      status = "fail";
      exit_code = 1;
    }
  }

  Json to_json() const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["seed"] = seed;
    j["status"] = status;
    j["exit_code"] = exit_code;
    Json cs = Json::array();
    for (const auto& c : checks) {
      Json x;
      x["name"] = c.name;
      x["pass"] = c.pass;
      if (!c.detail.empty()) x["detail"] = c.detail;
      cs.push_back(std::move(x));
    }
    j["checks"] = cs;
    j["results"] = results;
    if (error) j["error"] = *error;
    if (seconds) j["seconds"] = *seconds;
    return j;
  }

  std::string to_text() const {
    std::ostringstream out;
    out << "command: " << command << "\n";
    out << "seed: " << seed << "\n";
    out << "status: " << status << " (exit " << exit_code << ")\n";
    for (const auto& c : checks) out << (c.pass ? "  pass  " : "  FAIL  ") << c.name << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
    for (const auto& [key, value] : results.items()) out << key << ": " << value.dump() << "\n";
    if (error) out << "error: " << (*error)["type"].get<std::string>() << ": " << (*error)["message"].get<std::string>() << "\n";
    if (seconds) out << "seconds: " << *seconds << "\n";
    return out.str();
  }
};

inline const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> names{"check",           "normalize",        "complete", "chern",  "chern-number", "rescale-check",
                                              "variation-check", "twist",            "hom-h0",   "witness", "generate"};
  return names;
}

namespace cli_detail {

inline const DbarSuperconnection& need_sc(const Instance& in) {
  if (!in.superconnection) throw ParseError("instance has no superconnection");
  return *in.superconnection;
}

inline const HermitianMetric& need_metric(const Instance& in) {
  if (!in.metric) throw ParseError("instance has no metric");
  return *in.metric;
}

inline void add_checks(Report& rep, const std::vector<Check>& cs) { rep.checks.insert(rep.checks.end(), cs.begin(), cs.end()); }

inline Json residue_summary(const SuperOperator& r) {
  int nonzero = 0, terms = 0;
  for (int i = 0; i < r.rows(); ++i)
    for (int k = 0; k < r.cols(); ++k)
      if (!r.at(i, k).is_zero()) {
        ++nonzero;
        for (const auto& [fk, c] : r.at(i, k).terms()) terms += static_cast<int>(c.size());
      }
  return Json{{"nonzero_entries", nonzero}, {"terms", terms}};
}

inline void cmd_check(Report& rep, const Instance& in) {
  const DbarSuperconnection& m = need_sc(in);
  const auto res = flatness_residues(m);
  Json summaries = Json::array();
  SuperOperator ladder(m.ring(), m.bundle());
  for (std::size_t q = 0; q < res.size(); ++q) {
    rep.checks.push_back({"residue_" + std::to_string(q) + "_zero", res[q].is_zero(), {}});
    summaries.push_back(residue_summary(res[q]));
    ladder += res[q];
  }
  bool linear = false;
  const SuperOperator sq = brute_force_square(m, detail::spanning_samples(m.ring()), &linear);
  rep.checks.push_back({"brute_force_square_matches_residues", sq == ladder, {}});
  rep.checks.push_back({"square_is_A_linear", linear, {}});
  rep.results["ring"] = m.ring().str();
  rep.results["bundle"] = m.bundle().str();
  rep.results["flat"] = is_flat(m);
  rep.results["residues"] = summaries;
}

inline Instance emit(const Instance& in, const DbarSuperconnection& m, const std::string& description) {
  Instance out;
  out.ring = in.ring;
  out.description = description;
  out.superconnection = m;
  return out;
}

inline void cmd_normalize(Report& rep, const Instance& in) {
  const DbarSuperconnection& m = need_sc(in);
  const NormalizationCertificate cert = normalize(m);
  rep.checks.push_back({"betas_vanish", cert.normal.betas_vanish(), {}});
  rep.checks.push_back({"certificate_reproduces_normal_form", gauge(m, cert.phi_total) == cert.normal, {}});
  rep.checks.push_back({"normal_form_flat", is_flat(cert.normal), {}});
  Json phis = Json::array();
  for (const auto& p : cert.phi_total.phis()) phis.push_back(io::operator_to_json(p));
  rep.results["phi"] = phis;
  rep.results["normal_form"] = io::superconnection_to_json(cert.normal);
  rep.emitted = emit(in, cert.normal, "normal form");
}

inline void cmd_complete(Report& rep, const Instance& in, int bound) {
  const DbarSuperconnection& m = need_sc(in);
  rep.results["degree_bound"] = bound;
  rep.results["input_betas_ignored"] = !m.betas_vanish();
  auto out = complete_to_flat(m.bundle(), m.gamma(), m.a(), bound);
  if (auto* done = std::get_if<DbarSuperconnection>(&out)) {
    rep.checks.push_back({"ladder_solvable", true, {}});
    rep.checks.push_back({"completion_flat", is_flat(*done), {}});
    rep.results["superconnection"] = io::superconnection_to_json(*done);
    rep.emitted = emit(in, *done, "flat completion");
    return;
  }
  const Obstruction& ob = std::get<Obstruction>(out);
  rep.checks.push_back({"ladder_solvable", false, ob.message});
  rep.results["obstruction"] =
      Json{{"stage", ob.stage}, {"truncation", ob.truncation}, {"message", ob.message}, {"residue", io::operator_to_json(ob.residue)}};
  if (ob.truncation) {
    rep.status = "truncation_overflow";
    rep.exit_code = 3;
    rep.error = Json{{"type", "TruncationOverflow"}, {"message", ob.message}};
  }
}

inline Json forms_json(const std::vector<Form>& forms) {
  Json arr = Json::array();
  for (const auto& f : forms) arr.push_back(io::form_to_json(f));
  return arr;
}

inline void cmd_chern(Report& rep, const Instance& in, int max_k) {
  const DbarSuperconnection& m = need_sc(in);
  const ChernData data = chern(m, need_metric(in), max_k);
  add_checks(rep, data.checks);
  rep.results["max_k"] = max_k;
  rep.results["B"] = io::operator_to_json(data.B);
  rep.results["omega"] = forms_json(data.omegas);
  std::vector<Form> top;
  for (int k = 0; k <= max_k; ++k) top.push_back(top_component(data.omegas[static_cast<std::size_t>(k)], k, m.ring().n));
  rep.results["omega_top"] = forms_json(top);
  rep.results["literal_conjugate_equation"] = data.literal_conjugate_equation;
}

inline void cmd_chern_number(Report& rep, const Instance& in, int max_k) {
  const DbarSuperconnection& m = need_sc(in);
  const HermitianMetric& h = need_metric(in);
  Json ch = Json::object();
  for (int k = 0; k <= max_k; ++k) ch[std::to_string(k)] = format_rational(chern_number(m, h, k));
  rep.results["ch"] = ch;
}

inline RescaleConvention parse_convention(const std::string& s) {
  if (s == "power_j") return RescaleConvention::PowerJ;
  if (s == "power_minus_j") return RescaleConvention::PowerMinusJ;
  throw ParseError("convention must be power_j or power_minus_j, got '" + s + "'");
}

inline void cmd_rescale(Report& rep, const Instance& in, int max_k, const Rational& t, const std::string& conv) {
  const LawReport law = rescale_and_check(need_sc(in), need_metric(in), max_k, t, parse_convention(conv));
  add_checks(rep, law.checks);
  rep.results["t"] = format_rational(t);
  rep.results["convention"] = conv;
}

inline void cmd_variation(Report& rep, const Instance& in, int max_k) {
  if (!in.deltah) throw ParseError("variation-check needs a deltah block");
  const LawReport law = variation_check(need_sc(in), need_metric(in), *in.deltah, max_k);
  add_checks(rep, law.checks);
}

inline void cmd_twist(Report& rep, const Instance& in) {
  const DbarSuperconnection& m = need_sc(in);
  if (!in.twist) throw ParseError("twist needs a twist block");
  const DbarSuperconnection out = twist(m, TwistCochain{*in.twist});
  rep.checks.push_back({"maurer_cartan", true, {}});
  rep.checks.push_back({"twisted_flat", is_flat(out), {}});
  rep.results["superconnection"] = io::superconnection_to_json(out);
  rep.emitted = emit(in, out, "twisted superconnection");
}

inline void cmd_hom_h0(Report& rep, const Instance& in, int bound) {
  if (!in.target) throw ParseError("hom-h0 needs a target superconnection");
  const H0Result r = h0_hom(need_sc(in), *in.target, bound);
  rep.checks.push_back({"truncation_stable", true, {}});
  rep.results["degree_bound"] = bound;
  rep.results["dimension"] = r.dimension;
  rep.results["kernel_dimension"] = r.kernel_dimension;
  Json basis = Json::array();
  for (const auto& b : r.basis) basis.push_back(io::operator_to_json(b));
  rep.results["basis"] = basis;
}

inline WitnessKind parse_kind(const std::string& s) {
  if (s == "d") return WitnessKind::D;
  if (s == "ddbar") return WitnessKind::DDbar;
  throw ParseError("kind must be d or ddbar, got '" + s + "'");
}

inline void cmd_witness(Report& rep, const Instance& in, int max_k, int bound, const std::string& kind) {
  Form w(in.ring);
  if (in.form) {
    w = *in.form;
  } else {
    if (!in.metric_alt) throw ParseError("witness needs a form, or metric and metric_alt");
    const DbarSuperconnection& m = need_sc(in);
    w = chern(m, need_metric(in), max_k).omegas.back() - chern(m, *in.metric_alt, max_k).omegas.back();
    rep.results["k"] = max_k;
  }
  const WitnessResult r = exactness_witness(w, parse_kind(kind), bound);
  rep.results["kind"] = kind;
  rep.results["degree_bound"] = bound;
  rep.results["unknowns"] = r.unknowns;
  rep.results["form"] = io::form_to_json(w);
  switch (r.status) {
    case WitnessStatus::Found:
      rep.checks.push_back({"witness_found", true, {}});
      rep.results["eta"] = io::form_to_json(r.eta);
      break;
    case WitnessStatus::NotExact:
      rep.checks.push_back({"witness_found", false, "the form is not exact"});
      break;
    case WitnessStatus::TruncationOverflow:
      rep.checks.push_back({"witness_found", false, "solvable only above degree " + std::to_string(bound)});
      rep.status = "truncation_overflow";
      rep.exit_code = 3;
      rep.error = Json{{"type", "TruncationOverflow"}, {"message", "witness needs a larger --degree-bound"}};
      break;
  }
}

inline std::string error_type(const Error& e) {
  if (dynamic_cast<const MaurerCartanViolation*>(&e)) return "MaurerCartanViolation";
  if (dynamic_cast<const TruncationOverflow*>(&e)) return "TruncationOverflow";
  if (dynamic_cast<const VerificationFailure*>(&e)) return "VerificationFailure";
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const RingMismatch*>(&e)) return "RingMismatch";
  if (dynamic_cast<const ShapeMismatch*>(&e)) return "ShapeMismatch";
  if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
  return "Error";
}

inline void fail_with(Report& rep, const Error& e) {
  rep.exit_code = e.exit_code();
  rep.status = rep.exit_code == 1 ? "fail" : rep.exit_code == 3 ? "truncation_overflow" : "error";
  rep.error = Json{{"type", error_type(e)}, {"message", e.what()}};
  if (const auto* mc = dynamic_cast<const MaurerCartanViolation*>(&e)) rep.error->emplace("residue", io::operator_to_json(mc->residue()));
}

}  // namespace cli_detail

/// Seeded random instances for the property suites and for `generate`.
/// Families: koszul, gauged-koszul (with a constant metric and a deltah),
/// p1-line (O(k), k = seed mod 7 - 3).
inline Instance generate_instance(const std::string& family, int n, std::uint64_t seed) {
  Generator gen(seed);
  Instance in;
  if (family == "p1-line") {
    const int k = static_cast<int>(seed % 7) - 3;
    auto [m, h] = p1_line(k);
    in.ring = m.ring();
    in.description = "O(" + std::to_string(k) + ") on P1";
    in.superconnection = m;
    in.metric = h;
    in.params.max_k = 1;
    return in;
  }
  if (n < 1 || n > 3) throw PreconditionError("generate supports 1 <= n <= 3");
  in.ring = RingSpec::poly(n);
  if (family == "koszul") {
    in.superconnection = random_koszul(gen, in.ring, 2);
    in.description = "Koszul complex, seed " + std::to_string(seed);
  } else if (family == "gauged-koszul") {
    in.superconnection = random_gauged_koszul(gen, in.ring, 1);
    in.description = "gauged Koszul superconnection, seed " + std::to_string(seed);
  } else {
    throw ParseError("unknown family '" + family + "' (koszul, gauged-koszul, p1-line)");
  }
  in.metric = random_constant_metric(gen, in.ring, in.superconnection->bundle());
  in.deltah = random_self_adjoint(gen, *in.metric, 1);
  in.params.max_k = 2;
  return in;
}

/// Dispatches one command. Module errors become a report with the mapped exit
/// code and a machine-readable reason; nothing escapes except std::bad_alloc
/// and the like.
inline Report run(const std::string& command, const Instance& in, const RunFlags& flags) {
  Report rep;
  rep.command = command;
  rep.seed = flags.seed;
  const auto start = std::chrono::steady_clock::now();
  const int max_k = flags.max_k.value_or(in.params.max_k.value_or(command == "chern-number" || command == "witness" ? 1 : 2));
  const int bound = flags.degree_bound.value_or(in.params.degree_bound.value_or(command == "hom-h0" ? 2 : 4));
  const Rational t = flags.t.value_or(in.params.t.value_or(Rational(2)));
  const std::string kind = flags.kind.value_or(in.params.kind.value_or("ddbar"));
  const std::string conv = flags.convention.value_or(in.params.convention.value_or("power_j"));
  try {
    if (max_k < 0) throw ParseError("--max-k must be nonnegative");
    if (bound < 0) throw ParseError("--degree-bound must be nonnegative");
    if (command == "check")
      cli_detail::cmd_check(rep, in);
    else if (command == "normalize")
      cli_detail::cmd_normalize(rep, in);
    else if (command == "complete")
      cli_detail::cmd_complete(rep, in, bound);
    else if (command == "chern")
      cli_detail::cmd_chern(rep, in, max_k);
    else if (command == "chern-number")
      cli_detail::cmd_chern_number(rep, in, max_k);
    else if (command == "rescale-check")
      cli_detail::cmd_rescale(rep, in, max_k, t, conv);
    else if (command == "variation-check")
      cli_detail::cmd_variation(rep, in, max_k);
    else if (command == "twist")
      cli_detail::cmd_twist(rep, in);
    else if (command == "hom-h0")
      cli_detail::cmd_hom_h0(rep, in, bound);
    else if (command == "witness")
      cli_detail::cmd_witness(rep, in, max_k, bound, kind);
    else
      throw ParseError("unknown command '" + command + "'");
    rep.finish_checks();
  } catch (const Error& e) {
    cli_detail::fail_with(rep, e);
  }
  if (flags.timing) rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

/// Parses the instance text first; parse errors produce an error report.
inline Report run_text(const std::string& command, const std::string& text, const RunFlags& flags) {
  try {
    return run(command, parse_instance(text), flags);
  } catch (const Error& e) {
    Report rep;
    rep.command = command;
    rep.seed = flags.seed;
    cli_detail::fail_with(rep, e);
    return rep;
  }
}

}  // namespace sconn
