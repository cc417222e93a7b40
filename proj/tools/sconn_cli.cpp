// Command-line driver: sconn <command> <instance.json> [flags]

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sconn/cli.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sconn::ParseError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sconn::ParseError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact verification of dbar-superconnections and their Chern forms"};
  app.require_subcommand(1);

  sconn::RunFlags flags;
  std::string instance_path, emit_path, t_text, family = "koszul";
  bool text = false, json = false;
  int n = 2;
  std::optional<int> max_k, bound;

  auto common = [&](CLI::App* sub, bool needs_instance) {
    if (needs_instance) sub->add_option("instance", instance_path, "instance file (JSON)")->required();
    sub->add_option("--max-k", max_k, "highest Chern degree");
    sub->add_option("--degree-bound", bound, "monomial degree bound for truncated solves");
    sub->add_option("--seed", flags.seed, "seed for random instances");
    sub->add_option("--emit-instance", emit_path, "write the resulting instance here");
    sub->add_flag("--text", text, "plain-text report");
    sub->add_flag("--json", json, "JSON report (default)");
    sub->add_flag("--timing", flags.timing, "include wall-clock seconds in the report");
  };

  for (const auto& name : sconn::cli_commands()) {
    if (name == "generate") continue;
    auto* sub = app.add_subcommand(name);
    common(sub, true);
    if (name == "rescale-check") {
      sub->add_option("--t", t_text, "rescaling parameter p/q");
      sub->add_option("--convention", flags.convention, "power_j (h_j -> t^j h_j) or power_minus_j");
    }
    if (name == "witness") sub->add_option("--kind", flags.kind, "d or ddbar");
  }
  auto* gen = app.add_subcommand("generate", "write a seeded random instance");
  common(gen, false);
  gen->add_option("--family", family, "koszul, gauged-koszul or p1-line");
  gen->add_option("--n", n, "number of variables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (text && json) {
    std::cerr << "--text and --json are exclusive\n";
    return 2;
  }
  flags.max_k = max_k;
  flags.degree_bound = bound;

  const std::string command = app.get_subcommands().front()->get_name();
  sconn::Report rep;
  if (command == "generate") {
    rep.command = command;
    rep.seed = flags.seed;
    try {
      rep.emitted = sconn::generate_instance(family, n, flags.seed);
      if (emit_path.empty()) {
        std::cout << sconn::serialize_instance(*rep.emitted);
        return 0;
      }
      rep.results["family"] = family;
    } catch (const sconn::Error& e) {
      sconn::cli_detail::fail_with(rep, e);
    }
  } else {
    try {
      if (!t_text.empty()) flags.t = sconn::parse_rational(t_text);
      rep = sconn::run_text(command, read_file(instance_path), flags);
    } catch (const sconn::Error& e) {
      rep.command = command;
      rep.seed = flags.seed;
      sconn::cli_detail::fail_with(rep, e);
    }
  }
  if (!emit_path.empty() && rep.emitted) {
    try {
      write_file(emit_path, sconn::serialize_instance(*rep.emitted));
    } catch (const sconn::Error& e) {
      sconn::cli_detail::fail_with(rep, e);
    }
  }
  std::cout << (text ? rep.to_text() : sconn::dump(rep.to_json()));
  return rep.exit_code;
}
