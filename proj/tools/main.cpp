#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "runner.hpp"

namespace fs = std::filesystem;
using namespace subeq::app;

int main(int argc, char** argv) {
  CLI::App cli{"Subequation solvers, Khas'minskii potentials and maximum-principle checks on model manifolds"};
  cli.require_subcommand(1);
  cli.fallthrough();  // global flags may follow the subcommand
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool no_plots = false;
  cli.add_option("--out", out, "output directory");
  cli.add_option("--tol", tol, "membership / certificate tolerance")->check(CLI::PositiveNumber);
  cli.add_option("--seed", seed, "random seed (default: the scenario's, else 0)");
  cli.add_option("--threads", threads, "solver threads")->check(CLI::Range(1, 256));
  cli.add_flag("--no-plots", no_plots, "skip SVG output");

  std::string file;
  auto* run = cli.add_subcommand("run", "run one scenario file");
  run->add_option("file", file, "scenario JSON (docs/scenario.schema.json)")->required();

  bool inject = false;
  auto* audit = cli.add_subcommand("audit", "run every built-in audit suite");
  audit->add_flag("--inject-dual-sign-bug", inject, "mutation check: add a catalog member whose dual drops a sign");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  if (*run) {
    RunOptions opt;
    if (out) opt.out = fs::path(*out);
    opt.tol = tol;
    opt.seed = seed;
    opt.threads = threads;
    opt.plots = !no_plots;
    const Outcome o = run_file(file, opt);
    std::cout << "status " << (o.report.contains("status") ? o.report["status"].get<std::string>() : "input_error")
              << ", exit " << o.exit_code << "\n";
    return o.exit_code;
  }

  AuditOptions opt;
  opt.tol = tol;
  opt.seed = seed.value_or(0);
  opt.threads = threads;
  opt.inject_dual_sign_bug = inject;
  nlohmann::json rep = audit_report(opt, true);
  const int code = print_audit(rep, std::cout);
  if (out) {
    fs::create_directories(*out);
    nlohmann::json timing = nlohmann::json::object();
    for (auto& s : rep["suites"])
      if (s.contains("wall_time_s")) {
        timing[s["suite"].get<std::string>()] = s["wall_time_s"];
        s.erase("wall_time_s");
      }
    rep["timestamp"] = utc_timestamp();
    std::ofstream(fs::path(*out) / "audit_report.json") << rep.dump(2) << "\n";
    std::ofstream(fs::path(*out) / "timing.json") << nlohmann::json{{"suites", timing}}.dump(2) << "\n";
  }
  return code;
}
