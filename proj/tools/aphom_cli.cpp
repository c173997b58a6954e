// aphom: command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 property failure (including a non-decreasing convergence study).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "aphom/aphom.hpp"

namespace {

using namespace aphom;

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;
constexpr int kPropertyFailure = 4;

// Used by `props` when no configuration is given.
const char* kDefaultConfig = R"(name: default
dimension: 2
geometry: {shape: disk, radius: 0.25}
coefficients: {A0: 10, B0: 1, rho1: 2, rho2: 1}
)";

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

SimConfig load(const Common& o, bool allow_default) {
  SimConfig c = o.config.empty() && allow_default ? parse_config(kDefaultConfig) : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads", "must be at least 1");
    c.threads = *o.threads;
  }
  if (!o.out.empty()) c.output = o.out;
  return c;
}

void print_convergence(const ConvergenceRecord& r) {
  std::printf("%-10s %-14s %-14s %-14s\n", "epsilon", "error", "relative", "floor");
  for (const auto& e : r.entries)
    std::printf("%-10g %-14.6e %-14.6e %-14.6e\n", e.epsilon, e.error, e.reference > 0 ? e.error / e.reference : 0.0,
                e.floor);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogenization of viscoelastic fluid-solid composites"};
  app.require_subcommand(1);
  Common opt;
  bool inject_non_spd = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opt.config, "YAML configuration file");
    if (config_required) c->required();
    sub->add_option("--out", opt.out, "output directory (overrides the configuration)");
    sub->add_option("--seed", opt.seed, "seed for randomized properties");
    sub->add_option("--threads", opt.threads, "worker threads");
  };
  auto* cell = app.add_subcommand("cell", "solve the cell problems and report the correctors");
  auto* effective = app.add_subcommand("effective", "compute the effective coefficients");
  auto* macro = app.add_subcommand("macro", "solve the homogenized problem");
  auto* fine = app.add_subcommand("fine", "solve the fine-scale problem for every epsilon");
  auto* converge = app.add_subcommand("converge", "compare fine and homogenized solutions over epsilon");
  auto* props = app.add_subcommand("props", "run the property suite");
  auto* report = app.add_subcommand("report", "write a plain-text report");
  for (auto* s : {cell, effective, macro, fine, converge, report}) add_common(s, true);
  add_common(props, false);
  props->add_flag("--inject-non-spd-a0", inject_non_spd, "negative control: replace A0 by an indefinite matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  try {
    const SimConfig c = load(opt, props->parsed());
    const std::filesystem::path out = c.output;
    if (cell->parsed()) {
      run_cell(c, out);
      std::printf("correctors written to %s\n", (out / "cell_correctors.csv").string().c_str());
    } else if (effective->parsed()) {
      const EffectiveModel m = run_effective(c, out);
      write_effective_report(std::cout, m);
    } else if (macro->parsed()) {
      const MacroTrajectory tr = run_macro(c, out);
      std::printf("%zu steps written to %s\n", tr.states.size() - 1, (out / "macro.csv").string().c_str());
    } else if (fine->parsed()) {
      for (const auto& r : run_fine(c, out)) {
        const auto q = r.report.quantities();
        std::printf("eps %-8g sup|u|^2 %.4e sup|grad u|^2 %.4e sup|v|^2 %.4e int|grad v|^2 %.4e |p| %.4e residual %.1e\n",
                    r.epsilon, q[0], q[1], q[2], q[3], q[4], r.report.max_identity_residual);
      }
    } else if (converge->parsed()) {
      const ConvergenceRecord r = run_convergence(c, out);
      print_convergence(r);
      if (!r.strictly_decreasing()) {
        std::printf("FAILED: e(eps) is not strictly decreasing\n");
        return kPropertyFailure;
      }
      std::printf("e(eps) strictly decreasing\n");
    } else if (props->parsed()) {
      SimConfig pc = c;
      if (inject_non_spd) {
        Matrix a(c.dimension, c.dimension);
        a.setIdentity();
        a(0, 0) = -1.0;
        pc.coefficients.A0 = MatrixField::constant(a);
      }
      PropertyOptions po;
      po.seed = pc.seed;
      po.threads = pc.threads;
      const auto results = run_property_suite(pc, po);
      std::filesystem::create_directories(out);
      std::ofstream ledger(out / "properties.csv");
      write_property_ledger(ledger, results);
      for (const auto& r : results)
        std::printf("%-4s %-34s %s\n", r.passed ? "PASS" : "FAIL", r.id.c_str(), r.detail.c_str());
      if (!all_passed(results)) return kPropertyFailure;
    } else if (report->parsed()) {
      run_report(c, out);
      std::printf("report written to %s\n", (out / "report.txt").string().c_str());
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const EpsilonNotConforming& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const Error& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kSolverError;
  }
  return 0;
}
