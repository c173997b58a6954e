// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "aphom/aphom.hpp"

#ifndef APHOM_CONFIG_DIR
#define APHOM_CONFIG_DIR "configs"
#endif

namespace {

using namespace aphom;
namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

Outcome combine(std::initializer_list<PropertyResult> rs) {
  Outcome o{true, ""};
  for (const auto& r : rs) {
    o.passed = o.passed && r.passed;
    o.detail += (o.detail.empty() ? "" : "; ") + r.detail;
  }
  return o;
}

SimConfig config(const std::string& name) { return load_config(std::string(APHOM_CONFIG_DIR) + "/" + name); }

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aphom_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Outcome fine_estimates() {
  const auto start = std::chrono::steady_clock::now();
  const SimConfig c = config("disk_memory.yaml");
  const auto runs = run_fine(c, scratch_dir("fine"));
  double worst_ratio = 0.0, worst_residual = 0.0;
  for (int q = 0; q < 5; ++q) {
    double lo = 1e300, hi = 0.0;
    for (const auto& r : runs) {
      lo = std::min(lo, r.report.quantities()[static_cast<std::size_t>(q)]);
      hi = std::max(hi, r.report.quantities()[static_cast<std::size_t>(q)]);
    }
    worst_ratio = std::max(worst_ratio, lo > 0.0 ? hi / lo : 1e300);
  }
  for (const auto& r : runs) worst_residual = std::max(worst_residual, r.report.max_identity_residual);
  const double secs = seconds_since(start);
  return {worst_ratio < 2.0 && worst_residual < 1e-6 && secs <= 600.0,
          fmt("eps 1/4;1/8;1/16: largest max/min ratio of the five estimates %.3f; identity residual %.1e; %.0f s",
              worst_ratio, worst_residual, secs)};
}

Outcome convergence() {
  const auto start = std::chrono::steady_clock::now();
  const ConvergenceRecord single = run_convergence(config("converge_contrast1.yaml"), scratch_dir("contrast1"));
  bool at_floor = true;
  std::string d = "contrast 1 e vs floor:";
  for (const auto& e : single.entries) {
    at_floor = at_floor && e.error <= e.floor * (1.0 + 1e-6) + 1e-10 * e.reference;
    d += fmt(" %.3g/%.3g", e.error, e.floor);
  }
  const ConvergenceRecord two = run_convergence(config("converge_disk.yaml"), scratch_dir("disk"));
  d += "; two-phase e(eps):";
  for (const auto& e : two.entries) d += fmt(" %.5g", e.error);
  d += " relative:";
  for (const auto& e : two.entries) d += fmt(" %.3g", e.error / e.reference);
  const double secs = seconds_since(start);
  d += fmt("; %.0f s", secs);
  return {at_floor && two.strictly_decreasing() && secs <= 1200.0, d};
}

std::vector<std::pair<std::string, std::string>> read_csvs(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files.emplace_back(e.path().filename().string(), ss.str());
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism() {
  SimConfig c = config("disk_memory.yaml");
  c.epsilons = {0.25, 0.125};
  c.T = 0.25;
  c.threads = 2;
  std::vector<std::vector<std::pair<std::string, std::string>>> runs;
  for (int k = 0; k < 2; ++k) {
    const fs::path out = scratch_dir("determinism_" + std::to_string(k));
    run_cell(c, out);
    run_effective(c, out);
    run_macro(c, out);
    run_fine(c, out);
    PropertyOptions po;
    po.seed = c.seed;
    po.threads = c.threads;
    std::ofstream ledger(out / "properties.csv");
    write_property_ledger(ledger, run_property_suite(c, po));
    ledger.close();
    runs.push_back(read_csvs(out));
  }
  const bool same = !runs[0].empty() && runs[0] == runs[1];
  return {same, fmt("%g CSV files compared byte for byte across two runs", static_cast<double>(runs[0].size()))};
}

}  // namespace

int main() {
  const std::uint64_t seed = 1;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"laminate harmonic mean", [&] { return combine({props::laminate_harmonic_mean(seed)}); }},
      {"mean value and Parseval",
       [&] { return combine({props::mean_value_matches_window(seed), props::parseval_identity(seed)}); }},
      {"period detection", [&] { return combine({props::period_detection(seed)}); }},
      {"effective tensor structure", [&] { return combine({props::tensor_structure(seed, 2)}); }},
      {"density and load weights", [&] { return combine({props::density_formula(seed)}); }},
      {"convolution quadrature",
       [&] { return combine({props::convolution_quadrature(seed), props::convolution_young(seed)}); }},
      {"fine-scale energy estimates", fine_estimates},
      {"convergence to the homogenized solution", convergence},
      {"macro solver",
       [&] {
         return combine({props::macro_zero_trajectory(seed), props::macro_standing_wave(seed),
                         props::macro_free_decay(seed)});
       }},
      {"determinism", determinism},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.passed;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, o.passed ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
