// Command-line front end: `mwl <runner> [--config PATH] [--seed U64]
// [--out DIR] [--replicas R]`. Exit 0 when every criterion passes, 2 when
// one fails, 1 on usage or runtime errors.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mwl/experiments/config.hpp"
#include "mwl/experiments/report.hpp"
#include "mwl/experiments/runners.hpp"

#ifndef MWL_FIXTURE_DIR
#define MWL_FIXTURE_DIR "fixtures"
#endif

namespace fs = std::filesystem;
using namespace mwl::experiments;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> replicas;
};

int execute(const std::string& runner, const Options& o) {
  auto cfg = o.config.empty() ? ExperimentConfig::defaults() : ExperimentConfig::load(o.config);
  if (o.seed) cfg.set_seed(*o.seed);
  if (o.replicas) cfg.set_replicas(*o.replicas);
  if (o.out) cfg.out_dir = *o.out;
  auto report = run(runner, cfg);
  const auto fixture = fs::path("pilot") / fmt::format("{}-{}.json", runner, report.entry);
  if (fs::exists(fs::path(MWL_FIXTURE_DIR) / fixture)) report.fixture = fixture.generic_string();
  const auto files = write_outputs(report, cfg.out_dir);
  for (const auto& c : report.criteria) {
    std::cout << fmt::format("{} {}: value {:.6g}, threshold {:.6g} ({})\n", c.pass ? "PASS" : "FAIL", c.name, c.value,
                             c.threshold, c.detail);
  }
  std::cout << fmt::format("{} on {}: {} criteria, {}; {:.1f} s; wrote {} and {} CSV file(s)\n", runner, report.entry,
                           report.criteria.size(), report.passed() ? "all pass" : "FAILED", report.wall_seconds,
                           (cfg.out_dir / "report.json").string(), files.size());
  return report.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random matrix product experiments"};
  app.require_subcommand(1);
  Options opts;
  std::string chosen;
  for (const auto& name : runner_names()) {
    auto* sub = app.add_subcommand(name, fmt::format("run the {} experiment", name));
    sub->add_option("--config", opts.config, "experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "override the seed");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--replicas", opts.replicas, "override the replica count")->check(CLI::PositiveNumber);
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }
  try {
    return execute(chosen, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
