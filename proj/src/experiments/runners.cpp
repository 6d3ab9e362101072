#include "mwl/experiments/runners.hpp"

#include <fmt/format.h>

#include "mwl/errors.hpp"

namespace mwl::experiments {

namespace {

using Runner = RunReport (*)(const ExperimentConfig&);

const std::vector<std::pair<std::string, Runner>>& table() {
  static const std::vector<std::pair<std::string, Runner>> t{
      {"lyapunov", run_lyapunov},
      {"wlln", run_wlln},
      {"clt", run_clt},
      {"gclt", run_gclt},
      {"higher", run_higher},
      {"delta-tail", run_delta_tail},
      {"aa-bounds", run_aa_bounds},
      {"dichotomy-verify", run_dichotomy_verify},
      {"stable-selftest", run_stable_selftest},
  };
  return t;
}

}  // namespace

std::vector<std::string> runner_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : table()) out.push_back(name);
  return out;
}

RunReport run(const std::string& name, const ExperimentConfig& cfg) {
  for (const auto& [n, fn] : table()) {
    if (n == name) return fn(cfg);
  }
  throw UsageError(fmt::format("unknown runner '{}'", name));
}

}  // namespace mwl::experiments
