#pragma once

// Experiment runners. Each simulates cfg.replicas × cfg.walks independent
// walks (replica r uses Rng::for_replica(cfg.seed, r)) and reports one row per
// grid n with Monte Carlo standard errors. Runners throw UsageError when the
// entry lacks a required hypothesis flag or moment, and DomainError when a
// −inf log-norm shows up.

#include <string>
#include <vector>

#include "mwl/experiments/config.hpp"
#include "mwl/experiments/report.hpp"

namespace mwl::experiments {

/// λ̂₁ = mean κ(γ̄_n)/n, δ̂ = mean Δκ(γ̃_{0,n})/n and λ̂₁ − (E κ(γ_0) + δ̂).
RunReport run_lyapunov(const ExperimentConfig& cfg);
/// E|Δκ(γ̃_{0,n}) − n δ̂|^q / n (δ̂ term iff q >= 1) with the dominating bound.
RunReport run_wlln(const ExperimentConfig& cfg);
/// Var(κ(γ̄_n))/n and W₂ of the standardized sample against Gaussian quantiles.
RunReport run_clt(const ExperimentConfig& cfg);
/// Matrix vs additive normalized samples and the stable oracle.
RunReport run_gclt(const ExperimentConfig& cfg);
/// Δκ̇ analogues and the Weyl-chamber check.
RunReport run_higher(const ExperimentConfig& cfg);
/// Tail of |Δκ(γ_{0,n}, γ_{n,2n})| against the fitted bound and Hill indices.
RunReport run_delta_tail(const ExperimentConfig& cfg);
/// The dominating inequalities on S_{m,n} = Δκ(γ̃_{m,n}).
RunReport run_aa_bounds(const ExperimentConfig& cfg);
/// Exact dichotomy reconstruction on random tables and on the walk process.
RunReport run_dichotomy_verify(const ExperimentConfig& cfg);
/// Characteristic-function, series-vs-CMS and convolution checks.
RunReport run_stable_selftest(const ExperimentConfig& cfg);

std::vector<std::string> runner_names();
/// Dispatch by subcommand name; UsageError for unknown names.
RunReport run(const std::string& name, const ExperimentConfig& cfg);

}  // namespace mwl::experiments
