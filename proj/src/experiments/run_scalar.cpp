// Rank-one runners: Lyapunov exponent, weak law and central limit theorem for κ.

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "common.hpp"
#include "mwl/errors.hpp"
#include "mwl/experiments/runners.hpp"
#include "mwl/stats.hpp"
#include "triples.hpp"

namespace mwl::experiments {

using namespace detail;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> gaussian_quantiles(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    g[i] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
  }
  return g;
}

double standardized_w2(std::vector<double> x, const std::vector<double>& gauss) {
  const auto v = variance_se(x);
  if (v.var == 0.0) return 0.0;
  const double m = mean_se(x).mean;
  const double sd = std::sqrt(v.var);
  for (double& z : x) z = (z - m) / sd;
  return wasserstein_q_1d(x, gauss, 2.0);
}

bool diagonal_support(const StepLawSpec& s) {
  if (s.support.size() != 1 || !s.field.is_real()) return false;
  const auto& g = s.support.front();
  for (std::size_t i = 0; i < g.dim(); ++i) {
    for (std::size_t j = 0; j < g.dim(); ++j) {
      if (i != j && g.real_at(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

RunReport run_lyapunov(const ExperimentConfig& cfg) {
  const Stopwatch sw;
  const StepSampler sampler(cfg.steplaw);
  const auto mk = sampler.mean_kappa();
  if (!mk) throw UsageError("lyapunov: the step law is not kappa-integrable");
  const auto grid = cfg.n_grid();
  const auto recs = simulate<PrefixRecord>(cfg, sampler, cfg.n_max, [&](const WalkBuffer& b) {
    return prefix_record(b, grid);
  });

  auto r = start_report("lyapunov", cfg);
  r.table.columns = {"n", "lambda", "lambda_se", "delta", "delta_se", "kappa_mean", "kappa_mean_se", "residual",
                     "residual_se"};
  bool all_zero = true;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double n = static_cast<double>(grid[j]);
    const auto lam = mean_se(column(recs, [&](const PrefixRecord& p) { return p.kappa[j] / n; }));
    const auto del = mean_se(column(recs, [&](const PrefixRecord& p) { return p.delta[j] / n; }));
    const auto km = mean_se(column(recs, [&](const PrefixRecord& p) { return p.sum[j] / n; }));
    const auto res = mean_se(column(recs, [&](const PrefixRecord& p) { return (p.kappa[j] - p.delta[j]) / n - *mk; }));
    for (const auto& p : recs) all_zero = all_zero && p.delta[j] == 0.0;
    r.table.add_row({n, lam.mean, lam.se, del.mean, del.se, km.mean, km.se, res.mean, res.se});
  }
  const std::size_t last = grid.size() - 1;
  const Estimate lambda{r.table.at(last, "lambda"), r.table.at(last, "lambda_se")};
  const Estimate delta{r.table.at(last, "delta"), r.table.at(last, "delta_se")};
  const Estimate residual{r.table.at(last, "residual"), r.table.at(last, "residual_se")};
  r.add("lambda1", lambda);
  r.add("delta", delta);
  r.add("mean_kappa", {*mk, 0.0});
  r.add("residual", residual);

  r.check("residual", std::fabs(residual.value) <= 3.0 * residual.se + 1e-12, residual.value, 3.0 * residual.se + 1e-12,
          "lambda1 - (E kappa + delta) within 3 SE");
  if (sampler.deterministic() && diagonal_support(cfg.steplaw)) {
    const double k = kappa(cfg.steplaw.support.front());
    r.check("lambda-exact", std::fabs(lambda.value - k) <= 1e-12, lambda.value, k, "deterministic diagonal walk");
    r.check("delta-zero", std::fabs(delta.value) <= 1e-12, delta.value, 0.0, "deterministic diagonal walk");
  }
  if (cfg.steplaw.kind == StepKind::PadicHaarBall) {
    r.check("delta-zero-exact", all_zero, delta.value, 0.0, "every sampled delta kappa is exactly 0");
  }
  const auto& f = cfg.steplaw.flags;
  // In SL the gap λ1 > λ2 forces λ1 > 0; in GL it does not (the p-adic ball has κ ≡ 0).
  if (!f.control && f.proximal && f.strongly_irreducible && f.in_sl) {
    r.check("lambda-positive", lambda.value - 3.0 * lambda.se > 0.0, lambda.value, 3.0 * lambda.se,
            "lambda1 exceeds 3 SE");
  }
  r.wall_seconds = sw.seconds();
  return r;
}

RunReport run_wlln(const ExperimentConfig& cfg) {
  const Stopwatch sw;
  require_flags(cfg.steplaw, {.proximal = true, .strongly_irreducible = true}, "wlln");
  for (double q : cfg.stats.q) {
    if (q >= 2.0) throw UsageError("wlln: q must lie in (0, 2)");
    require_half_moment(cfg.steplaw, q, "wlln");
  }
  const StepSampler sampler(cfg.steplaw);
  const auto grid = cfg.n_grid();
  const auto triples = defect_triples(cfg);
  struct Rec {
    PrefixRecord p;
    std::vector<double> defects;
  };
  const auto recs = simulate<Rec>(cfg, sampler, cfg.n_max, [&](const WalkBuffer& b) {
    return Rec{prefix_record(b, grid), triple_defects(b, triples)};
  });

  auto r = start_report("wlln", cfg);
  const double nmax = static_cast<double>(cfg.n_max);
  const auto dhat = mean_se(column(recs, [&](const Rec& x) { return x.p.delta.back() / nmax; }));
  r.add("delta", {dhat.mean, dhat.se});

  r.table.columns = {"n"};
  for (double q : cfg.stats.q) {
    for (const char* c : {"curve_q", "curve_se_q", "bound_q"}) r.table.columns.push_back(c + qlabel(q));
  }
  std::vector<std::vector<double>> curves(cfg.stats.q.size());
  std::vector<DefectConstants> consts;
  for (double q : cfg.stats.q) {
    consts.push_back(defect_constants(recs, [](const Rec& x) -> const std::vector<double>& { return x.defects; }, q));
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double n = static_cast<double>(grid[j]);
    std::vector<double> row{n};
    const auto dk = column(recs, [&](const Rec& x) { return x.p.delta[j]; });
    for (std::size_t iq = 0; iq < cfg.stats.q.size(); ++iq) {
      const double q = cfg.stats.q[iq];
      const auto c = mean_abs_pow(dk, q, q >= 1.0 ? n * dhat.mean : 0.0);
      const auto& k = consts[iq];
      double bound = 0.0;
      if (q < 1.0) {
        bound = (n * k.c_q.value + static_cast<double>(floor_log2(grid[j])) * k.c_q.value) / n;
      } else {
        const double v = std::pow(k.v_q.value, 1.0 / q);
        bound = std::pow(std::pow(n, 1.0 / q) * v / (std::pow(2.0, 1.0 / q) - 1.0) +
                             static_cast<double>(floor_log2(grid[j])) * v,
                         q) /
                n;
      }
      row.insert(row.end(), {c.mean / n, c.se / n, bound});
      curves[iq].push_back(c.mean / n);
    }
    r.table.add_row(std::move(row));
  }
  for (std::size_t iq = 0; iq < cfg.stats.q.size(); ++iq) {
    const auto ql = qlabel(cfg.stats.q[iq]);
    r.add("C_q" + ql, consts[iq].c_q);
    r.add("V_q" + ql, consts[iq].v_q);
    const auto& cv = curves[iq];
    const double mx = *std::max_element(cv.begin(), cv.end());
    if (cfg.steplaw.flags.control || mx == 0.0) {
      r.check("curve-zero-q" + ql, mx <= 1e-12, mx, 1e-12, "degenerate law: the curve vanishes");
      continue;
    }
    r.check("decreasing-q" + ql, decreasing_tail(cv, 4), cv.back(), cv[cv.size() >= 4 ? cv.size() - 4 : 0],
            "strictly decreasing over the last 4 grid points");
    const double ratio = cv.front() > 0.0 ? cv.back() / cv.front() : kNaN;
    r.check("ratio-q" + ql, ratio <= cfg.stats.wlln_ratio_max, ratio, cfg.stats.wlln_ratio_max,
            "final / initial curve value");
  }
  r.wall_seconds = sw.seconds();
  return r;
}

RunReport run_clt(const ExperimentConfig& cfg) {
  const Stopwatch sw;
  require_flags(cfg.steplaw, {.proximal = true, .strongly_irreducible = true}, "clt");
  const StepSampler sampler(cfg.steplaw);
  if (!sampler.kappa_square_integrable()) throw UsageError("clt: E kappa^2 is infinite for this entry");
  const auto grid = cfg.n_grid();
  const auto recs = simulate<PrefixRecord>(cfg, sampler, cfg.n_max, [&](const WalkBuffer& b) {
    return prefix_record(b, grid);
  });
  const auto gauss = gaussian_quantiles(recs.size());

  auto r = start_report("clt", cfg);
  r.table.columns = {"n", "var_rate", "var_rate_se", "rate_ratio", "mean_rate", "mean_rate_se", "w2", "w2_se"};
  std::vector<double> rates, w2s;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double n = static_cast<double>(grid[j]);
    const auto k = column(recs, [&](const PrefixRecord& p) { return p.kappa[j]; });
    const auto v = variance_se(k);
    const auto m = mean_se(k);
    const double rate = v.var / n;
    const double w2 = standardized_w2(k, gauss);
    const auto reps = block_bootstrap(cfg.replicas, cfg.walks, cfg.stats.bootstrap, aux_stream(cfg.seed, 100 + j),
                                      [&](const std::vector<std::size_t>& idx) {
                                        std::vector<double> x(idx.size());
                                        for (std::size_t i = 0; i < idx.size(); ++i) x[i] = k[idx[i]];
                                        return standardized_w2(std::move(x), gauss);
                                      });
    const double ratio = rates.empty() || rates.back() == 0.0 ? kNaN : rate / rates.back();
    r.table.add_row({n, rate, v.se / n, ratio, m.mean / n, m.se / n, w2, bootstrap_se(reps)});
    rates.push_back(rate);
    w2s.push_back(w2);
  }
  const std::size_t last = grid.size() - 1;
  r.add("var_rate", {rates.back(), r.table.at(last, "var_rate_se")});
  r.add("w2", {w2s.back(), r.table.at(last, "w2_se")});
  const bool flat = std::all_of(rates.begin(), rates.end(), [](double v) { return v == 0.0; });
  if (cfg.steplaw.flags.control || flat) {
    const double mr = *std::max_element(rates.begin(), rates.end());
    const double mw = *std::max_element(w2s.begin(), w2s.end());
    r.check("rate-zero", mr == 0.0, mr, 0.0, "degenerate law: no fluctuations");
    r.check("w2-zero", mw == 0.0, mw, 0.0, "degenerate law: W2 vanishes");
  } else {
    if (grid.size() < 3) throw UsageError("clt: the grid needs at least three points");
    const double ratio = rates[last - 1] / rates[last - 2];
    r.check("rate-ratio", std::fabs(ratio - 1.0) <= cfg.stats.rate_tol, ratio, cfg.stats.rate_tol,
            fmt::format("rate({}) / rate({})", grid[last - 1], grid[last - 2]));
    r.check("w2", w2s.back() <= cfg.stats.w2_max, w2s.back(), cfg.stats.w2_max,
            fmt::format("W2 of the standardized sample at n = {}", grid[last]));
  }
  r.wall_seconds = sw.seconds();
  return r;
}

}  // namespace mwl::experiments
