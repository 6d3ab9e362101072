// Runners on the norm-cancellation process itself: the tail of the pair
// defect and the dominating inequalities of almost additive processes.

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "common.hpp"
#include "mwl/errors.hpp"
#include "mwl/experiments/runners.hpp"
#include "mwl/stable.hpp"
#include "mwl/stats.hpp"
#include "triples.hpp"

namespace mwl::experiments {

using namespace detail;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEps = std::numeric_limits<double>::epsilon();

double safe_hill(std::span<const double> x, std::size_t k) {
  try {
    return hill_tail_index(x, k);
  } catch (const UsageError&) {
    return kNaN;
  }
}

std::vector<double> pick(const std::vector<double>& x, const std::vector<std::size_t>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
  return out;
}

double percentile(std::vector<double> v, double p) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return kNaN;
  return quantile(std::move(v), p);
}

// Levels t_i = upper quantiles of x at log-spaced exceedance probabilities
// from 0.5 down to 10 / size, strictly increasing and positive.
std::vector<double> tail_grid(const std::vector<double>& x, std::size_t points) {
  std::vector<double> t;
  const double lo = std::min(0.5, 10.0 / static_cast<double>(x.size()));
  for (std::size_t i = 0; i < points; ++i) {
    const double f = points > 1 ? static_cast<double>(i) / static_cast<double>(points - 1) : 0.0;
    const double p = 0.5 * std::pow(lo / 0.5, f);
    const double v = quantile(x, 1.0 - p);
    if (v > 0.0 && (t.empty() || v > t.back())) t.push_back(v);
  }
  return t;
}

struct TailFit {
  double c = kNaN;
  double beta = kNaN;
  double holdout = kNaN;  // fraction of held-out levels under the bound
  std::vector<double> bound;
};

// Even grid points train, odd ones are held out. For each β on a log grid the
// smallest C covering the training points is taken; β minimizes the summed
// log overshoot.
TailFit fit_tail_bound(const std::vector<double>& t, const std::vector<double>& emp,
                       const std::function<double(double)>& n_tail, std::size_t k_max) {
  TailFit best;
  double best_score = std::numeric_limits<double>::infinity();
  constexpr std::size_t kBetas = 80;
  for (std::size_t ib = 0; ib < kBetas; ++ib) {
    const double beta = 1e-2 * std::pow(1e3, static_cast<double>(ib) / (kBetas - 1));
    std::vector<double> unit(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) unit[i] = tail_bound_rhs(t[i], 1.0, beta, n_tail, k_max).total();
    double c = 0.0;
    bool feasible = true;
    for (std::size_t i = 0; i < t.size(); i += 2) {
      if (emp[i] == 0.0) continue;
      if (unit[i] == 0.0) {
        feasible = false;
        break;
      }
      c = std::max(c, emp[i] / unit[i]);
    }
    if (!feasible || c == 0.0) continue;
    double score = 0.0;
    for (std::size_t i = 0; i < t.size(); i += 2) {
      if (emp[i] > 0.0) score += std::log(c * unit[i] / emp[i]);
    }
    if (score < best_score) {
      best_score = score;
      best.c = c;
      best.beta = beta;
      best.bound.resize(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) best.bound[i] = c * unit[i];
    }
  }
  if (best.bound.empty()) return best;
  std::size_t held = 0, ok = 0;
  for (std::size_t i = 1; i < t.size(); i += 2) {
    ++held;
    if (emp[i] <= best.bound[i]) ++ok;
  }
  best.holdout = held ? static_cast<double>(ok) / static_cast<double>(held) : kNaN;
  return best;
}

// Fits log P(X > t) against log t (loglog) or t over the levels with
// exceedance probability <= 0.1.
LinearFit survival_fit(const std::vector<double>& x, std::size_t points, bool loglog) {
  const EmpiricalSurvival surv(x);
  std::vector<double> xs, ys;
  for (double t : tail_grid(x, points)) {
    const double p = surv(t);
    if (p > 0.0 && p <= 0.1) {
      xs.push_back(loglog ? std::log(t) : t);
      ys.push_back(std::log(p));
    }
  }
  if (xs.size() < 3) return {kNaN, kNaN, kNaN, kNaN};
  try {
    return linear_fit(xs, ys);
  } catch (const UsageError&) {
    return {kNaN, kNaN, kNaN, kNaN};
  }
}

}  // namespace

RunReport run_delta_tail(const ExperimentConfig& cfg) {
  const Stopwatch sw;
  require_flags(cfg.steplaw, {.proximal = true, .strongly_irreducible = true}, "delta-tail");
  const StepSampler sampler(cfg.steplaw);
  const auto grid = cfg.n_grid();
  struct Rec {
    std::vector<double> pair;  // |Δκ(γ_{0,n}, γ_{n,2n})| per grid n
    std::vector<double> roundoff;  // floating-point error bound of each pair value
    double n0 = 0.0;
    double k0 = 0.0;
  };
  const auto recs = simulate<Rec>(cfg, sampler, 2 * cfg.n_max, [&](const WalkBuffer& b) {
    Rec out;
    for (std::size_t n : grid) {
      out.pair.push_back(std::fabs(checked(b.delta_kappa_pair(0, n, 2 * n), "a pair defect")));
      // Each κ is a sum of up to 2n rounded logs; over Q_p the defect is exact.
      const double mag = std::fabs(b.kappa_window(0, 2 * n)) + std::fabs(b.kappa_window(0, n)) +
                         std::fabs(b.kappa_window(n, 2 * n));
      out.roundoff.push_back(b.field().is_padic() ? 0.0 : 4.0 * kEps * static_cast<double>(2 * n) * mag);
    }
    out.n0 = b.step(0).big_n();
    out.k0 = b.step(0).kappa();
    return out;
  });
  auto r = start_report("delta-tail", cfg);
  const std::size_t w = recs.size();
  const std::size_t last = grid.size() - 1;

  // Degenerate laws: the ultrametric example and the controls.
  if (cfg.steplaw.kind == StepKind::PadicHaarBall || cfg.steplaw.flags.control) {
    r.table.columns = {"n", "max_abs_delta", "max_roundoff_bound", "nonzero_fraction"};
    double worst = 0.0;
    std::size_t beyond = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      double mx = 0.0, bound = 0.0;
      std::size_t nz = 0;
      for (const auto& v : recs) {
        mx = std::max(mx, v.pair[j]);
        bound = std::max(bound, v.roundoff[j]);
        if (v.pair[j] > v.roundoff[j]) ++nz;
      }
      r.table.add_row({static_cast<double>(grid[j]), mx, bound, static_cast<double>(nz) / static_cast<double>(w)});
      worst = std::max(worst, mx);
      beyond += nz;
    }
    r.add("max_abs_delta", {worst, 0.0});
    r.check("trivial-tail", beyond == 0, static_cast<double>(beyond), 0.0,
            "pair defects beyond their rounding bound (exact zero over Q_p)");
    r.wall_seconds = sw.seconds();
    return r;
  }

  const auto n0 = column(recs, [](const Rec& v) { return v.n0; });
  const auto k0 = column(recs, [](const Rec& v) { return v.k0; });
  const EmpiricalSurvival n_surv(n0);
  const std::function<double(double)> n_tail = [&n_surv](double s) { return n_surv(s); };
  const std::size_t k_hill = std::clamp<std::size_t>(
      static_cast<std::size_t>(cfg.stats.hill_fraction * static_cast<double>(w)), 2, w > 2 ? w - 1 : 1);
  const double hill_kappa = safe_hill(k0, k_hill);
  const auto n_fit = survival_fit(n0, cfg.stats.tail_points, true);
  r.add("hill_kappa", {hill_kappa, kNaN});
  r.add("n_tail_loglog_slope", {n_fit.slope, n_fit.slope_se});

  r.table.columns = {"n",           "hill_delta",    "hill_delta_se",     "hill_kappa",   "hill_kappa_se",
                     "margin",      "margin_lo",     "margin_hi",         "C_hat",        "beta_hat",
                     "holdout_fraction", "loglog_slope", "loglog_slope_se", "linear_slope", "linear_slope_se",
                     "linear_r2"};
  Table tail_table;
  tail_table.name = "tail";
  tail_table.columns = {"n", "t", "empirical", "bound", "train"};
  TailFit last_fit;
  LinearFit last_loglog, last_linear;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double n = static_cast<double>(grid[j]);
    const auto x = column(recs, [&](const Rec& v) { return v.pair[j]; });
    const double hd = safe_hill(x, k_hill);
    std::vector<double> hd_reps, hk_reps, margin_reps;
    block_bootstrap(cfg.replicas, cfg.walks, cfg.stats.bootstrap, aux_stream(cfg.seed, 500 + j),
                    [&](const std::vector<std::size_t>& idx) {
                      const double a = safe_hill(pick(x, idx), k_hill);
                      const double b = safe_hill(pick(k0, idx), k_hill);
                      hd_reps.push_back(a);
                      hk_reps.push_back(b);
                      margin_reps.push_back(a - b);
                      return 0.0;
                    });
    const EmpiricalSurvival surv(x);
    const auto t = tail_grid(x, cfg.stats.tail_points);
    std::vector<double> emp(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) emp[i] = surv(t[i]);
    const auto fit = fit_tail_bound(t, emp, n_tail, cfg.stats.tail_kmax);
    const auto loglog = survival_fit(x, cfg.stats.tail_points, true);
    const auto linear = survival_fit(x, cfg.stats.tail_points, false);
    r.table.add_row({n, hd, bootstrap_se(hd_reps), hill_kappa, bootstrap_se(hk_reps), hd - hill_kappa,
                     percentile(margin_reps, 0.025), percentile(margin_reps, 0.975), fit.c, fit.beta, fit.holdout,
                     loglog.slope, loglog.slope_se, linear.slope, linear.slope_se, linear.r2});
    if (j == last) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        tail_table.add_row({n, t[i], emp[i], fit.bound.empty() ? kNaN : fit.bound[i], i % 2 == 0 ? 1.0 : 0.0});
      }
      last_fit = fit;
      last_loglog = loglog;
      last_linear = linear;
    }
  }
  r.extra.push_back(std::move(tail_table));
  const double margin = r.table.at(last, "margin");
  const double margin_lo = r.table.at(last, "margin_lo");
  r.add("hill_delta", {r.table.at(last, "hill_delta"), r.table.at(last, "hill_delta_se")});
  r.add("margin", {margin, kNaN});
  r.add("margin_lo", {margin_lo, kNaN});
  r.add("margin_hi", {r.table.at(last, "margin_hi"), kNaN});
  r.add("C_hat", {last_fit.c, kNaN});
  r.add("beta_hat", {last_fit.beta, kNaN});
  // Once the k = 1 term dominates, only C e^{-β} is identified.
  r.add("C_exp_minus_beta", {last_fit.c * std::exp(-last_fit.beta), kNaN});
  r.add("loglog_slope", {last_loglog.slope, last_loglog.slope_se});
  r.add("linear_slope", {last_linear.slope, last_linear.slope_se});

  r.check("holdout", last_fit.holdout >= cfg.stats.holdout_min, last_fit.holdout, cfg.stats.holdout_min,
          "fraction of held-out levels under the fitted bound");
  if (cfg.steplaw.kind == StepKind::RotHeavyDiag) {
    r.check("moment-gain", margin_lo > 0.0, margin_lo, 0.0,
            "lower 2.5% bootstrap bound of hill(delta) - hill(kappa) at the largest n");
    const double thr = 2.0 * n_fit.slope + 3.0 * std::hypot(last_loglog.slope_se, 2.0 * n_fit.slope_se);
    r.check("squared-signature", last_loglog.slope <= thr, last_loglog.slope, thr,
            "log-log slope of the defect tail at least twice as steep as the N tail");
  } else {
    const bool ok = last_linear.slope < 0.0 && last_linear.r2 >= 0.9;
    r.check("exponential-tail", ok, last_linear.slope, 0.0, fmt::format("R2 {:.4f} >= 0.9", last_linear.r2));
  }
  r.wall_seconds = sw.seconds();
  return r;
}

RunReport run_aa_bounds(const ExperimentConfig& cfg) {
  const Stopwatch sw;
  require_flags(cfg.steplaw, {.proximal = true, .strongly_irreducible = true}, "aa-bounds");
  for (double q : cfg.stats.q) {
    if (!(q > 0.0 && q <= 2.0)) throw UsageError("aa-bounds: q must lie in (0, 2]");
    require_half_moment(cfg.steplaw, q, "aa-bounds");
  }
  const StepSampler sampler(cfg.steplaw);
  const auto grid = cfg.n_grid();
  const auto triples = defect_triples(cfg);
  struct Rec {
    PrefixRecord p;
    double s0 = 0.0;
    std::vector<double> defects;
  };
  const auto recs = simulate<Rec>(cfg, sampler, cfg.n_max, [&](const WalkBuffer& b) {
    return Rec{prefix_record(b, grid), b.delta_kappa(0, 1), triple_defects(b, triples)};
  });
  auto r = start_report("aa-bounds", cfg);
  const auto s0 = column(recs, [](const Rec& x) { return x.s0; });

  r.table.columns = {"n"};
  for (double q : cfg.stats.q) {
    for (const char* c : {"lhs_q", "lhs_se_q", "rhs_q", "rhs_se_q"}) r.table.columns.push_back(c + qlabel(q));
  }
  std::vector<DefectConstants> consts;
  for (double q : cfg.stats.q) {
    consts.push_back(defect_constants(recs, [](const Rec& x) -> const std::vector<double>& { return x.defects; }, q));
  }
  std::vector<std::size_t> violations(cfg.stats.q.size(), 0);
  std::vector<double> worst(cfg.stats.q.size(), -std::numeric_limits<double>::infinity());
  // x^{1/q} and the delta-method SE of x^{1/q}.
  auto root = [](double x, double se, double q) -> Estimate {
    if (x <= 0.0) return {0.0, 0.0};
    return {std::pow(x, 1.0 / q), se / q * std::pow(x, 1.0 / q - 1.0)};
  };
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double n = static_cast<double>(grid[j]);
    const double lg = static_cast<double>(floor_log2(grid[j]));
    const auto sbar = column(recs, [&](const Rec& x) { return x.p.delta[j]; });
    std::vector<double> row{n};
    for (std::size_t iq = 0; iq < cfg.stats.q.size(); ++iq) {
      const double q = cfg.stats.q[iq];
      const auto& k = consts[iq];
      Estimate lhs, rhs;
      if (q < 1.0) {
        const auto l = mean_abs_pow(sbar, q);
        const auto e0 = mean_abs_pow(s0, q);
        lhs = {l.mean, l.se};
        rhs = {n * (e0.mean + k.c_q.value) + lg * k.c_q.value,
               std::hypot(n * e0.se, (n + lg) * k.c_q.se)};
      } else if (q < 2.0) {
        const auto vs = var_q_se(sbar, q);
        lhs = root(vs.value, vs.se, q);
        const auto v0 = var_q_se(s0, q);
        const auto r0 = root(v0.value, v0.se, q);
        const auto rv = root(k.v_q.value, k.v_q.se, q);
        const double geo = std::pow(2.0, 1.0 / q) - 1.0;
        const double nq = std::pow(n, 1.0 / q);
        rhs = {nq * (r0.value + rv.value / geo) + lg * rv.value,
               std::hypot(nq * r0.se, (nq / geo + lg) * rv.se)};
      } else {
        const auto vs = variance_se(sbar);
        lhs = root(vs.var, vs.se, 2.0);
        const auto v0 = variance_se(s0);
        const auto r0 = root(n * v0.var, n * v0.se, 2.0);
        const auto rc = root(k.c_q.value, k.c_q.se, 2.0);
        const double f = std::log2(n) + std::sqrt(n) / (std::sqrt(2.0) - 1.0);
        rhs = {r0.value + rc.value * f, std::hypot(r0.se, rc.se * f)};
      }
      row.insert(row.end(), {lhs.value, lhs.se, rhs.value, rhs.se});
      const double excess = (lhs.value - 3.0 * lhs.se) - (rhs.value + 3.0 * rhs.se);
      worst[iq] = std::max(worst[iq], excess);
      if (excess > 0.0) ++violations[iq];
    }
    r.table.add_row(std::move(row));
  }
  for (std::size_t iq = 0; iq < cfg.stats.q.size(); ++iq) {
    const double q = cfg.stats.q[iq];
    const auto ql = qlabel(q);
    r.add("C_q" + ql, consts[iq].c_q);
    r.add("V_q" + ql, consts[iq].v_q);
    const std::string name = q < 1.0 ? "dom-q" + ql : q < 2.0 ? "dom-var-q" + ql : std::string("dom-var");
    r.check(name, violations[iq] == 0, worst[iq], 0.0,
            fmt::format("{} grid points where lhs - 3 SE exceeds rhs + 3 SE", violations[iq]));
  }
  r.wall_seconds = sw.seconds();
  return r;
}

}  // namespace mwl::experiments
