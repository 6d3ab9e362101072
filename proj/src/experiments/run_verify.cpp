// Self-checks: the dichotomy rewriting on random tables and on walks, and the
// stable-law toolkit against its closed forms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

#include <fmt/format.h>

#include "common.hpp"
#include "mwl/errors.hpp"
#include "mwl/experiments/runners.hpp"
#include "mwl/process_table.hpp"
#include "mwl/stable.hpp"
#include "mwl/stats.hpp"

namespace mwl::experiments {

using namespace detail;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kWalkChecks = 8;

struct TableCheck {
  std::size_t int_mismatches = 0;
  double real_max_rel = 0.0;
  std::vector<std::size_t> grid_int;  // mismatches at each grid n <= n_max
  std::vector<double> grid_real;
};

TableCheck check_tables(std::size_t n_max, Rng rng, const std::vector<std::size_t>& grid) {
  ProcessTable<std::int64_t> ti(n_max, 1);
  ProcessTable<double> tr(n_max, 1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t m = 0; m < n; ++m) {
      ti.set(m, n, static_cast<std::int64_t>(rng.index(2001)) - 1000);
      tr.set(m, n, 2.0 * rng.uniform() - 1.0);
    }
  }
  TableCheck out;
  std::vector<std::size_t> per_n_int(n_max + 1, 0);
  std::vector<double> per_n_real(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    if (dichotomy_decompose(ti, n).total()[0] != ti.at(0, n)[0]) per_n_int[n] = 1;
    const double s = tr.at(0, n)[0];
    const double err = std::fabs(dichotomy_decompose(tr, n).total()[0] - s) / std::max(1.0, std::fabs(s));
    per_n_real[n] = err;
    out.int_mismatches += per_n_int[n];
    out.real_max_rel = std::max(out.real_max_rel, err);
  }
  for (std::size_t n : grid) {
    out.grid_int.push_back(n <= n_max ? per_n_int[n] : 0);
    out.grid_real.push_back(n <= n_max ? per_n_real[n] : 0.0);
  }
  return out;
}

}  // namespace

RunReport run_dichotomy_verify(const ExperimentConfig& cfg) {
  const Stopwatch sw;
  const auto grid = cfg.n_grid();
  const std::size_t tn = cfg.stats.table_n_max;
  const auto tables = parallel_map<TableCheck>(cfg.stats.tables, [&](std::size_t t) {
    return check_tables(tn, aux_stream(cfg.seed, 1000 + t), grid);
  });

  const StepSampler sampler(cfg.steplaw);
  const std::size_t walks = std::min(cfg.replicas, kWalkChecks);
  const auto walk_err = parallel_map<std::vector<double>>(walks, [&](std::size_t r) {
    Rng rng = Rng::for_replica(cfg.seed, r);
    const WalkBuffer b(sampler.walk(rng, cfg.n_max));
    const LazyProcess<double> s(cfg.n_max, 1, [&b](std::size_t m, std::size_t n) {
      return std::vector<double>{checked(b.delta_kappa(m, n), "a walk window")};
    });
    std::vector<double> errs;
    for (std::size_t n : grid) {
      const double v = s.value(0, n)[0];
      errs.push_back(std::fabs(dichotomy_decompose(s, n).total()[0] - v) / std::max(1.0, std::fabs(v)));
    }
    return errs;
  });

  auto r = start_report("dichotomy-verify", cfg);
  r.table.columns = {"n", "table_int_mismatches", "table_real_max_rel_err", "walk_max_rel_err"};
  std::size_t mismatches = 0;
  double real_max = 0.0, walk_max = 0.0;
  for (const auto& t : tables) {
    mismatches += t.int_mismatches;
    real_max = std::max(real_max, t.real_max_rel);
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::size_t im = 0;
    double re = 0.0, we = 0.0;
    for (const auto& t : tables) {
      im += t.grid_int[j];
      re = std::max(re, t.grid_real[j]);
    }
    for (const auto& e : walk_err) we = std::max(we, e[j]);
    walk_max = std::max(walk_max, we);
    const bool in_table = grid[j] <= tn;
    r.table.add_row({static_cast<double>(grid[j]), in_table ? static_cast<double>(im) : kNaN, in_table ? re : kNaN,
                     we});
  }
  r.add("table_int_mismatches", {static_cast<double>(mismatches), 0.0});
  r.add("table_real_max_rel_err", {real_max, 0.0});
  r.add("walk_max_rel_err", {walk_max, 0.0});
  r.check("integer-exact", mismatches == 0, static_cast<double>(mismatches), 0.0,
          fmt::format("{} integer tables, every n <= {}", cfg.stats.tables, tn));
  r.check("real-relative", real_max <= 1e-9, real_max, 1e-9,
          fmt::format("{} real tables, every n <= {}, error / max(1, |S_0n|)", cfg.stats.tables, tn));
  r.check("walk-relative", walk_max <= 1e-9, walk_max, 1e-9,
          fmt::format("S_mn = delta kappa on {} walks, every grid n", walks));
  r.wall_seconds = sw.seconds();
  return r;
}

RunReport run_stable_selftest(const ExperimentConfig& cfg) {
  const Stopwatch sw;
  const std::size_t n = cfg.stats.selftest_n;
  const auto& alphas = cfg.stats.selftest_alpha;
  std::vector<double> thetas;
  for (int i = -100; i <= 100; ++i) thetas.push_back(0.05 * i);
  struct Row {
    double cf_dev, ks, conv;
  };
  const auto rows = parallel_map<Row>(alphas.size(), [&](std::size_t i) {
    const double alpha = alphas[i];
    Row row{};
    const auto p = StableParams::make(alpha, alpha == 2.0 ? 0.0 : 0.5, 1.5, 0.3);
    Rng rng = aux_stream(cfg.seed, 10 + i);
    const auto x = sample(p, rng, n);
    const auto cf = empirical_cf(x, thetas);
    row.cf_dev = 0.0;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      row.cf_dev = std::max(row.cf_dev, std::abs(cf[k] - char_fn(p, thetas[k])));
    }
    row.ks = kNaN;
    if (alpha < 2.0) {
      const auto p0 = StableParams::make(alpha, 0.0, 1.0, 0.0);
      Rng r1 = aux_stream(cfg.seed, 20 + i), r2 = aux_stream(cfg.seed, 30 + i);
      const auto a = sample(p0, r1, n);
      const auto b = sample_series(p0, HarmonicMeasure::symmetric_line(), r2, n, cfg.stats.selftest_terms);
      row.ks = ks_distance(a, b);
    }
    const double beta = alpha == 2.0 ? 0.0 : 0.7;
    const auto q0 = StableParams::make(alpha, beta, 1.0, 0.3);
    const auto q1 = StableParams::make(alpha, beta, 2.0, -0.5);
    const auto q2 = stable_convolve(q0, q1);
    row.conv = 0.0;
    for (double t : thetas) {
      row.conv = std::max(row.conv, std::abs(char_fn(q0, t) * char_fn(q1, t) - char_fn(q2, t)));
    }
    return row;
  });

  auto r = start_report("stable-selftest", cfg);
  r.table.columns = {"n", "alpha", "cf_sup_dev", "cf_bound", "ks_series", "ks_max", "conv_err"};
  const double bound = 3.0 * std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const auto& w = rows[i];
    const double alpha = alphas[i];
    const auto al = qlabel(alpha);
    r.table.add_row({static_cast<double>(n), alpha, w.cf_dev, bound, w.ks, 0.01, w.conv});
    r.check("cf-alpha" + al, w.cf_dev <= bound, w.cf_dev, bound, "sup over |theta| <= 5 of |empirical - exact| CF");
    if (alpha < 2.0) {
      r.check("ks-alpha" + al, w.ks <= 0.01, w.ks, 0.01, "CMS sample against the series sample");
    }
    r.check("conv-alpha" + al, w.conv <= 1e-12, w.conv, 1e-12, "CF of the convolution parameters");
  }
  r.wall_seconds = sw.seconds();
  return r;
}

}  // namespace mwl::experiments
