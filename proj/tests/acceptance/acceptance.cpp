// Acceptance gate: one PASS/FAIL line per criterion. The exit status is
// nonzero when a criterion fails that is not listed in kBlocked; blocked
// criteria still run in full and print their FAIL line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "generators.hpp"
#include "mwl/experiments/config.hpp"
#include "mwl/experiments/report.hpp"
#include "mwl/experiments/runners.hpp"
#include "mwl/experiments/steplaw.hpp"
#include "mwl/matrix.hpp"
#include "mwl/stats.hpp"
#include "mwl/walk.hpp"
#include "mwl/word.hpp"

namespace fs = std::filesystem;
using namespace mwl;
using namespace mwl::experiments;

namespace {

// Criteria that cannot pass as stated; see the decisions ledger.
const std::set<int> kBlocked{11};

struct Outcome {
  bool pass = true;
  std::string detail;
};

fs::path zoo(const std::string& name) { return fs::path(MWL_ZOO_DIR) / (name + ".cfg"); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string failed_criteria(const RunReport& r) {
  std::string s;
  for (const auto& c : r.criteria) {
    if (!c.pass) s += (s.empty() ? "" : ", ") + c.name + fmt::format("={:.4g}", c.value);
  }
  return s;
}

// 1. Dichotomy reconstruction on random tables.
Outcome criterion1() {
  auto cfg = ExperimentConfig::defaults();
  cfg.stats.tables = 200;
  cfg.stats.table_n_max = 1024;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_dichotomy_verify(cfg);
  const double secs = seconds_since(t0);
  const auto& i = r.criterion("integer-exact");
  const auto& re = r.criterion("real-relative");
  Outcome o;
  o.pass = i.pass && re.pass && secs <= 60.0;
  o.detail = fmt::format("200 tables, n_max 1024: integer mismatches {}, real max rel err {:.3g}, {:.1f} s", i.value,
                         re.value, secs);
  return o;
}

// 2. Cancellation bound on random SL2(R) and Q_p pairs.
Outcome criterion2() {
  Rng rng(202);
  std::size_t bad_sign = 0, bad_min = 0;
  double slack = std::numeric_limits<double>::infinity();
  auto check = [&](const Matrix& g, const Matrix& h) {
    const double d = delta_kappa_pair(g, h);
    const double m = std::min(big_n(g), big_n(h));
    if (d > 1e-9) ++bad_sign;
    if (std::fabs(d) > m + 1e-9) ++bad_min;
    slack = std::min({slack, -d, m - std::fabs(d)});
  };
  for (int i = 0; i < 100000; ++i) check(gen::random_sl_matrix(rng, 2), gen::random_sl_matrix(rng, 2));
  for (int i = 0; i < 10000; ++i) check(gen::random_padic_matrix(rng, 3, 2), gen::random_padic_matrix(rng, 3, 2));
  return {bad_sign == 0 && bad_min == 0,
          fmt::format("1e5 SL2(R) + 1e4 Q_3 pairs: {} with delta > 0, {} with |delta| > min N, smallest slack {:.3g}",
                      bad_sign, bad_min, slack)};
}

// 3. 0 <= κ <= N <= dκ in SL.
Outcome criterion3() {
  Rng rng(303);
  std::size_t bad = 0;
  for (std::size_t d : {2, 3}) {
    for (int i = 0; i < 50000; ++i) {
      const Matrix g = gen::random_sl_matrix(rng, d);
      // |det| = 1 only up to rounding; the chain is checked with 1e-9 slack.
      const double k = kappa(g), n = big_n(g);
      if (!(k >= -1e-9 && k <= n + 1e-9 && n <= static_cast<double>(d) * k + 1e-9)) ++bad;
    }
  }
  return {bad == 0, fmt::format("1e5 SL samples (d = 2, 3): {} chain violations", bad)};
}

// 4. Cartan vector by SVD vs exterior norms; p-adic Σκ_i = log|det|_p.
Outcome criterion4() {
  Rng rng(404);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 1 + static_cast<std::size_t>(i % 4);
    const Matrix g = gen::random_real_matrix(rng, d);
    const auto a = cartan(g), b = cartan_via_exterior(g);
    for (std::size_t k = 0; k < d; ++k) worst = std::max(worst, std::fabs(a[k] - b[k]));
  }
  std::size_t padic_bad = 0;
  for (int i = 0; i < 2000; ++i) {
    const std::size_t d = 2 + static_cast<std::size_t>(i % 3);
    const Matrix g = gen::random_padic_matrix(rng, 5, d);
    const auto e = padic_elementary_valuations(g);
    long sum = 0;
    for (long v : e) sum += v;
    if (sum != valuation(determinant(g).rational(), 5).value()) ++padic_bad;
  }
  return {worst <= 1e-8 && padic_bad == 0,
          fmt::format("1e4 real matrices d <= 4: max |svd - exterior| {:.3g}; 2000 Q_5 matrices: {} valuation "
                      "mismatches",
                      worst, padic_bad)};
}

// 5. |Δκ(γ̃_{a,b})| <= R on random SL2 windows.
Outcome criterion5() {
  Rng rng(505);
  std::size_t bad = 0, bad_oracle = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t len = 2 + rng.index(11);
    std::vector<Matrix> letters;
    for (std::size_t k = 0; k < len; ++k) letters.push_back(gen::random_sl_matrix(rng, 2));
    const Word w(letters);
    const auto c = window_cancellation(w, 0, len);
    if (!c.bound_ok) ++bad;
    // Independent evaluation: Σ N − max N against κ of the literal product.
    double sum_n = 0.0, max_n = 0.0, sum_k = 0.0;
    for (const auto& g : letters) {
      const double n = big_n(g);
      sum_n += n;
      max_n = std::max(max_n, n);
      sum_k += kappa(g);
    }
    if (std::fabs(kappa(product(w, 0, len)) - sum_k) > sum_n - max_n + 1e-9) ++bad_oracle;
  }
  return {bad == 0 && bad_oracle == 0,
          fmt::format("1e4 windows of length 2..12: {} violations, {} by the direct oracle", bad, bad_oracle)};
}

// 6. The p-adic Haar ball example.
Outcome criterion6() {
  const auto spec = StepLawSpec::builtin("padic-haar");
  const StepSampler sampler(spec);
  Rng rng(606);
  std::size_t pair_bad = 0, walk_bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const Step a = sampler.draw(rng), b = sampler.draw(rng);
    if (delta_kappa_pair(*a.exact, *b.exact) != 0.0) ++pair_bad;
  }
  for (int i = 0; i < 20; ++i) {
    const WalkBuffer wb(sampler.walk(rng, 64));
    for (std::size_t n = 1; n <= 64; ++n) {
      if (wb.delta_kappa(0, n) != 0.0) ++walk_bad;
    }
  }
  return {pair_bad == 0 && walk_bad == 0,
          fmt::format("1e4 pairs: {} nonzero; 20 walks, every n <= 64: {} nonzero", pair_bad, walk_bad)};
}

// 7. Stable self-test at full size.
Outcome criterion7() {
  auto cfg = ExperimentConfig::defaults();
  cfg.stats.selftest_n = 100000;
  cfg.stats.selftest_terms = 10000;
  const auto r = run_stable_selftest(cfg);
  std::string worst;
  for (const auto& c : r.criteria) worst += fmt::format("{}={:.3g}/{:.3g} ", c.name, c.value, c.threshold);
  return {r.passed(), worst};
}

// 8. Gap law of the geometric renewal grid.
Outcome criterion8() {
  constexpr double rho = 0.5;
  constexpr std::size_t seqs = 2000, n_max = 10000, t_max = 20;
  Rng rng(808);
  std::vector<std::vector<std::size_t>> hits(n_max + 1, std::vector<std::size_t>(t_max + 1, 0));
  std::size_t oracle_mismatch = 0;
  for (std::size_t s = 0; s < seqs; ++s) {
    std::vector<std::uint64_t> p;
    std::uint64_t total = 0;
    while (total <= n_max) {
      std::uint64_t v = 1;
      while (rng.uniform() >= rho) ++v;
      p.push_back(v);
      total += v;
    }
    // Pointer walk over the prefix sums as an independent oracle.
    std::size_t l = 0;
    std::uint64_t lo = 0;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
      while (lo + p[l] <= n) lo += p[l++];
      const std::uint64_t gap = lo == n ? 0 : p[l];
      // grid_gap scans linearly, so it is cross-checked on a sparse subset.
      if (n % 97 == s % 97 && grid_gap(p, n).gap != gap) ++oracle_mismatch;
      if (gap <= t_max) ++hits[n][gap];
    }
  }
  std::size_t violations = 0;
  double worst = -1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t t = 1; t <= t_max; ++t) {
      const double ph = static_cast<double>(hits[n][t]) / seqs;
      const double se = std::sqrt(ph * (1.0 - ph) / seqs);
      const double bound = static_cast<double>(t) * rho * std::pow(1.0 - rho, static_cast<double>(t) - 1.0);
      worst = std::max(worst, ph - bound - 3.0 * se);
      if (ph > bound + 3.0 * se) ++violations;
    }
  }
  return {violations == 0 && oracle_mismatch == 0,
          fmt::format("2000 geometric(1/2) sequences, n <= 1e4, t <= 20: {} violations (max excess {:.3g}), {} "
                      "grid_gap/oracle mismatches",
                      violations, worst, oracle_mismatch)};
}

nlohmann::json load_fixture(const std::string& name) {
  const auto p = fs::path(MWL_FIXTURE_DIR) / "pilot" / name;
  std::ifstream is(p);
  if (!is) throw std::runtime_error("missing fixture " + p.string());
  return nlohmann::json::parse(is);
}

// 9. Moment gain of the pair defect (pilot fixture CI, plus a fresh run).
Outcome criterion9() {
  const auto fx = load_fixture("delta-tail-rhd15.json");
  const double lo = fx["estimates"]["margin_lo"]["value"].get<double>();
  const double hi = fx["estimates"]["margin_hi"]["value"].get<double>();
  auto cfg = ExperimentConfig::load(zoo("rhd15"));
  cfg.set_seed(0);
  cfg.set_replicas(64);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_delta_tail(cfg);
  const double secs = seconds_since(t0);
  const bool same = r.estimate("margin_lo").value == lo && r.estimate("margin_hi").value == hi;
  return {lo > 0.0 && same && secs <= 600.0,
          fmt::format("hill(delta) - hill(kappa) = {:.3f}, 95% CI [{:.3f}, {:.3f}] (fixture); rerun reproduces: {}; "
                      "{:.1f} s",
                      r.estimate("margin").value, lo, hi, same ? "yes" : "no", secs)};
}

// 10. Curves at n up to 2^12, R = 64, seed 0.
Outcome criterion10() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"wlln", "sl2-pair"},         {"wlln", "rhd15"},     {"clt", "sl2-pair"},  {"gclt", "rhd15"},
      {"higher", "sl3-triple"},     {"aa-bounds", "sl2-pair-aa"}, {"wlln", "diag-det"},  {"clt", "diag-det"},
      {"gclt", "commuting"},        {"higher", "diag-det-3"}};
  Outcome o;
  double total = 0.0;
  std::string fails;
  for (const auto& [runner, config] : runs) {
    auto cfg = ExperimentConfig::load(zoo(config));
    cfg.set_seed(0);
    cfg.set_replicas(64);
    const auto r = run(runner, cfg);
    total += r.wall_seconds;
    const bool noted = r.to_json()["note"] == kScopeNote;
    if (!r.passed() || !noted || r.table.rows.size() != cfg.n_grid().size()) {
      o.pass = false;
      fails += fmt::format(" {}/{}: {}", runner, config, failed_criteria(r));
    }
  }
  o.pass = o.pass && total <= 1800.0;
  o.detail = fmt::format("{} runs, {:.0f} s total{}{}", runs.size(), total, fails.empty() ? "" : "; failing:", fails);
  return o;
}

// 11a. ‖x+y‖^q <= ‖x‖^q + ‖y‖^q + q‖y‖^{q−2}⟨y,x⟩, q ∈ (1, 2].
std::size_t suite_qge1(Rng& rng, std::size_t count) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double q = 1.0 + (1.0 - rng.uniform());
    double nx = 0.0, ny = 0.0, ns = 0.0, dot = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double x = rng.normal(), y = rng.normal();
      nx += x * x;
      ny += y * y;
      ns += (x + y) * (x + y);
      dot += x * y;
    }
    nx = std::sqrt(nx);
    ny = std::sqrt(ny);
    ns = std::sqrt(ns);
    const double lhs = std::pow(ns, q);
    const double rhs = std::pow(nx, q) + std::pow(ny, q) + q * std::pow(ny, q - 2.0) * dot;
    if (lhs > rhs + 1e-12 * (1.0 + std::fabs(rhs))) ++bad;
  }
  return bad;
}

// 11b. ‖x+y‖^q <= ‖x‖^q + ‖y‖^q, q ∈ (0, 1].
std::size_t suite_qle1(Rng& rng, std::size_t count) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double q = 1.0 - rng.uniform();
    double nx = 0.0, ny = 0.0, ns = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double x = rng.normal(), y = rng.normal();
      nx += x * x;
      ny += y * y;
      ns += (x + y) * (x + y);
    }
    const double lhs = std::pow(std::sqrt(ns), q);
    const double rhs = std::pow(std::sqrt(nx), q) + std::pow(std::sqrt(ny), q);
    if (lhs > rhs + 1e-12 * (1.0 + rhs)) ++bad;
  }
  return bad;
}

struct Discrete {
  std::vector<double> x, w;
};

Discrete random_discrete(Rng& rng) {
  Discrete d;
  const std::size_t k = 2 + rng.index(4);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    d.x.push_back(rng.normal() * std::exp(2.0 * rng.uniform()));
    d.w.push_back(rng.uniform_open());
    total += d.w.back();
  }
  for (double& w : d.w) w /= total;
  return d;
}

double exact_var_q(const std::vector<double>& x, const std::vector<double>& w, double q) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m += w[i] * x[i];
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) v += w[i] * std::pow(std::fabs(x[i] - m), q);
  return v;
}

// 11c. Var_q(A + B) <= Var_q(A) + Var_q(B) for independent A, B, q ∈ [1, 2],
// evaluated exactly on random finitely supported laws.
std::size_t suite_var_q(Rng& rng, std::size_t count, double& worst_ratio) {
  std::size_t bad = 0;
  worst_ratio = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double q = 1.0 + rng.uniform();
    const auto a = random_discrete(rng), b = random_discrete(rng);
    std::vector<double> sx, sw;
    for (std::size_t u = 0; u < a.x.size(); ++u) {
      for (std::size_t v = 0; v < b.x.size(); ++v) {
        sx.push_back(a.x[u] + b.x[v]);
        sw.push_back(a.w[u] * b.w[v]);
      }
    }
    const double lhs = exact_var_q(sx, sw, q);
    const double rhs = exact_var_q(a.x, a.w, q) + exact_var_q(b.x, b.w, q);
    worst_ratio = std::max(worst_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-12)) ++bad;
  }
  return bad;
}

std::vector<double> mat_mul(const std::vector<double>& a, const std::vector<double>& b, std::size_t d) {
  std::vector<double> c(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t j = 0; j < d; ++j) c[i * d + j] += a[i * d + k] * b[k * d + j];
    }
  }
  return c;
}

std::vector<double> mat_t(const std::vector<double>& a, std::size_t d) {
  std::vector<double> t(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) t[j * d + i] = a[i * d + j];
  }
  return t;
}

// 11d. ‖√Cov(x+y) − √Cov(x)‖_F <= √Var(y) with y = M x + C z (dependent,
// population covariances in closed form), d ∈ {1, 2, 3}.
std::size_t suite_cov_var(Rng& rng, std::size_t count) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t d = 1 + i % 3;
    std::vector<double> l(d * d), m(d * d), c(d * d), id(d * d, 0.0);
    for (std::size_t k = 0; k < d * d; ++k) {
      l[k] = rng.normal();
      m[k] = 0.5 * rng.normal();
      c[k] = 0.5 * rng.normal() * rng.uniform();
    }
    for (std::size_t k = 0; k < d; ++k) id[k * d + k] = 1.0;
    const auto sx = mat_mul(l, mat_t(l, d), d);  // Cov(x)
    std::vector<double> im(d * d);
    for (std::size_t k = 0; k < d * d; ++k) im[k] = id[k] + m[k];
    const auto cc = mat_mul(c, mat_t(c, d), d);
    auto s_sum = mat_mul(mat_mul(im, sx, d), mat_t(im, d), d);
    auto s_y = mat_mul(mat_mul(m, sx, d), mat_t(m, d), d);
    for (std::size_t k = 0; k < d * d; ++k) {
      s_sum[k] += cc[k];
      s_y[k] += cc[k];
    }
    double var_y = 0.0;
    for (std::size_t k = 0; k < d; ++k) var_y += s_y[k * d + k];
    const auto r1 = sqrt_psd(s_sum, d), r0 = sqrt_psd(sx, d);
    double diff = 0.0;
    for (std::size_t k = 0; k < d * d; ++k) diff += (r1[k] - r0[k]) * (r1[k] - r0[k]);
    if (std::sqrt(diff) > std::sqrt(var_y) * (1.0 + 1e-9) + 1e-12) ++bad;
  }
  return bad;
}

// 11e. ∫ q t^{q−1} P(x > t)² dt <= 2 (E x^{q/2})², for empirical laws.
std::size_t suite_integral_square(Rng& rng, std::size_t count, std::size_t& flagged) {
  std::size_t bad = 0;
  flagged = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double q = 4.0 * rng.uniform_open();
    const std::size_t n = 1 + rng.index(40);
    std::vector<double> x(n);
    const std::size_t family = i % 4;
    for (auto& v : x) {
      switch (family) {
        case 0: v = rng.exponential(); break;
        case 1: v = rng.pareto(0.5 + 2.0 * rng.uniform()); break;
        case 2: v = rng.uniform(); break;
        default: v = static_cast<double>(rng.index(3)); break;
      }
    }
    const auto r = integral_square_check(x, q);
    if (!r.ok) ++flagged;
    if (r.lhs > r.rhs * (1.0 + 1e-12)) ++bad;
  }
  return bad;
}

Outcome criterion11() {
  constexpr std::size_t count = 100000;
  Rng rng(1111);
  const std::size_t a = suite_qge1(rng, count);
  const std::size_t b = suite_qle1(rng, count);
  double ratio = 0.0;
  const std::size_t c = suite_var_q(rng, count, ratio);
  const std::size_t d = suite_cov_var(rng, count);
  std::size_t flagged = 0;
  const std::size_t e = suite_integral_square(rng, count, flagged);
  return {a + b + c + d + e == 0,
          fmt::format("hard violations per 1e5: qge1 {}, qle1 {}, var_q superadditivity {} (max ratio {:.4f}), "
                      "cov-var {}, integral-square {} ({} beyond the 5% flag)",
                      a, b, c, ratio, d, e, flagged)};
}

// 12. Byte-identical CSV for every runner, also across worker counts.
Outcome criterion12() {
  const auto base = fs::temp_directory_path() / fmt::format("mwl-accept-{}", ::getpid());
  std::vector<std::pair<std::string, std::string>> runs{
      {"lyapunov", "sl2-pair"}, {"wlln", "rhd15"},        {"clt", "sl2-pair"},
      {"gclt", "rhd15"},        {"higher", "sl3-triple"}, {"delta-tail", "rhd15"},
      {"aa-bounds", "sl2-pair-aa"}, {"dichotomy-verify", "sl2-pair"}, {"stable-selftest", "sl2-pair"}};
  std::size_t files = 0, differ = 0;
  const char* old = std::getenv("MWL_WORKERS");
  const std::string saved = old ? old : "";
  for (const auto& [runner, config] : runs) {
    auto cfg = ExperimentConfig::load(zoo(config));
    cfg.set_seed(12);
    cfg.set_replicas(4);
    cfg.walks = std::min<std::size_t>(cfg.walks, 16);
    cfg.stats.selftest_n = 5000;
    cfg.stats.selftest_terms = 500;
    cfg.stats.tables = 4;
    cfg.stats.table_n_max = 64;
    cfg.stats.bootstrap = 20;
    cfg.stats.oracle_size = 5000;
    std::vector<std::vector<fs::path>> outs;
    for (const char* workers : {"1", "1", "3"}) {
      ::setenv("MWL_WORKERS", workers, 1);
      const auto dir = base / fmt::format("{}-{}", runner, outs.size());
      outs.push_back(write_outputs(run(runner, cfg), dir));
    }
    for (std::size_t f = 0; f < outs[0].size(); ++f) {
      ++files;
      const auto ref = read_file(outs[0][f]);
      if (ref != read_file(outs[1][f]) || ref != read_file(outs[2][f])) ++differ;
    }
  }
  if (old) {
    ::setenv("MWL_WORKERS", saved.c_str(), 1);
  } else {
    ::unsetenv("MWL_WORKERS");
  }
  fs::remove_all(base);
  return {differ == 0 && files >= runs.size(),
          fmt::format("{} runners x 3 runs (workers 1, 1, 3): {} CSV files compared, {} differ", runs.size(), files,
                      differ)};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3},  {4, criterion4},   {5, criterion5},   {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11}, {12, criterion12}};
  int unexpected = 0;
  for (const auto& [k, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const bool blocked = kBlocked.count(k) > 0;
    std::cout << fmt::format("criterion {:>2}: {} | {} | {:.1f} s{}\n", k, o.pass ? "PASS" : "FAIL", o.detail,
                             seconds_since(t0), !o.pass && blocked ? " | known blocked, see ledger" : "")
              << std::flush;
    if (!o.pass && !blocked) ++unexpected;
  }
  std::cout << fmt::format("{} unexpected failure(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
