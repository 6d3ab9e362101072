#include "mwl/experiments/steplaw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "mwl/errors.hpp"

namespace mwl::experiments {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

HypothesisFlags flags_of(bool proximal, bool strong, bool total, bool sl, bool control = false) {
  HypothesisFlags f;
  f.proximal = proximal;
  f.strongly_irreducible = strong;
  f.totally_irreducible = total;
  f.in_sl = sl;
  f.control = control;
  return f;
}

StepLawSpec finite(std::string name, std::size_t d, std::vector<std::vector<double>> mats, std::vector<double> w,
                   HypothesisFlags flags) {
  StepLawSpec s;
  s.kind = StepKind::FiniteSupport;
  s.name = std::move(name);
  s.d = d;
  s.flags = flags;
  for (auto& m : mats) s.support.push_back(Matrix::real(d, std::move(m)));
  s.weights = std::move(w);
  return s;
}

bool is_diagonal(const Matrix& g) {
  for (std::size_t i = 0; i < g.dim(); ++i) {
    for (std::size_t j = 0; j < g.dim(); ++j) {
      if (i != j && g.real_at(i, j) != 0.0) return false;
    }
  }
  return true;
}

Matrix rotation_product(std::size_t d, double angle) {
  Matrix r = Matrix::identity(FieldSpec::real(), d);
  for (std::size_t i = 0; i + 1 < d; ++i) r = r * Matrix::rotation(d, i, i + 1, angle);
  return r;
}

}  // namespace

HypothesisFlags HypothesisFlags::parse(const std::string& list) {
  HypothesisFlags f;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    if (tok == "proximal") {
      f.proximal = true;
    } else if (tok == "strongly_irreducible") {
      f.strongly_irreducible = true;
    } else if (tok == "totally_irreducible") {
      f.totally_irreducible = true;
    } else if (tok == "sl") {
      f.in_sl = true;
    } else if (tok == "control") {
      f.control = true;
    } else {
      throw UsageError(fmt::format("unknown hypothesis flag '{}'", tok));
    }
  }
  return f;
}

std::string HypothesisFlags::to_string() const {
  std::vector<std::string> v;
  if (proximal) v.emplace_back("proximal");
  if (strongly_irreducible) v.emplace_back("strongly_irreducible");
  if (totally_irreducible) v.emplace_back("totally_irreducible");
  if (in_sl) v.emplace_back("sl");
  if (control) v.emplace_back("control");
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string kind_name(StepKind k) {
  switch (k) {
    case StepKind::FiniteSupport: return "finite";
    case StepKind::RotHeavyDiag: return "rot-heavy-diag";
    case StepKind::PadicHaarBall: return "padic-haar";
    case StepKind::Custom: return "custom";
  }
  return "?";
}

void StepLawSpec::validate() const {
  if (d < 2) throw UsageError("step laws need d >= 2");
  switch (kind) {
    case StepKind::FiniteSupport:
    case StepKind::Custom: {
      if (support.empty()) throw UsageError("finite support is empty");
      if (support.size() != weights.size()) {
        throw UsageError(fmt::format("{} matrices but {} weights", support.size(), weights.size()));
      }
      double total = 0.0;
      for (double w : weights) {
        if (!(w > 0.0)) throw UsageError("support weights must be positive");
        total += w;
      }
      if (std::fabs(total - 1.0) > 1e-12) throw UsageError(fmt::format("weights sum to {:.17g}, not 1", total));
      for (const auto& g : support) {
        if (g.dim() != d || !(g.field() == field)) throw UsageError("support matrices differ in field or dimension");
        if (determinant(g).is_zero()) throw UsageError("support matrices must be invertible");
      }
      break;
    }
    case StepKind::RotHeavyDiag:
      if (!field.is_real()) throw UsageError("rot-heavy-diag is a real law");
      if (!(alpha > 0.0) || !std::isfinite(alpha)) throw UsageError("tail index must be positive");
      if (!(scale > 0.0) || !std::isfinite(scale)) throw UsageError("scale must be positive");
      if (!std::isfinite(angle)) throw UsageError("angle must be finite");
      break;
    case StepKind::PadicHaarBall:
      if (!field.is_padic()) throw UsageError("padic-haar needs a p-adic field");
      if (digits < 2 || digits > 30) throw UsageError("digits must lie in [2, 30]");
      break;
  }
}

std::vector<std::string> StepLawSpec::builtin_names() {
  return {"sl2-pair", "sl3-triple", "diag-det", "diag-det-3", "commuting", "rhd15", "rhd15-3", "padic-haar"};
}

StepLawSpec StepLawSpec::builtin(const std::string& name) {
  // Flags: sl2-pair contains a hyperbolic element and an elliptic element of
  // order 6 that does not permute its two eigenlines, so the group is
  // non-elementary. (A quarter turn would conjugate A to A^-1 and keep the
  // pair of eigenlines invariant.)
  // sl3-triple mixes two hyperbolic blocks with the cyclic permutation.
  if (name == "sl2-pair") {
    return finite(name, 2, {{2, 1, 1, 1}, {0, -1, 1, 1}}, {0.5, 0.5}, flags_of(true, true, true, true));
  }
  if (name == "sl3-triple") {
    return finite(name, 3, {{2, 1, 0, 1, 1, 0, 0, 0, 1}, {1, 0, 0, 0, 2, 1, 0, 1, 1}, {0, 0, 1, 1, 0, 0, 0, 1, 0}},
                  {1.0 / 3, 1.0 / 3, 1.0 / 3}, flags_of(true, true, true, true));
  }
  if (name == "diag-det") return finite(name, 2, {{2, 0, 0, 0.5}}, {1.0}, flags_of(true, false, false, true, true));
  if (name == "diag-det-3") {
    return finite(name, 3, {{2, 0, 0, 0, 1, 0, 0, 0, 0.5}}, {1.0}, flags_of(true, false, false, true, true));
  }
  if (name == "commuting") {
    auto s = rot_heavy_diag(2, 1.5, 1.0, 0.0, flags_of(true, false, false, true, true));
    s.name = name;
    return s;
  }
  if (name == "rhd15" || name == "rhd15-3") {
    auto s = rot_heavy_diag(name == "rhd15" ? 2 : 3, 1.5, 1.0, 1.0, flags_of(true, true, true, true));
    s.name = name;
    return s;
  }
  if (name == "padic-haar") {
    auto s = padic_haar_ball(3, 2, 6, flags_of(true, true, false, false));
    s.name = name;
    return s;
  }
  throw UsageError(fmt::format("unknown zoo entry '{}'", name));
}

StepLawSpec StepLawSpec::custom(const std::string& path, std::vector<double> weights, HypothesisFlags flags) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open step law file '{}'", path));
  StepLawSpec s;
  s.kind = StepKind::Custom;
  s.name = "custom";
  s.file = path;
  s.support = read_matrices(in);
  if (s.support.empty()) throw UsageError(fmt::format("no matrices in '{}'", path));
  s.field = s.support.front().field();
  s.d = s.support.front().dim();
  s.weights = std::move(weights);
  s.flags = flags;
  return s;
}

StepLawSpec StepLawSpec::rot_heavy_diag(std::size_t d, double alpha, double scale, double angle, HypothesisFlags flags) {
  StepLawSpec s;
  s.kind = StepKind::RotHeavyDiag;
  s.name = "rot-heavy-diag";
  s.d = d;
  s.alpha = alpha;
  s.scale = scale;
  s.angle = angle;
  s.flags = flags;
  return s;
}

StepLawSpec StepLawSpec::padic_haar_ball(std::uint64_t p, std::size_t d, unsigned digits, HypothesisFlags flags) {
  StepLawSpec s;
  s.kind = StepKind::PadicHaarBall;
  s.name = "padic-haar";
  s.field = FieldSpec::padic(p);
  s.d = d;
  s.digits = digits;
  s.flags = flags;
  return s;
}

StepSampler::StepSampler(StepLawSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const std::size_t d = spec_.d;
  for (std::size_t k = 1; k < d; ++k) subsets_.push_back(k_subsets_colex(d, k));
  if (spec_.kind == StepKind::RotHeavyDiag) {
    const Matrix r = rotation_product(d, spec_.angle);
    for (std::size_t k = 1; k < d; ++k) {
      const Matrix w = exterior_power(r, k);
      rot_wedges_.emplace_back(w.real_data().begin(), w.real_data().end());
    }
    for (std::size_t i = 0; i < d; ++i) {
      coeffs_.push_back(static_cast<double>(static_cast<long>(d) - 1 - 2 * static_cast<long>(i)) /
                        static_cast<double>(d - 1));
    }
  } else if (spec_.kind == StepKind::FiniteSupport || spec_.kind == StepKind::Custom) {
    for (const auto& g : spec_.support) {
      if (g.field().is_padic()) {
        support_steps_.push_back(Step::from_padic(g));
      } else if (is_diagonal(g)) {
        std::vector<double> e(d), sg(d);
        for (std::size_t i = 0; i < d; ++i) {
          e[i] = std::log(std::fabs(g.real_at(i, i)));
          sg[i] = g.real_at(i, i) < 0 ? -1.0 : 1.0;
        }
        Step s = diagonal_step(e, sg);
        s.exact = g;
        support_steps_.push_back(std::move(s));
      } else {
        support_steps_.push_back(Step::from_real(g));
      }
    }
  }
}

bool StepSampler::deterministic() const {
  return (spec_.kind == StepKind::FiniteSupport || spec_.kind == StepKind::Custom) && spec_.support.size() == 1;
}

// ∧^k(R·D) = ∧^k R · ∧^k D with ∧^k D = diag(exp(Σ_{i∈I} e_i)); each power is
// stored with log_scale equal to the largest subset sum.
Step StepSampler::diagonal_step(const std::vector<double>& exponents, const std::vector<double>& signs) const {
  const std::size_t d = spec_.d;
  Step s;
  s.field = FieldSpec::real();
  s.d = d;
  for (std::size_t k = 1; k < d; ++k) {
    const auto& subs = subsets_[k - 1];
    const std::size_t wd = subs.size();
    std::vector<double> sum(wd), sg(wd, 1.0);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < wd; ++b) {
      double acc = 0.0;
      for (std::size_t i : subs[b]) {
        acc += exponents[i];
        sg[b] *= signs[i];
      }
      sum[b] = acc;
      top = std::max(top, acc);
    }
    std::vector<double> m(wd * wd, 0.0);
    for (std::size_t b = 0; b < wd; ++b) {
      const double col = sg[b] * std::exp(sum[b] - top);
      if (rot_wedges_.empty()) {
        m[b * wd + b] = col;
      } else {
        for (std::size_t a = 0; a < wd; ++a) m[a * wd + b] = rot_wedges_[k - 1][a * wd + b] * col;
      }
    }
    s.wedges.push_back(ScaledMatrix::normalize(top, wd, std::move(m)));
  }
  s.cartan.kappas = exponents;
  std::sort(s.cartan.kappas.begin(), s.cartan.kappas.end(), std::greater<>());
  s.log_abs_det = std::accumulate(exponents.begin(), exponents.end(), 0.0);
  return s;
}

Step StepSampler::heavy_step(double x) const {
  std::vector<double> e(spec_.d);
  for (std::size_t i = 0; i < spec_.d; ++i) e[i] = x * coeffs_[i];
  return diagonal_step(e, std::vector<double>(spec_.d, 1.0));
}

Step StepSampler::haar_step(Rng& rng) const {
  const std::uint64_t p = spec_.field.prime();
  std::uint64_t span = 1;
  for (unsigned i = 1; i < spec_.digits; ++i) span *= p;
  const std::size_t d = spec_.d;
  for (;;) {
    std::vector<Rational> e(d * d);
    for (std::size_t i = 0; i < d * d; ++i) {
      mpz_class u(static_cast<unsigned long>(rng.index(span)));
      e[i] = Rational(u * static_cast<unsigned long>(p));
    }
    e[0] += 1;
    Matrix g = Matrix::padic(p, d, std::move(e));
    if (!determinant(g).is_zero()) return Step::from_padic(g);
  }
}

Step StepSampler::draw(Rng& rng) const {
  switch (spec_.kind) {
    case StepKind::RotHeavyDiag: return heavy_step(spec_.scale * rng.pareto(spec_.alpha));
    case StepKind::PadicHaarBall: return haar_step(rng);
    case StepKind::FiniteSupport:
    case StepKind::Custom:
      if (support_steps_.size() == 1) return support_steps_.front();
      return support_steps_[rng.discrete(spec_.weights)];
  }
  throw UsageError("unknown step kind");
}

std::vector<Step> StepSampler::walk(Rng& rng, std::size_t length) const {
  std::vector<Step> out;
  out.reserve(length);
  for (std::size_t k = 0; k < length; ++k) out.push_back(draw(rng));
  return out;
}

std::optional<double> StepSampler::mean_kappa() const {
  switch (spec_.kind) {
    case StepKind::RotHeavyDiag:
      if (spec_.alpha <= 1.0) return std::nullopt;
      return spec_.scale * spec_.alpha / (spec_.alpha - 1.0);
    case StepKind::PadicHaarBall:
      // The (0,0) entry is a unit and every other entry lies in pZ_p.
      return 0.0;
    case StepKind::FiniteSupport:
    case StepKind::Custom: {
      double m = 0.0;
      for (std::size_t i = 0; i < support_steps_.size(); ++i) m += spec_.weights[i] * support_steps_[i].kappa();
      return m;
    }
  }
  return std::nullopt;
}

bool StepSampler::kappa_square_integrable() const {
  return spec_.kind != StepKind::RotHeavyDiag || spec_.alpha > 2.0;
}

std::optional<TailLaw> StepSampler::kappa_tail() const {
  if (spec_.kind != StepKind::RotHeavyDiag) return std::nullopt;
  TailLaw law;
  law.alpha = std::min(spec_.alpha, 2.0);
  law.tail_constant = std::pow(spec_.scale, spec_.alpha);
  law.beta = 1.0;
  if (spec_.alpha > 1.0) law.mean = spec_.scale * spec_.alpha / (spec_.alpha - 1.0);
  const double s = spec_.scale;
  law.truncated_mean = [s](double a) { return a <= s ? 0.0 : s * std::log(a / s); };
  return law;
}

}  // namespace mwl::experiments
