#include "mwl/experiments/config.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "mwl/errors.hpp"

namespace mwl::experiments {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"steplaw", {"entry", "kind", "d", "alpha", "scale", "angle", "p", "digits", "file", "weights", "flags"}},
      {"grid", {"n_min", "n_max", "replicas", "walks", "seed"}},
      {"stats",
       {"q", "oracle_size", "hill_fraction", "tail_points", "tail_kmax", "triples", "max_gap", "bootstrap",
        "holdout_min", "wlln_ratio_max", "rate_tol", "w2_max", "median_max", "cov_tol", "selftest_alpha",
        "selftest_n", "selftest_terms", "tables", "table_n_max", "out_dir"}},
  };
  return k;
}

// Keys of [steplaw] that each kind accepts besides "kind".
const std::map<std::string, std::set<std::string>>& kind_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"rot-heavy-diag", {"d", "alpha", "scale", "angle", "flags"}},
      {"padic-haar", {"p", "d", "digits", "flags"}},
      {"custom", {"file", "weights", "flags"}},
  };
  return k;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw UsageError(fmt::format("{}: '{}' is not a number", key, v));
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) {
    throw UsageError(fmt::format("{}: '{}' is not a non-negative integer", key, v));
  }
  return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t");
    const auto e = tok.find_last_not_of(" \t");
    if (b == std::string::npos) throw UsageError(fmt::format("{}: empty list element", key));
    out.push_back(to_double(key, tok.substr(b, e - b + 1)));
  }
  if (out.empty()) throw UsageError(fmt::format("{}: empty list", key));
  return out;
}

std::string file_sha(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

std::vector<std::size_t> ExperimentConfig::n_grid() const {
  std::vector<std::size_t> g;
  for (std::size_t n = n_min; n <= n_max; n *= 2) g.push_back(n);
  return g;
}

ExperimentConfig ExperimentConfig::defaults() {
  std::istringstream empty;
  return parse(empty);
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open config '{}'", path.string()));
  return parse(in, path.parent_path());
}

ExperimentConfig ExperimentConfig::parse(std::istream& is, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError(fmt::format("config: {}", e.what()));
  }

  std::map<std::string, std::map<std::string, std::string>> kv;
  for (const auto& [section, body] : tree) {
    const auto it = allowed_keys().find(section);
    if (!body.data().empty()) throw UsageError(fmt::format("config: key '{}' outside a section", section));
    if (it == allowed_keys().end()) throw UsageError(fmt::format("config: unknown section [{}]", section));
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw UsageError(fmt::format("config: unknown key '{}' in [{}]", key, section));
      kv[section][key] = value.get_value<std::string>();
    }
  }

  ExperimentConfig c;
  auto& sl = kv["steplaw"];
  auto get = [&](std::map<std::string, std::string>& sec, const std::string& key) -> const std::string* {
    const auto it = sec.find(key);
    return it == sec.end() ? nullptr : &it->second;
  };

  if (sl.empty()) {
    c.steplaw = StepLawSpec::builtin("sl2-pair");
    c.canonical_["steplaw.entry"] = "sl2-pair";
  } else if (const auto* entry = get(sl, "entry")) {
    if (sl.size() != 1) throw UsageError("config: [steplaw] entry cannot be combined with other keys");
    c.steplaw = StepLawSpec::builtin(*entry);
  } else {
    const auto* kind = get(sl, "kind");
    if (!kind) throw UsageError("config: [steplaw] needs 'entry' or 'kind'");
    const auto kk = kind_keys().find(*kind);
    if (kk == kind_keys().end()) throw UsageError(fmt::format("config: unknown step-law kind '{}'", *kind));
    for (const auto& [key, value] : sl) {
      if (key != "kind" && !kk->second.count(key)) {
        throw UsageError(fmt::format("config: key '{}' does not apply to kind {}", key, *kind));
      }
    }
    const auto* flags = get(sl, "flags");
    if (!flags) throw UsageError("config: custom step laws must declare 'flags'");
    const auto hf = HypothesisFlags::parse(*flags);
    auto num = [&](const std::string& key, double dflt) {
      const auto* v = get(sl, key);
      return v ? to_double("steplaw." + key, *v) : dflt;
    };
    auto uint = [&](const std::string& key, std::uint64_t dflt) {
      const auto* v = get(sl, key);
      return v ? to_u64("steplaw." + key, *v) : dflt;
    };
    if (*kind == "rot-heavy-diag") {
      c.steplaw = StepLawSpec::rot_heavy_diag(uint("d", 2), num("alpha", 1.5), num("scale", 1.0), num("angle", 1.0), hf);
    } else if (*kind == "padic-haar") {
      c.steplaw = StepLawSpec::padic_haar_ball(uint("p", 3), uint("d", 2), static_cast<unsigned>(uint("digits", 6)), hf);
    } else {
      const auto* file = get(sl, "file");
      const auto* weights = get(sl, "weights");
      if (!file || !weights) throw UsageError("config: kind custom needs 'file' and 'weights'");
      std::filesystem::path fp(*file);
      if (fp.is_relative()) fp = base_dir / fp;
      c.steplaw = StepLawSpec::custom(fp.string(), to_list("steplaw.weights", *weights), hf);
      c.canonical_["steplaw.file_sha256"] = file_sha(fp.string());
    }
  }
  c.steplaw.validate();
  for (const auto& [key, value] : sl) {
    if (key != "file") c.canonical_["steplaw." + key] = value;
  }

  auto& gr = kv["grid"];
  auto gu = [&](const std::string& key, std::uint64_t dflt) {
    const auto* v = get(gr, key);
    return v ? to_u64("grid." + key, *v) : dflt;
  };
  c.n_min = gu("n_min", c.n_min);
  c.n_max = gu("n_max", c.n_max);
  c.replicas = gu("replicas", c.replicas);
  c.walks = gu("walks", c.walks);
  c.seed = gu("seed", c.seed);
  if (!std::has_single_bit(c.n_min) || !std::has_single_bit(c.n_max) || c.n_min > c.n_max) {
    throw UsageError("config: n_min and n_max must be powers of two with n_min <= n_max");
  }
  if (c.n_max > 4096) throw UsageError("config: n_max is capped at 2^12");
  if (c.replicas == 0 || c.walks == 0) throw UsageError("config: replicas and walks must be positive");
  c.canonical_["grid.n_min"] = std::to_string(c.n_min);
  c.canonical_["grid.n_max"] = std::to_string(c.n_max);
  c.canonical_["grid.walks"] = std::to_string(c.walks);
  c.set_replicas(c.replicas);

  auto& st = kv["stats"];
  auto& s = c.stats;
  for (const auto& [key, v] : st) {
    const std::string k = "stats." + key;
    if (key == "q") {
      s.q = to_list(k, v);
      for (double q : s.q) {
        if (!(q > 0.0 && q <= 2.0)) throw UsageError("config: q exponents must lie in (0, 2]");
      }
    } else if (key == "selftest_alpha") {
      s.selftest_alpha = to_list(k, v);
    } else if (key == "out_dir") {
      c.out_dir = v;
    } else if (key == "hill_fraction" || key == "holdout_min" || key == "wlln_ratio_max" || key == "rate_tol" ||
               key == "w2_max" || key == "median_max" || key == "cov_tol") {
      const double x = to_double(k, v);
      if (!(x > 0.0)) throw UsageError(fmt::format("config: {} must be positive", k));
      if (key == "hill_fraction") s.hill_fraction = x;
      if (key == "holdout_min") s.holdout_min = x;
      if (key == "wlln_ratio_max") s.wlln_ratio_max = x;
      if (key == "rate_tol") s.rate_tol = x;
      if (key == "w2_max") s.w2_max = x;
      if (key == "median_max") s.median_max = x;
      if (key == "cov_tol") s.cov_tol = x;
    } else {
      const std::size_t x = to_u64(k, v);
      if (x == 0) throw UsageError(fmt::format("config: {} must be positive", k));
      if (key == "oracle_size") s.oracle_size = x;
      if (key == "tail_points") s.tail_points = x;
      if (key == "tail_kmax") s.tail_kmax = x;
      if (key == "triples") s.triples = x;
      if (key == "max_gap") s.max_gap = x;
      if (key == "bootstrap") s.bootstrap = x;
      if (key == "selftest_n") s.selftest_n = x;
      if (key == "selftest_terms") s.selftest_terms = x;
      if (key == "tables") s.tables = x;
      if (key == "table_n_max") s.table_n_max = x;
    }
    if (key != "out_dir") c.canonical_[k] = v;
  }
  if (s.hill_fraction >= 1.0) throw UsageError("config: hill_fraction must be below 1");
  return c;
}

void ExperimentConfig::set_seed(std::uint64_t s) { seed = s; }

void ExperimentConfig::set_replicas(std::size_t r) {
  if (r == 0) throw UsageError("replicas must be positive");
  replicas = r;
  canonical_["grid.replicas"] = std::to_string(r);
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : canonical_) out += k + "=" + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical_text()); }

}  // namespace mwl::experiments
