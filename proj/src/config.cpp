#include "ksv/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ksv/error.hpp"

namespace ksv {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string qualified(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

// Typed access to one document with the section/key naming used in errors.
class Reader {
 public:
  Reader(const IniDocument& doc, std::string source) : doc_(doc), source_(std::move(source)) {}

  const IniDocument::Entry* get(const std::string& section, const std::string& key) const {
    return doc_.find(section, key);
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const {
    const auto* e = doc_.find(section, key);
    std::string where = source_;
    if (e) where += ":" + std::to_string(e->line);
    throw ConfigError(qualified(section, key),
                      where + ": key '" + qualified(section, key) + "': " + what);
  }

  double real(const std::string& section, const std::string& key, double fallback) const {
    const auto* e = get(section, key);
    return e ? parse_real(section, key, e->value) : fallback;
  }

  std::uint64_t integer(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const {
    const auto* e = get(section, key);
    return e ? parse_integer(section, key, e->value) : fallback;
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) const {
    const auto* e = get(section, key);
    if (!e) return fallback;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(section, key, "expected a boolean, got '" + e->value + "'");
  }

  std::vector<double> reals(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (const auto* e = get(section, key)) {
      for (const auto& item : split_list(e->value)) out.push_back(parse_real(section, key, item));
      if (out.empty()) fail(section, key, "empty list");
    }
    return out;
  }

  double parse_real(const std::string& section, const std::string& key,
                    const std::string& text) const {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      fail(section, key, "expected a number, got '" + text + "'");
    }
    return v;
  }

  std::uint64_t parse_integer(const std::string& section, const std::string& key,
                              const std::string& text) const {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc() && ptr == last) return v;
    // Accept integral values written in scientific notation (T = 1e8).
    double d = 0.0;
    auto [dptr, dec] = std::from_chars(first, last, d);
    if (dec == std::errc() && dptr == last && d >= 0.0 && d == std::floor(d) && d < 1.8e19) {
      return static_cast<std::uint64_t>(d);
    }
    fail(section, key, "expected a non-negative integer, got '" + text + "'");
  }

 private:
  const IniDocument& doc_;
  std::string source_;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"", {"out_dir", "seeds", "T", "rounds", "max_enum_arms", "max_enum_budget"}},
      {"algo",
       {"algo", "K", "R", "L", "delta1", "delta2", "reuse_prefix", "radius_scale",
        "etcg_explore"}},
      {"env",
       {"env", "M", "means", "noise_stds", "noise_sigma", "lambda", "graph_path", "activation_p",
        "pistar_sims", "pistar_samples", "pistar_seed"}},
  };
  return keys;
}

std::vector<std::uint64_t> parse_seeds(const Reader& r, const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split_list(text)) {
    std::size_t sep = item.find("..");
    std::size_t width = 2;
    if (sep == std::string::npos) {
      sep = item.find('-', 1);
      width = 1;
    }
    if (sep == std::string::npos) {
      seeds.push_back(r.parse_integer("", "seeds", item));
      continue;
    }
    const auto lo = r.parse_integer("", "seeds", trim(item.substr(0, sep)));
    const auto hi = r.parse_integer("", "seeds", trim(item.substr(sep + width)));
    if (hi < lo) r.fail("", "seeds", "descending range '" + item + "'");
    if (hi - lo > 1000000) r.fail("", "seeds", "range '" + item + "' is too long");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) r.fail("", "seeds", "no seeds given");
  std::set<std::uint64_t> seen;
  for (auto s : seeds) {
    if (!seen.insert(s).second) r.fail("", "seeds", "seed " + std::to_string(s) + " repeated");
  }
  return seeds;
}

}  // namespace

IniDocument IniDocument::parse(std::istream& in, const std::string& source) {
  IniDocument doc;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("", where + ": empty section name");
      doc.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", where + ": expected 'key = value', got '" + line + "'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("", where + ": missing key");
    auto [it, inserted] = doc.sections_[section].emplace(key, Entry{value, line_no});
    if (!inserted) {
      throw ConfigError(qualified(section, key),
                        where + ": key '" + qualified(section, key) + "' given twice (first at line " +
                            std::to_string(it->second.line) + ")");
    }
  }
  return doc;
}

bool IniDocument::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const IniDocument::Entry* IniDocument::find(const std::string& section,
                                            const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir,
                           const std::string& source) {
  const IniDocument doc = IniDocument::parse(in, source);
  const Reader r(doc, source);

  for (const auto& [section, entries] : doc.sections()) {
    auto known = known_keys().find(section);
    if (known == known_keys().end()) {
      throw ConfigError(section, source + ": unknown section [" + section + "]");
    }
    for (const auto& [key, entry] : entries) {
      if (!known->second.count(key)) r.fail(section, key, "unknown key");
    }
  }

  RunConfig cfg;

  // Top level.
  if (const auto* e = r.get("", "out_dir")) {
    if (e->value.empty()) r.fail("", "out_dir", "empty path");
    cfg.out_dir = e->value;
  }
  if (cfg.out_dir.is_relative()) cfg.out_dir = base_dir / cfg.out_dir;
  const auto* seeds = r.get("", "seeds");
  if (!seeds) throw ConfigError("seeds", source + ": missing required key 'seeds'");
  cfg.seeds = parse_seeds(r, seeds->value);

  PolicyConfig& p = cfg.policy;
  const bool has_t = r.get("", "T") != nullptr;
  const bool has_rounds = r.get("", "rounds") != nullptr;
  if (!has_t && !has_rounds) {
    throw ConfigError("T", source + ": one of 'T' or 'rounds' is required");
  }
  p.pull_budget = r.integer("", "T", std::numeric_limits<std::uint64_t>::max());
  p.max_rounds = r.integer("", "rounds", 0);
  if (has_rounds && p.max_rounds == 0) r.fail("", "rounds", "must be >= 1");

  EnvConfig& env = cfg.env;
  env.limits.max_arms = r.integer("", "max_enum_arms", env.limits.max_arms);
  env.limits.max_budget = r.integer("", "max_enum_budget", env.limits.max_budget);

  // [algo]
  const auto* algo = r.get("algo", "algo");
  if (!algo) throw ConfigError("algo.algo", source + ": missing required key 'algo.algo'");
  for (const auto& name : split_list(algo->value)) {
    Algorithm a{};
    try {
      a = parse_algorithm(name);
    } catch (const ConfigError&) {
      r.fail("algo", "algo", "unknown algorithm '" + name + "'");
    }
    if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), a) != cfg.algorithms.end()) {
      r.fail("algo", "algo", "algorithm '" + name + "' listed twice");
    }
    cfg.algorithms.push_back(a);
  }
  if (cfg.algorithms.empty()) r.fail("algo", "algo", "no algorithm given");

  if (!r.get("algo", "K")) throw ConfigError("algo.K", source + ": missing required key 'algo.K'");
  p.budget = r.integer("algo", "K", 0);
  p.permutations = r.integer("algo", "R", 50);
  p.repeats = r.integer("algo", "L", 20);
  p.delta1 = r.real("algo", "delta1", p.delta1);
  p.delta2 = r.real("algo", "delta2", p.delta2);
  p.reuse_prefix = r.boolean("algo", "reuse_prefix", false);
  p.radius_scale = r.real("algo", "radius_scale", 1.0);
  p.etcg_explore = r.integer("algo", "etcg_explore", 0);
  if (p.budget == 0) r.fail("algo", "K", "must be >= 1");
  if (p.permutations == 0) r.fail("algo", "R", "must be >= 1");
  if (p.repeats == 0) r.fail("algo", "L", "must be >= 1");
  if (!(p.delta1 > 0.0 && p.delta1 < 1.0)) r.fail("algo", "delta1", "must lie in (0, 1)");
  if (!(p.delta2 > 0.0 && p.delta2 < 1.0)) r.fail("algo", "delta2", "must lie in (0, 1)");
  if (!(p.radius_scale >= 0.0)) r.fail("algo", "radius_scale", "must be >= 0");

  // [env]
  const auto* kind = r.get("env", "env");
  if (!kind) throw ConfigError("env.env", source + ": missing required key 'env.env'");
  const std::set<std::string> synthetic_only = {"means", "noise_stds", "noise_sigma", "lambda"};
  const std::set<std::string> cascade_only = {"graph_path", "activation_p", "pistar_sims",
                                              "pistar_samples", "pistar_seed"};
  const auto reject = [&](const std::set<std::string>& keys, const std::string& env_name) {
    for (const auto& k : keys) {
      if (r.get("env", k)) r.fail("env", k, "not used by env = " + env_name);
    }
  };

  if (kind->value == "synthetic") {
    env.kind = EnvKind::synthetic;
    reject(cascade_only, "synthetic");
    auto means = r.reals("env", "means");
    auto stds = r.reals("env", "noise_stds");
    const std::size_t m = r.integer("env", "M", means.empty() ? 0 : means.size());
    if (m == 0) r.fail("env", "M", "synthetic env needs M >= 1 or an explicit 'means' list");
    SyntheticParams defaults = SyntheticParams::evenly_spaced(m);
    if (means.empty()) means = defaults.means;
    if (stds.empty()) stds = defaults.noise_stds;
    if (means.size() != m) {
      r.fail("env", "means",
             "has " + std::to_string(means.size()) + " entries but M = " + std::to_string(m));
    }
    if (stds.size() != m) {
      r.fail("env", "noise_stds",
             "has " + std::to_string(stds.size()) + " entries but M = " + std::to_string(m));
    }
    for (double v : means) {
      if (v < 0.0) r.fail("env", "means", "entries must be >= 0");
    }
    for (double v : stds) {
      if (v < 0.0) r.fail("env", "noise_stds", "entries must be >= 0");
    }
    env.synthetic.means = std::move(means);
    env.synthetic.noise_stds = std::move(stds);
    env.synthetic.curvature = r.real("env", "lambda", 1.0);
    if (!(env.synthetic.curvature > 0.0)) r.fail("env", "lambda", "must be > 0");
    if (r.get("env", "noise_sigma")) {
      env.synthetic.noise = NoiseModel::fixed;
      env.synthetic.fixed_sigma = r.real("env", "noise_sigma", 0.0);
      if (env.synthetic.fixed_sigma < 0.0) r.fail("env", "noise_sigma", "must be >= 0");
    }
    env.arms = m;
    double total = 0.0;
    for (double v : env.synthetic.means) total += v;
    if (!(total > 0.0)) r.fail("env", "means", "must not all be zero");
  } else if (kind->value == "cascade") {
    env.kind = EnvKind::cascade;
    reject(synthetic_only, "cascade");
    const auto* graph = r.get("env", "graph_path");
    if (!graph) throw ConfigError("env.graph_path", source + ": cascade env needs 'env.graph_path'");
    env.graph_path = graph->value;
    if (env.graph_path.is_relative()) env.graph_path = base_dir / env.graph_path;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(env.graph_path, ec)) {
      r.fail("env", "graph_path", "file '" + env.graph_path.string() + "' does not exist");
    }
    env.activation_p = r.real("env", "activation_p", env.activation_p);
    if (!(env.activation_p >= 0.0 && env.activation_p <= 1.0)) {
      r.fail("env", "activation_p", "must lie in [0, 1]");
    }
    env.pistar_sims = r.integer("env", "pistar_sims", env.pistar_sims);
    if (env.pistar_sims == 0) r.fail("env", "pistar_sims", "must be >= 1");
    env.pistar_samples = r.integer("env", "pistar_samples", 0);
    env.pistar_seed = r.integer("env", "pistar_seed", env.pistar_seed);
    // M is the node count; checked against the file when the graph loads.
    env.arms = r.integer("env", "M", 0);
  } else {
    r.fail("env", "env", "unknown environment '" + kind->value + "' (synthetic, cascade)");
  }

  p.arms = env.arms;
  if (p.arms != 0 && p.budget > p.arms) {
    r.fail("algo", "K", "K = " + std::to_string(p.budget) + " exceeds M = " + std::to_string(p.arms));
  }
  if (p.pull_budget <= p.budget) r.fail("", "T", "must exceed K");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open config file '" + path.string() + "'");
  return parse_run_config(in, path.parent_path(), path.string());
}

}  // namespace ksv
