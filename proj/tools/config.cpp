#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "mirror_agg/errors.hpp"

namespace mirror_agg::cli {

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"seed", "replications", "n_grid", "M_grid", "algorithms"}},
      {"generator", {"family", "grid_size", "noise_level", "margin_exponent", "tie_gap", "dictionary"}},
      {"loss", {"kind", "y_bound"}},
      {"lma", {"beta"}},
      {"ma", {"beta0", "gamma"}},
      {"oracle", {"tolerance", "max_iterations"}},
      {"conditions", {"betas", "training_size", "mc_outer", "concavity_trials", "M"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& key, const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key, "empty list element in '" + value + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "expected a nonnegative integer, got '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  }
  return v;
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& value, F parse_one) {
  std::vector<T> out;
  for (const auto& item : split_list(key, value)) out.push_back(parse_one(key, item));
  return out;
}

// Runs a library parser and re-labels its error with the config key.
template <typename F>
auto keyed(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("<file>", "line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig config;
  ExperimentConfig& ex = config.experiment;
  ConditionsConfig& cond = config.conditions;
  // Defaults that differ from the library's zero-initialized grids.
  ex.n_grid = {32, 128, 512, 2048};
  ex.m_grid = {2, 8, 32};

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of any section");
    const auto known = schema().find(section);
    if (known == schema().end()) throw ConfigError(section, "unknown section");
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      if (!known->second.contains(name)) throw ConfigError(key, "unknown key");
      const std::string value = trim(node.data());
      if (value.empty()) throw ConfigError(key, "missing value");

      if (key == "experiment.seed") {
        ex.seed = parse_u64(key, value);
      } else if (key == "experiment.replications") {
        ex.replications = parse_u64(key, value);
      } else if (key == "experiment.n_grid") {
        ex.n_grid = parse_list<std::size_t>(key, value, parse_u64);
      } else if (key == "experiment.M_grid") {
        ex.m_grid = parse_list<std::size_t>(key, value, parse_u64);
      } else if (key == "experiment.algorithms") {
        ex.algorithms = parse_list<Algorithm>(key, value, [](const std::string& k, const std::string& v) {
          return keyed(k, [&] { return parse_algorithm(v); });
        });
      } else if (key == "generator.family") {
        ex.generator.family = keyed(key, [&] { return parse_generator_family(value); });
      } else if (key == "generator.grid_size") {
        ex.generator.grid_size = parse_u64(key, value);
      } else if (key == "generator.noise_level") {
        ex.generator.noise_level = parse_real(key, value);
      } else if (key == "generator.margin_exponent") {
        ex.generator.margin_exponent = parse_real(key, value);
      } else if (key == "generator.tie_gap") {
        ex.generator.tie_gap = parse_real(key, value);
      } else if (key == "generator.dictionary") {
        ex.generator.recipe = keyed(key, [&] { return parse_dictionary_recipe(value); });
      } else if (key == "loss.kind") {
        ex.loss.kind = keyed(key, [&] { return parse_loss_kind(value); });
      } else if (key == "loss.y_bound") {
        ex.loss.y_bound = parse_real(key, value);
      } else if (key == "lma.beta") {
        ex.lma_betas = parse_list<double>(key, value, parse_real);
      } else if (key == "ma.beta0") {
        if (value == "auto") {
          ex.ma_beta0.reset();
        } else {
          ex.ma_beta0 = parse_real(key, value);
        }
      } else if (key == "ma.gamma") {
        ex.ma_gamma = parse_real(key, value);
      } else if (key == "oracle.tolerance") {
        ex.oracle.tolerance = parse_real(key, value);
      } else if (key == "oracle.max_iterations") {
        ex.oracle.max_iterations = parse_u64(key, value);
      } else if (key == "conditions.betas") {
        cond.betas = parse_list<double>(key, value, parse_real);
      } else if (key == "conditions.training_size") {
        cond.training_size = parse_u64(key, value);
      } else if (key == "conditions.mc_outer") {
        cond.mc_outer = parse_u64(key, value);
      } else if (key == "conditions.concavity_trials") {
        cond.concavity_trials = parse_u64(key, value);
      } else if (key == "conditions.M") {
        cond.m = parse_u64(key, value);
      }
    }
  }

  // Constraint checks with the offending key named.
  const auto& g = ex.generator;
  if (g.margin_exponent < 1.0) {
    throw ConfigError("generator.margin_exponent", "margin exponent kappa must satisfy kappa >= 1, got " +
                                                       format_double(g.margin_exponent));
  }
  if (g.grid_size < 1) throw ConfigError("generator.grid_size", "must be >= 1");
  if (g.noise_level < 0.0 || g.noise_level > 1.0) throw ConfigError("generator.noise_level", "must lie in [0, 1]");
  if (g.tie_gap < 0.0 || g.tie_gap > 1.0) throw ConfigError("generator.tie_gap", "must lie in [0, 1]");
  if (ex.replications < 1) throw ConfigError("experiment.replications", "must be >= 1");
  for (auto n : ex.n_grid) {
    if (n < 1) throw ConfigError("experiment.n_grid", "entries must be >= 1");
  }
  for (auto m : ex.m_grid) {
    if (m < 2) throw ConfigError("experiment.M_grid", "entries must be >= 2");
  }
  for (double b : ex.lma_betas) {
    if (!(b > 0.0)) throw ConfigError("lma.beta", "temperatures must be positive");
  }
  if (ex.ma_beta0 && !(*ex.ma_beta0 > 0.0)) throw ConfigError("ma.beta0", "must be positive or 'auto'");
  if (!(ex.ma_gamma > 0.0)) throw ConfigError("ma.gamma", "must be positive");
  if (!(ex.loss.y_bound > 0.0)) throw ConfigError("loss.y_bound", "must be positive");
  if (!(ex.oracle.tolerance > 0.0)) throw ConfigError("oracle.tolerance", "must be positive");
  for (double b : cond.betas) {
    if (!(b > 0.0)) throw ConfigError("conditions.betas", "temperatures must be positive");
  }
  if (cond.mc_outer < 100) throw ConfigError("conditions.mc_outer", "must be >= 100");
  if (cond.concavity_trials < 1000) throw ConfigError("conditions.concavity_trials", "must be >= 1000");
  if (cond.training_size < 1) throw ConfigError("conditions.training_size", "must be >= 1");
  if (cond.m < 2) throw ConfigError("conditions.M", "must be >= 2");

  const bool classification = g.family == GeneratorFamily::phi_classification ||
                              g.family == GeneratorFamily::margin_classification;
  if (classification != ex.loss.is_phi()) {
    throw ConfigError("loss.kind", std::string("loss ") + std::string(to_string(ex.loss.kind)) +
                                       " is incompatible with generator family " +
                                       std::string(to_string(g.family)));
  }
  for (auto a : ex.algorithms) {
    if (a == Algorithm::MA && !ex.loss.differentiable()) {
      throw ConfigError("experiment.algorithms", "MA needs a differentiable loss; hinge supports LMA and ERM only");
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read config file '" + path + "'");
  return parse_config(in);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string canonical_text(const RunConfig& config) {
  const auto& ex = config.experiment;
  const auto& c = config.conditions;
  std::ostringstream out;
  auto list = [](const auto& values, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + fmt(values[i]);
    return s;
  };
  auto u = [](std::size_t v) { return std::to_string(v); };
  out << "experiment.seed = " << ex.seed << '\n'
      << "experiment.replications = " << ex.replications << '\n'
      << "experiment.n_grid = " << list(ex.n_grid, u) << '\n'
      << "experiment.M_grid = " << list(ex.m_grid, u) << '\n'
      << "experiment.algorithms = "
      << list(ex.algorithms, [](Algorithm a) { return std::string(to_string(a)); }) << '\n'
      << "generator.family = " << to_string(ex.generator.family) << '\n'
      << "generator.grid_size = " << ex.generator.grid_size << '\n'
      << "generator.noise_level = " << format_double(ex.generator.noise_level) << '\n'
      << "generator.margin_exponent = " << format_double(ex.generator.margin_exponent) << '\n'
      << "generator.tie_gap = " << format_double(ex.generator.tie_gap) << '\n'
      << "generator.dictionary = " << to_string(ex.generator.recipe) << '\n'
      << "loss.kind = " << to_string(ex.loss.kind) << '\n'
      << "loss.y_bound = " << format_double(ex.loss.y_bound) << '\n'
      << "lma.beta = " << list(ex.lma_betas, format_double) << '\n'
      << "ma.beta0 = " << (ex.ma_beta0 ? format_double(*ex.ma_beta0) : std::string("auto")) << '\n'
      << "ma.gamma = " << format_double(ex.ma_gamma) << '\n'
      << "oracle.tolerance = " << format_double(ex.oracle.tolerance) << '\n'
      << "oracle.max_iterations = " << ex.oracle.max_iterations << '\n'
      << "conditions.betas = " << list(c.betas, format_double) << '\n'
      << "conditions.training_size = " << c.training_size << '\n'
      << "conditions.mc_outer = " << c.mc_outer << '\n'
      << "conditions.concavity_trials = " << c.concavity_trials << '\n'
      << "conditions.M = " << c.m << '\n';
  return out.str();
}

std::string sha256_hex(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string config_digest(const RunConfig& config) { return sha256_hex(canonical_text(config)); }

std::string format_row(const ResultRow& row) {
  std::string s = std::to_string(row.n) + ',' + std::to_string(row.m) + ',' + row.algorithm + ',' +
                  std::string(to_string(row.loss)) + ',' + std::string(to_string(row.oracle_kind)) + ',' +
                  format_double(row.mean_excess) + ',' + format_double(row.std_error) + ',' +
                  format_double(row.oracle_value) + ',';
  if (row.bound != BoundKind::none) {
    s += format_double(row.bound_value) + ',' + (row.bound_pass ? "true" : "false");
  } else {
    s += ',';
  }
  s += ',' + std::to_string(row.seed);
  return s;
}

}  // namespace mirror_agg::cli
