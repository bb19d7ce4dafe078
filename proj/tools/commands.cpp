#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "mirror_agg/conditions.hpp"
#include "mirror_agg/errors.hpp"

namespace mirror_agg::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// Loads, applies the seed override and validates. Returns nullopt after
// printing a diagnostic when the configuration is unusable.
std::optional<RunConfig> resolve_config(const CommonOptions& options, std::ostream& err) {
  try {
    RunConfig config = load_config(options.config_path);
    if (options.seed) config.experiment.seed = *options.seed;
    config.experiment.validate();
    return config;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
  }
  return std::nullopt;
}

void write_manifest(const fs::path& path, const std::string& command, const RunConfig& config,
                    const std::string& digest, const nlohmann::json& outputs) {
  nlohmann::json manifest = {
      {"command", command},
      {"config_digest", digest},
      {"tool_version", kToolVersion},
      {"seed", config.experiment.seed},
      {"timestamp", utc_timestamp()},
      {"outputs", outputs},
      {"config", canonical_text(config)},
  };
  std::ofstream(path) << manifest.dump(2) << '\n';
}

std::string weights_text(const SimplexWeights& w) {
  std::string s = "[";
  for (std::size_t j = 0; j < w.size(); ++j) s += (j ? " " : "") + format_double(w[j]);
  return s + "]";
}

}  // namespace

int cmd_run(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  const auto resolved = resolve_config(options, err);
  if (!resolved) return 2;
  const RunConfig& config = *resolved;
  const ExperimentConfig& ex = config.experiment;

  const std::string digest = config_digest(config);
  const std::string tag = digest.substr(0, 16);
  const fs::path dir(options.out_dir);
  fs::create_directories(dir);
  const fs::path results_path = dir / ("results-" + tag + ".csv");
  const fs::path failures_path = dir / ("failures-" + tag + ".txt");
  write_manifest(dir / ("manifest-" + tag + ".json"), "run", config, digest,
                 {{"results", results_path.string()}, {"failures", failures_path.string()}});

  std::ofstream csv(results_path);
  csv << kResultsHeader << '\n';
  std::vector<std::string> failures;

  for (std::size_t m : ex.m_grid) {
    std::optional<CellInstance> cell;
    try {
      cell = prepare_instance(ex, m);
    } catch (const Error& e) {
      for (std::size_t n : ex.n_grid) {
        failures.push_back("n=" + std::to_string(n) + " M=" + std::to_string(m) + ": " + e.what());
      }
      continue;
    }
    for (std::size_t n : ex.n_grid) {
      try {
        for (const auto& row : run_cell(ex, *cell, n, options.jobs)) csv << format_row(row) << '\n';
        csv.flush();
        if (!options.quiet) err << "cell n=" << n << " M=" << m << " done\n";
      } catch (const Error& e) {
        failures.push_back("n=" + std::to_string(n) + " M=" + std::to_string(m) + ": " + e.what());
      }
    }
  }

  if (!failures.empty()) {
    std::ofstream f(failures_path);
    for (const auto& line : failures) {
      f << line << '\n';
      err << "cell failed: " << line << '\n';
    }
    return 1;
  }
  if (fs::exists(failures_path)) fs::remove(failures_path);
  if (!options.quiet) out << results_path.string() << '\n';
  return 0;
}

int cmd_check_conditions(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  const auto resolved = resolve_config(options, err);
  if (!resolved) return 2;
  const RunConfig& config = *resolved;
  const ExperimentConfig& ex = config.experiment;
  const ConditionsConfig& cc = config.conditions;

  const std::string digest = config_digest(config);
  const std::string tag = digest.substr(0, 16);
  const fs::path dir(options.out_dir);
  fs::create_directories(dir);
  const fs::path report_path = dir / ("conditions-" + tag + ".csv");
  write_manifest(dir / ("manifest-conditions-" + tag + ".json"), "check-conditions", config, digest,
                 {{"conditions", report_path.string()}});

  const std::string loss_name(to_string(ex.loss.kind));
  std::vector<std::string> lines;
  lines.emplace_back("check,loss,beta,estimate,std_error,verdict,samples_used,detail");

  try {
    const Instance inst = generate_instance(ex.generator, cc.m, derive_seed(ex.seed, {0x636f6e64ULL, cc.m}));
    const auto uniform = SimplexWeights::uniform(cc.m);
    for (std::size_t b = 0; b < cc.betas.size(); ++b) {
      const double beta = cc.betas[b];
      const auto c4 = check_condition4(ex.loss, *inst.dict, inst.dist, beta, cc.training_size, cc.mc_outer,
                                       derive_seed(ex.seed, {4, b}), options.jobs);
      lines.push_back("condition4," + loss_name + ',' + format_double(beta) + ',' + format_double(c4.estimate) + ',' +
                      format_double(c4.std_error) + ',' + std::string(to_string(c4.verdict)) + ',' +
                      std::to_string(c4.samples_used) + ",training_size=" + std::to_string(cc.training_size));
      const auto c6 = check_concavity6(ex.loss, *inst.dict, inst.dist, beta, uniform, cc.concavity_trials,
                                       derive_seed(ex.seed, {6, b}));
      std::string detail;
      if (c6.counterexample) {
        detail = "theta1=" + weights_text(c6.counterexample->first) +
                 ";theta2=" + weights_text(c6.counterexample->second);
      }
      lines.push_back("concavity6," + loss_name + ',' + format_double(beta) + ',' + format_double(c6.estimate) +
                      ",0," + std::string(to_string(c6.verdict)) + ',' + std::to_string(c6.samples_used) + ',' +
                      detail);
    }
  } catch (const Error& e) {
    err << "condition check failed: " << e.what() << '\n';
    return 1;
  }

  try {
    const auto report = nice_beta_report(ex.loss.kind);
    lines.push_back("phi_criterion," + loss_name + ",," + format_double(report.computed_beta) + ",0," +
                    (report.agrees ? "agrees" : "differs") + ",1000001,reference_beta=" +
                    (report.reference_beta ? format_double(*report.reference_beta) : std::string("none")));
  } catch (const NotDifferentiableError& e) {
    lines.push_back("phi_criterion," + loss_name + ",,,,inapplicable,0," + std::string(e.what()));
  }

  std::ofstream csv(report_path);
  for (const auto& line : lines) {
    csv << line << '\n';
    if (!options.quiet) out << line << '\n';
  }
  return 0;
}

int cmd_rates(const std::vector<std::size_t>& n_list, const std::vector<std::size_t>& m_list,
              const std::vector<OracleKind>& kinds, const std::optional<std::string>& out_dir, std::ostream& out,
              std::ostream& err) {
  std::ostringstream table;
  table << "n,M,kind,rate\n";
  try {
    for (std::size_t n : n_list) {
      for (std::size_t m : m_list) {
        for (OracleKind k : kinds) {
          table << n << ',' << m << ',' << to_string(k) << ',' << format_double(optimal_rate(n, m, k)) << '\n';
        }
      }
    }
  } catch (const Error& e) {
    err << "rates: " << e.what() << '\n';
    return 2;
  }
  out << table.str();
  if (out_dir) {
    fs::create_directories(*out_dir);
    const std::string tag = sha256_hex(table.str()).substr(0, 16);
    std::ofstream(fs::path(*out_dir) / ("rates-" + tag + ".csv")) << table.str();
  }
  return 0;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Mirror-averaging aggregation: experiments, loss-condition checks and rate curves"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonOptions common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Configuration file (INI)")->required();
    sub->add_option("--seed", common.seed, "Master seed (overrides the config)");
    sub->add_option("--out", common.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--jobs", common.jobs, "Worker threads (results do not depend on it)")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", common.quiet, "Suppress progress output");
  };
  auto* run = app.add_subcommand("run", "Run the Monte Carlo excess-risk grid and write results CSV");
  add_common(run);
  auto* check = app.add_subcommand("check-conditions", "Check the exponential-moment and concavity conditions");
  add_common(check);

  std::vector<std::size_t> n_list, m_list;
  std::vector<std::string> kind_names{"MS", "C"};
  std::optional<std::string> rates_out;
  auto* rates = app.add_subcommand("rates", "Print optimal aggregation rate reference curves");
  rates->add_option("--n", n_list, "Sample sizes")->required()->delimiter(',');
  rates->add_option("--M", m_list, "Dictionary sizes")->required()->delimiter(',');
  rates->add_option("--kinds", kind_names, "Oracle kinds (MS, C)")->delimiter(',')->capture_default_str();
  rates->add_option("--out", rates_out, "Also write the table to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*run) return cmd_run(common, std::cout, std::cerr);
  if (*check) return cmd_check_conditions(common, std::cout, std::cerr);
  std::vector<OracleKind> kinds;
  for (const auto& k : kind_names) {
    if (k == "MS") {
      kinds.push_back(OracleKind::MS);
    } else if (k == "C") {
      kinds.push_back(OracleKind::C);
    } else {
      std::cerr << "rates: unknown kind '" << k << "' (expected MS or C)\n";
      return 2;
    }
  }
  return cmd_rates(n_list, m_list, kinds, rates_out, std::cout, std::cerr);
}

}  // namespace mirror_agg::cli
