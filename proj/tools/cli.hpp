#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mirror_agg/experiments.hpp"

namespace mirror_agg::cli {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kResultsHeader =
    "n,M,algorithm,loss,oracle_kind,mean_excess,stderr,oracle_value,bound_value,bound_pass,seed";

/// Malformed configuration; `key` names the offending entry as section.key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ConditionsConfig {
  std::vector<double> betas{4.0};
  std::size_t training_size = 32;
  std::size_t mc_outer = 10000;
  std::size_t concavity_trials = 1000;
  std::size_t m = 8;
};

struct RunConfig {
  ExperimentConfig experiment;
  ConditionsConfig conditions;
};

/// Parses the INI-style configuration. Unknown sections or keys, malformed
/// values and constraint violations throw ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Every resolved value, one `section.key = value` line each, in fixed order.
std::string canonical_text(const RunConfig& config);
/// Hex SHA-256 of canonical_text().
std::string config_digest(const RunConfig& config);
std::string sha256_hex(const std::string& text);

std::string format_double(double v);
std::string format_row(const ResultRow& row);

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int jobs = 0;
  bool quiet = false;
};

/// Exit codes: 0 success, 1 runtime failure, 2 configuration error.
int cmd_run(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_check_conditions(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_rates(const std::vector<std::size_t>& n_list, const std::vector<std::size_t>& m_list,
              const std::vector<OracleKind>& kinds, const std::optional<std::string>& out_dir, std::ostream& out,
              std::ostream& err);

/// Full command-line entry point.
int main_entry(int argc, char** argv);

}  // namespace mirror_agg::cli
