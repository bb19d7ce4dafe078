#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirror_agg/aggregation.hpp"
#include "mirror_agg/losses.hpp"
#include "mirror_agg/oracles.hpp"

namespace mirror_agg {

// ---------------------------------------------------------------------------
// Instance generators

enum class GeneratorFamily { bounded_regression, phi_classification, margin_classification, near_tie };
std::string_view to_string(GeneratorFamily f);
GeneratorFamily parse_generator_family(std::string_view name);

/// How the bounded-regression dictionary is built.
///   biased:         f_1 = f* + offset, every other element displaced further
///                   along the same direction plus an orthogonal wiggle, so
///                   the best element is also the best convex combination
///                   and the regression function lies outside the hull.
///   contains_truth: f* itself plus M - 1 random bounded perturbations.
enum class DictionaryRecipe { biased, contains_truth };
std::string_view to_string(DictionaryRecipe r);
DictionaryRecipe parse_dictionary_recipe(std::string_view name);

struct GeneratorSpec {
  GeneratorFamily family = GeneratorFamily::bounded_regression;
  std::size_t grid_size = 16;       // K design points
  double noise_level = 0.25;        // sigma, two-point noise +-sigma
  double margin_exponent = 1.0;     // kappa >= 1 (margin_classification)
  double tie_gap = 0.05;            // delta (near_tie)
  DictionaryRecipe recipe = DictionaryRecipe::biased;

  /// Throws ParameterError naming the offending field.
  void validate() const;
};

struct Instance {
  FiniteDistribution dist;
  std::shared_ptr<const TabulatedDictionary> dict;
  /// E[Y | X = x] on the design grid (P(Y = 1 | X = x) for classification).
  std::vector<double> regression;
};

/// Deterministic in (spec, M, seed). All dictionaries satisfy |f_j| <= 1.
Instance generate_instance(const GeneratorSpec& spec, std::size_t m, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Monte Carlo harness

enum class Algorithm { MA, LMA, ERM };
std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

enum class BoundKind { none, eq3, eq5 };

struct ExperimentConfig {
  GeneratorSpec generator;
  std::vector<std::size_t> n_grid;
  std::vector<std::size_t> m_grid;
  std::size_t replications = 1000;
  std::vector<Algorithm> algorithms{Algorithm::LMA, Algorithm::MA, Algorithm::ERM};
  LossSpec loss;
  /// One LMA run per temperature.
  std::vector<double> lma_betas{4.0};
  /// MA schedule: beta_i = ma_beta0 * sqrt(i) (default sqrt(Q*/ln M)), gamma = ma_gamma.
  std::optional<double> ma_beta0;
  double ma_gamma = 1.0;
  COracleOptions oracle;
  std::uint64_t seed = 0;

  /// Throws ParameterError naming the offending field.
  void validate() const;
};

struct ResultRow {
  std::size_t n = 0;
  std::size_t m = 0;
  std::string algorithm;
  LossKind loss = LossKind::squared;
  OracleKind oracle_kind = OracleKind::MS;
  double mean_excess = 0.0;
  double std_error = 0.0;
  double oracle_value = 0.0;
  BoundKind bound = BoundKind::none;
  double bound_value = 0.0;
  bool bound_pass = false;
  std::uint64_t seed = 0;
};

/// Oracles of one generated instance, shared by every n for a given M.
struct CellInstance {
  Instance instance;
  RiskReport ms;
  RiskReport c;
};

/// Instance seed depends on (master seed, M) only.
CellInstance prepare_instance(const ExperimentConfig& config, std::size_t m);

/// Exact risk of every configured estimator on one replicate, in the order
/// of estimator_labels().
std::vector<double> run_replicate(const ExperimentConfig& config, const CellInstance& cell, std::size_t n,
                                  std::size_t replicate);

/// Column labels of run_replicate (e.g. "LMA", "MA", "ERM", or
/// "LMA@beta=..." when several temperatures are configured).
std::vector<std::string> estimator_labels(const ExperimentConfig& config);

/// Per-replicate risks, replicate-major: risks[r][estimator].
using ReplicateRisks = std::vector<std::vector<double>>;

/// Reference kernel: replicates one after another.
ReplicateRisks run_replicates_serial(const ExperimentConfig& config, const CellInstance& cell, std::size_t n);
/// OpenMP kernel over replicates (jobs = 0 uses the OpenMP default). Random
/// streams are keyed by (seed, n, M, replicate), so the output equals the
/// serial kernel bit for bit.
ReplicateRisks run_replicates_parallel(const ExperimentConfig& config, const CellInstance& cell, std::size_t n,
                                       int jobs = 0);

/// Reduces replicate risks to rows: each estimator is reported against its
/// own oracle (MS for LMA and ERM, C for MA, with the bound attached) and
/// cross-wise against the other oracle.
std::vector<ResultRow> summarize_cell(const ExperimentConfig& config, const CellInstance& cell, std::size_t n,
                                      const ReplicateRisks& risks);

std::vector<ResultRow> run_cell(const ExperimentConfig& config, const CellInstance& cell, std::size_t n,
                                int jobs = 0);
std::vector<ResultRow> run_cell(const ExperimentConfig& config, std::size_t n, std::size_t m, int jobs = 0);

/// beta ln M / (n + 1).
double lma_bound(double beta, std::size_t n, std::size_t m);
/// 2 sqrt(Q*) sqrt(ln M / n).
double ma_bound(double q_star, std::size_t n, std::size_t m);

// ---------------------------------------------------------------------------
// Rate fits and bound verification

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  std::size_t rows_used = 0;
  std::size_t rows_excluded = 0;
};

/// OLS of ln(mean excess) on ln(n). Rows with nonpositive excess are
/// excluded and counted; fewer than four usable distinct n throw InputError.
SlopeFit fit_rate_slope(const std::vector<ResultRow>& rows);

struct BoundSummary {
  std::size_t checked = 0;
  std::size_t passed = 0;
  std::vector<ResultRow> failures;
  double fraction_passing() const { return checked == 0 ? 1.0 : static_cast<double>(passed) / checked; }
};

/// A row passes iff mean_excess - 2 std_error <= bound_value. Only rows
/// carrying the requested bound are checked.
BoundSummary verify_bound(const std::vector<ResultRow>& rows, BoundKind bound);

/// Rows matching (algorithm, oracle kind, M), sorted by n.
std::vector<ResultRow> select_rows(const std::vector<ResultRow>& rows, std::string_view algorithm,
                                   OracleKind kind, std::size_t m);

}  // namespace mirror_agg
