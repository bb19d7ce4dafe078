#include <omp.h>

#include <cmath>
#include <cstdio>
#include <exception>
#include <string>

#include "mirror_agg/errors.hpp"
#include "mirror_agg/experiments.hpp"
#include "mirror_agg/numeric.hpp"

namespace mirror_agg {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::MA: return "MA";
    case Algorithm::LMA: return "LMA";
    case Algorithm::ERM: return "ERM";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "MA") return Algorithm::MA;
  if (name == "LMA") return Algorithm::LMA;
  if (name == "ERM") return Algorithm::ERM;
  throw InputError("unknown algorithm '" + std::string(name) + "' (expected MA, LMA or ERM)");
}

void ExperimentConfig::validate() const {
  generator.validate();
  loss.validate();
  if (n_grid.empty()) throw ParameterError("n_grid must not be empty");
  if (m_grid.empty()) throw ParameterError("M_grid must not be empty");
  for (auto n : n_grid) {
    if (n < 1) throw ParameterError("n_grid entries must be >= 1");
  }
  for (auto m : m_grid) {
    if (m < 2) throw ParameterError("M_grid entries must be >= 2");
  }
  if (replications < 1) throw ParameterError("replications must be >= 1");
  if (algorithms.empty()) throw ParameterError("algorithms must not be empty");

  const bool classification = generator.family == GeneratorFamily::phi_classification ||
                              generator.family == GeneratorFamily::margin_classification;
  if (classification != loss.is_phi()) {
    throw ParameterError(std::string("loss kind ") + std::string(to_string(loss.kind)) +
                         " does not match generator family " + std::string(to_string(generator.family)));
  }
  for (auto a : algorithms) {
    if (a == Algorithm::MA && !loss.differentiable()) {
      throw ParameterError("algorithm MA requires a differentiable loss (hinge is LMA/ERM only)");
    }
    if (a == Algorithm::LMA && lma_betas.empty()) throw ParameterError("LMA needs at least one temperature");
  }
  for (double b : lma_betas) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ParameterError("LMA temperatures must be positive");
  }
  if (ma_beta0 && !(*ma_beta0 > 0.0)) throw ParameterError("MA beta0 must be positive");
  if (!(ma_gamma > 0.0)) throw ParameterError("MA gamma must be positive");
  if (!(oracle.tolerance > 0.0)) throw ParameterError("oracle tolerance must be positive");
}

double lma_bound(double beta, std::size_t n, std::size_t m) {
  return beta * std::log(static_cast<double>(m)) / static_cast<double>(n + 1);
}

double ma_bound(double q_star, std::size_t n, std::size_t m) {
  return 2.0 * std::sqrt(q_star) * std::sqrt(std::log(static_cast<double>(m)) / static_cast<double>(n));
}

namespace {

std::string format_beta(double beta) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", beta);
  return buf;
}

struct Estimator {
  Algorithm algorithm;
  double beta = 0.0;  // LMA only
  std::string label;
};

std::vector<Estimator> estimators(const ExperimentConfig& config) {
  std::vector<Estimator> out;
  for (auto a : config.algorithms) {
    if (a == Algorithm::LMA) {
      for (double b : config.lma_betas) {
        std::string label = "LMA";
        if (config.lma_betas.size() > 1) label += "@beta=" + format_beta(b);
        out.push_back({a, b, label});
      }
    } else {
      out.push_back({a, 0.0, std::string(to_string(a))});
    }
  }
  return out;
}

double ma_beta0(const ExperimentConfig& config, const Dictionary& dict) {
  if (config.ma_beta0) return *config.ma_beta0;
  return std::sqrt(q_star_bound(config.loss, dict.range_bound()) / std::log(static_cast<double>(dict.size())));
}

}  // namespace

std::vector<std::string> estimator_labels(const ExperimentConfig& config) {
  std::vector<std::string> labels;
  for (const auto& e : estimators(config)) labels.push_back(e.label);
  return labels;
}

CellInstance prepare_instance(const ExperimentConfig& config, std::size_t m) {
  config.validate();
  Instance inst = generate_instance(config.generator, m, derive_seed(config.seed, {0x696e7374616e6365ULL, m}));
  inst.dist.validate_for(config.loss, inst.dict->design_size());
  RiskReport ms = ms_oracle(*inst.dict, config.loss, inst.dist);
  RiskReport c = c_oracle(*inst.dict, config.loss, inst.dist, config.oracle);
  return CellInstance{std::move(inst), std::move(ms), std::move(c)};
}

std::vector<double> run_replicate(const ExperimentConfig& config, const CellInstance& cell, std::size_t n,
                                  std::size_t replicate) {
  const Dictionary& dict = *cell.instance.dict;
  const std::size_t m = dict.size();
  Rng rng(derive_seed(config.seed, {n, m, replicate}));
  const auto sample = cell.instance.dist.sample(rng, n);

  std::vector<double> risks;
  for (const auto& e : estimators(config)) {
    switch (e.algorithm) {
      case Algorithm::LMA: {
        const auto agg = lma_run(sample, config.loss, dict, e.beta);
        risks.push_back(exact_risk(agg.weights, dict, config.loss, cell.instance.dist));
        break;
      }
      case Algorithm::MA: {
        const auto schedule = Schedule::sqrt_growth(ma_beta0(config, dict), config.ma_gamma);
        const auto agg = ma_run(sample, config.loss, dict, schedule);
        risks.push_back(exact_risk(agg.weights, dict, config.loss, cell.instance.dist));
        break;
      }
      case Algorithm::ERM: {
        const auto sel = erm_select(sample, config.loss, dict);
        risks.push_back(exact_risk(sel.index, dict, config.loss, cell.instance.dist));
        break;
      }
    }
  }
  return risks;
}

ReplicateRisks run_replicates_serial(const ExperimentConfig& config, const CellInstance& cell, std::size_t n) {
  ReplicateRisks risks(config.replications);
  for (std::size_t r = 0; r < config.replications; ++r) risks[r] = run_replicate(config, cell, n, r);
  return risks;
}

ReplicateRisks run_replicates_parallel(const ExperimentConfig& config, const CellInstance& cell, std::size_t n,
                                       int jobs) {
  ReplicateRisks risks(config.replications);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto reps = static_cast<std::int64_t>(config.replications);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::int64_t r = 0; r < reps; ++r) {
    try {
      risks[static_cast<std::size_t>(r)] = run_replicate(config, cell, n, static_cast<std::size_t>(r));
    } catch (...) {
#pragma omp critical(mirror_agg_replicate_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return risks;
}

namespace {

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_and_stderr(const ReplicateRisks& risks, std::size_t column, double oracle) {
  const std::size_t r = risks.size();
  CompensatedSum total;
  for (const auto& row : risks) total.add(row[column] - oracle);
  const double mean = total.value() / static_cast<double>(r);
  if (r < 2) return {mean, 0.0};
  CompensatedSum squares;
  for (const auto& row : risks) {
    const double d = row[column] - oracle - mean;
    squares.add(d * d);
  }
  const double sd = std::sqrt(squares.value() / static_cast<double>(r - 1));
  return {mean, sd / std::sqrt(static_cast<double>(r))};
}

}  // namespace

std::vector<ResultRow> summarize_cell(const ExperimentConfig& config, const CellInstance& cell, std::size_t n,
                                      const ReplicateRisks& risks) {
  const Dictionary& dict = *cell.instance.dict;
  const std::size_t m = dict.size();
  const auto est = estimators(config);
  std::vector<ResultRow> rows;

  for (std::size_t e = 0; e < est.size(); ++e) {
    const OracleKind own = est[e].algorithm == Algorithm::MA ? OracleKind::C : OracleKind::MS;
    for (OracleKind kind : {own, own == OracleKind::MS ? OracleKind::C : OracleKind::MS}) {
      const RiskReport& oracle = kind == OracleKind::MS ? cell.ms : cell.c;
      const auto stats = mean_and_stderr(risks, e, oracle.risk);
      ResultRow row;
      row.n = n;
      row.m = m;
      row.algorithm = est[e].label;
      row.loss = config.loss.kind;
      row.oracle_kind = kind;
      row.mean_excess = stats.mean;
      row.std_error = stats.se;
      row.oracle_value = oracle.risk;
      row.seed = config.seed;
      if (kind == own && est[e].algorithm == Algorithm::LMA) {
        row.bound = BoundKind::eq5;
        row.bound_value = lma_bound(est[e].beta, n, m);
      } else if (kind == own && est[e].algorithm == Algorithm::MA) {
        row.bound = BoundKind::eq3;
        row.bound_value = ma_bound(q_star_bound(config.loss, dict.range_bound()), n, m);
      }
      if (row.bound != BoundKind::none) row.bound_pass = row.mean_excess - 2.0 * row.std_error <= row.bound_value;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ResultRow> run_cell(const ExperimentConfig& config, const CellInstance& cell, std::size_t n, int jobs) {
  return summarize_cell(config, cell, n, run_replicates_parallel(config, cell, n, jobs));
}

std::vector<ResultRow> run_cell(const ExperimentConfig& config, std::size_t n, std::size_t m, int jobs) {
  return run_cell(config, prepare_instance(config, m), n, jobs);
}

}  // namespace mirror_agg
