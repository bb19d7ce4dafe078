#include <algorithm>
#include <cmath>
#include <set>

#include "mirror_agg/errors.hpp"
#include "mirror_agg/experiments.hpp"

namespace mirror_agg {

SlopeFit fit_rate_slope(const std::vector<ResultRow>& rows) {
  std::vector<double> xs, ys;
  std::set<std::size_t> distinct_n;
  SlopeFit fit;
  for (const auto& row : rows) {
    if (!(row.mean_excess > 0.0) || row.n == 0) {
      ++fit.rows_excluded;
      continue;
    }
    xs.push_back(std::log(static_cast<double>(row.n)));
    ys.push_back(std::log(row.mean_excess));
    distinct_n.insert(row.n);
  }
  if (distinct_n.size() < 4) {
    throw InputError("rate fit needs at least 4 distinct n with positive excess, got " +
                     std::to_string(distinct_n.size()));
  }
  const auto k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    sse += r * r;
  }
  fit.std_error = std::sqrt(sse / (k - 2.0) / sxx);
  fit.rows_used = xs.size();
  return fit;
}

BoundSummary verify_bound(const std::vector<ResultRow>& rows, BoundKind bound) {
  BoundSummary summary;
  for (const auto& row : rows) {
    if (row.bound != bound) continue;
    ++summary.checked;
    if (row.mean_excess - 2.0 * row.std_error <= row.bound_value) {
      ++summary.passed;
    } else {
      summary.failures.push_back(row);
    }
  }
  return summary;
}

std::vector<ResultRow> select_rows(const std::vector<ResultRow>& rows, std::string_view algorithm,
                                   OracleKind kind, std::size_t m) {
  std::vector<ResultRow> out;
  for (const auto& row : rows) {
    if (row.algorithm == algorithm && row.oracle_kind == kind && row.m == m) out.push_back(row);
  }
  std::sort(out.begin(), out.end(), [](const ResultRow& a, const ResultRow& b) { return a.n < b.n; });
  return out;
}

}  // namespace mirror_agg
