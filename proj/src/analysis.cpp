#include "irtcal/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace irtcal {

namespace {

// Correlations this close to +-1 are treated as self-comparisons.
constexpr double kPerfectCorrelation = 1.0 - 1e-12;

int column_rank(ModelKind k) {
  switch (k) {
    case ModelKind::Rasch: return 0;
    case ModelKind::TwoParamItem: return 1;
    case ModelKind::TwoParamPerson: return 2;
    case ModelKind::ThreeParam: return 3;
  }
  return 4;
}

}  // namespace

std::vector<double> standardize(std::span<const double> values, SdDenominator denominator) {
  const std::size_t n = values.size();
  if (n < 2) throw DomainError("standardize needs at least 2 values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / double(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double dof = denominator == SdDenominator::Sample ? double(n - 1) : double(n);
  const double sd = std::sqrt(ss / dof);
  if (!(sd > 0.0)) throw DomainError("standardize: zero variance");
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = (values[k] - mean) / sd;
  return out;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson_r: length mismatch");
  if (x.size() < 3) throw DomainError("pearson_r needs at least 3 pairs");
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx, dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DomainError("pearson_r: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double fisher_z(double r) {
  if (!(std::abs(r) < 1.0)) throw DomainError("fisher_z requires |r| < 1");
  return std::atanh(r);
}

double z_sigma(std::size_t n) {
  if (n < 4) throw DomainError("z_sigma requires n >= 4");
  return std::sqrt(1.0 / double(n - 3));
}

PairwiseComparison compare_z(double z_a, double z_b, std::size_t n, ModelSpec a, ModelSpec b) {
  PairwiseComparison c{a, b, 0, 0, 0, false};
  c.delta = std::abs(z_a - z_b);
  c.sigma_delta = std::numbers::sqrt2 * z_sigma(n);
  c.ratio = c.delta / c.sigma_delta;
  c.significant_at_10pct = c.ratio >= kCriticalRatio10pct;
  return c;
}

ComparisonReport compare_models(const std::vector<ModelVector>& vectors,
                                const ModelSpec& baseline, std::size_t n) {
  const auto base = std::find_if(vectors.begin(), vectors.end(),
                                 [&](const ModelVector& v) { return v.spec == baseline; });
  if (base == vectors.end()) throw DomainError("baseline model not among the compared vectors");
  for (const auto& v : vectors) {
    if (v.values.size() != base->values.size())
      throw DomainError("compared vectors differ in length");
  }
  ComparisonReport report;
  report.baseline = baseline;
  report.n = n;
  report.sigma_z = z_sigma(n);
  const auto base_std = standardize(base->values);
  for (const auto& v : vectors) {
    if (v.spec == baseline) continue;
    const double r = pearson_r(standardize(v.values), base_std);
    if (std::abs(r) >= kPerfectCorrelation) continue;
    report.compared.push_back({v.spec, r, fisher_z(r)});
  }
  for (std::size_t a = 0; a < report.compared.size(); ++a) {
    for (std::size_t b = a + 1; b < report.compared.size(); ++b) {
      const auto& ca = report.compared[a];
      const auto& cb = report.compared[b];
      report.pairwise.push_back(compare_z(ca.z, cb.z, n, ca.spec, cb.spec));
    }
  }
  return report;
}

const std::vector<double>& axis_values(const FitResult& fit, Axis axis) {
  return axis == Axis::Persons ? fit.params.theta : fit.params.beta;
}

RankedTable ranked_table(const std::vector<FitResult>& results, Axis axis,
                         const ModelSpec& sort_by) {
  if (results.empty()) throw DomainError("ranked_table needs at least one fit");
  const auto& labels =
      axis == Axis::Persons ? results.front().person_ids : results.front().item_ids;
  for (const auto& fit : results) {
    const auto& own = axis == Axis::Persons ? fit.person_ids : fit.item_ids;
    if (own != labels || axis_values(fit, axis).size() != labels.size())
      throw DomainError("ranked_table: fits were not made on the same matrix");
  }

  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return column_rank(results[a].spec.kind) < column_rank(results[b].spec.kind);
  });

  RankedTable table;
  table.axis = axis;
  table.sort_by = sort_by;
  std::vector<std::vector<double>> columns;
  std::optional<std::size_t> key;
  for (auto k : order) {
    table.columns.push_back(results[k].spec);
    columns.push_back(standardize(axis_values(results[k], axis)));
    if (!key && results[k].spec == sort_by) key = columns.size() - 1;
  }
  if (!key) throw DomainError("ranked_table: sort_by model not among the results");

  std::vector<std::size_t> rows(labels.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto& sort_col = columns[*key];
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    return axis == Axis::Persons ? sort_col[a] > sort_col[b] : sort_col[a] < sort_col[b];
  });
  for (auto idx : rows) {
    RankedTable::Row row{labels[idx], idx, {}};
    for (const auto& col : columns) row.values.push_back(col[idx]);
    table.rows.push_back(std::move(row));
  }

  if (columns.size() >= 2) {
    table.has_footer = true;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c == *key) {
        table.r.emplace_back();
        table.z.emplace_back();
        continue;
      }
      const double r = pearson_r(columns[c], sort_col);
      if (std::abs(r) >= kPerfectCorrelation) {
        table.r.emplace_back();
        table.z.emplace_back();
      } else {
        table.r.emplace_back(r);
        table.z.emplace_back(fisher_z(r));
      }
    }
  }
  return table;
}

}  // namespace irtcal
