#include "irtcal/ctt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace irtcal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pearson_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) throw UndefinedCorrelation("fewer than two paired observations");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw UndefinedCorrelation("zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double row_total(const ResponseMatrix& m, std::size_t i) {
  double s = 0;
  for (auto c : m.row(i)) s += c == 1 ? 1.0 : 0.0;
  return s;
}

double column_total(const ResponseMatrix& m, std::size_t j) {
  double s = 0;
  for (std::size_t i = 0; i < m.n_persons(); ++i) s += m(i, j) == 1 ? 1.0 : 0.0;
  return s;
}

double correlation_or_nan(auto&& fn) {
  try {
    return fn();
  } catch (const UndefinedCorrelation&) {
    return kNaN;
  }
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

double item_difficulty(const ResponseMatrix& matrix, std::size_t item) {
  if (item >= matrix.n_items()) throw DomainError("item index out of range");
  std::size_t answered = 0, wrong = 0;
  for (std::size_t i = 0; i < matrix.n_persons(); ++i) {
    const auto c = matrix(i, item);
    if (c == ResponseMatrix::kMissing) continue;
    ++answered;
    if (c == 0) ++wrong;
  }
  if (answered == 0) throw DomainError("item " + matrix.item_ids()[item] + " has no responses");
  return static_cast<double>(wrong) / static_cast<double>(answered);
}

double item_total_correlation(const ResponseMatrix& matrix, std::size_t item, bool corrected) {
  if (item >= matrix.n_items()) throw DomainError("item index out of range");
  std::vector<double> x, totals;
  for (std::size_t i = 0; i < matrix.n_persons(); ++i) {
    const auto c = matrix(i, item);
    if (c == ResponseMatrix::kMissing) continue;
    x.push_back(c);
    totals.push_back(row_total(matrix, i) - (corrected ? c : 0));
  }
  return pearson_pairs(x, totals);
}

double person_total_correlation(const ResponseMatrix& matrix, std::size_t person,
                                bool corrected) {
  if (person >= matrix.n_persons()) throw DomainError("person index out of range");
  std::vector<double> x, totals;
  for (std::size_t j = 0; j < matrix.n_items(); ++j) {
    const auto c = matrix(person, j);
    if (c == ResponseMatrix::kMissing) continue;
    x.push_back(c);
    totals.push_back(column_total(matrix, j) - (corrected ? c : 0));
  }
  return pearson_pairs(x, totals);
}

std::size_t person_flag_limit(double quota, std::size_t n_persons) {
  // The epsilon keeps products such as 0.05 * 40 from rounding up.
  const double raw = quota * static_cast<double>(n_persons);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

CleanResult clean_test(const ResponseMatrix& matrix, const CttOptions& options) {
  if (!std::isfinite(options.item_r_threshold))
    throw DomainError("item correlation threshold must be finite");
  if (!(options.person_quota >= 0.0 && options.person_quota <= 0.05))
    throw DomainError("person quota must lie in [0, 0.05]");

  CttReport report;
  report.options = options;
  report.difficulty.resize(matrix.n_items());
  for (std::size_t j = 0; j < matrix.n_items(); ++j)
    report.difficulty[j] = item_difficulty(matrix, j);
  report.item_total_r.assign(matrix.n_items(), kNaN);

  const auto all_persons = iota_indices(matrix.n_persons());
  std::vector<std::size_t> kept = iota_indices(matrix.n_items());
  while (true) {
    const ResponseMatrix current = matrix.select(all_persons, kept);
    std::vector<std::size_t> next;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const double r = correlation_or_nan(
          [&] { return item_total_correlation(current, k, options.corrected); });
      report.item_total_r[kept[k]] = r;
      const double decisive = std::isnan(r) ? 0.0 : r;
      if (decisive < options.item_r_threshold)
        report.flagged_items.push_back(kept[k]);
      else
        next.push_back(kept[k]);
    }
    const bool changed = next.size() != kept.size();
    if (next.size() < 2)
      throw RefusalError("cleaning would leave " + std::to_string(next.size()) +
                         " items; at least 2 are required");
    kept = std::move(next);
    if (!options.fixpoint || !changed) break;
  }
  std::sort(report.flagged_items.begin(), report.flagged_items.end());

  const ResponseMatrix reduced = matrix.select(all_persons, kept);
  report.person_total_r.resize(matrix.n_persons());
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < matrix.n_persons(); ++i) {
    const double r = correlation_or_nan(
        [&] { return person_total_correlation(reduced, i, options.corrected); });
    report.person_total_r[i] = r;
    if (!std::isnan(r) && r < options.item_r_threshold) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return report.person_total_r[a] < report.person_total_r[b];
  });
  const std::size_t limit = person_flag_limit(options.person_quota, matrix.n_persons());
  if (candidates.size() > limit) candidates.resize(limit);
  report.flagged_persons = candidates;

  std::vector<std::size_t> persons = all_persons;
  if (options.remove_persons) {
    std::erase_if(persons, [&](std::size_t i) {
      return std::find(candidates.begin(), candidates.end(), i) != candidates.end();
    });
    if (persons.size() < 2)
      throw RefusalError("cleaning would leave fewer than 2 persons");
  }
  report.kept_items = kept;
  report.kept_persons = persons;
  return {matrix.select(persons, kept), std::move(report)};
}

}  // namespace irtcal
