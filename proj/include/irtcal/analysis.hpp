#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irtcal/estimation.hpp"
#include "irtcal/model.hpp"

namespace irtcal {

enum class SdDenominator {
  Sample,      // n - 1
  Population,  // n
};

/// Linear map to mean 0 and standard deviation 1. Order is preserved.
/// Throws DomainError for fewer than 2 values or zero variance.
std::vector<double> standardize(std::span<const double> values,
                                SdDenominator denominator = SdDenominator::Sample);

/// Pearson product-moment correlation. Requires equal lengths >= 3 and
/// nonzero variance in both series; throws DomainError otherwise.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Fisher's z = 0.5 ln((1 + r) / (1 - r)). Throws DomainError for |r| >= 1.
double fisher_z(double r);

/// Standard deviation of z for a sample of n: sqrt(1 / (n - 3)). n >= 4.
double z_sigma(std::size_t n);

/// One-sided 10% critical value for delta / sigma_delta.
inline constexpr double kCriticalRatio10pct = 1.64;

struct ModelCorrelation {
  ModelSpec spec;
  double r;
  double z;
};

/// Difference of two z values against sigma_delta = sqrt(2) * sigma_z.
struct PairwiseComparison {
  ModelSpec a;
  ModelSpec b;
  double delta;        // |z_a - z_b|
  double sigma_delta;
  double ratio;        // delta / sigma_delta
  bool significant_at_10pct;  // ratio >= kCriticalRatio10pct
};

PairwiseComparison compare_z(double z_a, double z_b, std::size_t n, ModelSpec a = {},
                             ModelSpec b = {});

struct ComparisonReport {
  ModelSpec baseline;
  std::size_t n = 0;
  double sigma_z = 0.0;
  std::vector<ModelCorrelation> compared;
  std::vector<PairwiseComparison> pairwise;
};

struct ModelVector {
  ModelSpec spec;
  std::vector<double> values;
};

/// Correlates every standardized vector with the baseline's and tests each
/// pair of compared models. Entries whose spec equals the baseline, or that
/// correlate perfectly with it, are skipped. Throws DomainError if the
/// baseline is absent or lengths differ.
ComparisonReport compare_models(const std::vector<ModelVector>& vectors,
                                const ModelSpec& baseline, std::size_t n);

enum class Axis { Persons, Items };

/// Standardized estimates of several models side by side, one row per person
/// or item. Persons are sorted by decreasing value of the sort_by column,
/// items by increasing value. With two or more columns the footer holds r
/// and z of each column against sort_by (nullopt where skipped).
struct RankedTable {
  Axis axis = Axis::Persons;
  ModelSpec sort_by;
  std::vector<ModelSpec> columns;

  struct Row {
    std::string label;
    std::size_t index;  // position in the fitted matrix
    std::vector<double> values;
  };
  std::vector<Row> rows;

  bool has_footer = false;
  std::vector<std::optional<double>> r;
  std::vector<std::optional<double>> z;
};

/// Columns follow the order Rasch, item-discrimination 2PL,
/// person-discrimination 2PL, three-parameter. Throws DomainError when the
/// results were not fitted on the same persons and items or sort_by is
/// missing.
RankedTable ranked_table(const std::vector<FitResult>& results, Axis axis,
                         const ModelSpec& sort_by);

/// The values one model contributes to a table on `axis`: theta or beta.
const std::vector<double>& axis_values(const FitResult& fit, Axis axis);

}  // namespace irtcal
