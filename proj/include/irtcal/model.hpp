#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irtcal/errors.hpp"

namespace irtcal {

// Discrimination assigned to a side (persons or items) that a model does not
// estimate. With both sides at this value the combined discrimination is 1.
inline constexpr double kFixedDiscrimination = std::numbers::sqrt2;

// Probabilities entering a logarithm are clamped to [kProbabilityFloor,
// 1 - kProbabilityFloor].
inline constexpr double kProbabilityFloor = 1e-12;

// ---------------------------------------------------------------------------
// ResponseMatrix
// ---------------------------------------------------------------------------

/// Persons x items grid of dichotomous outcomes. Cells hold 0, 1 or
/// kMissing. Stored row-major; immutable after construction.
class ResponseMatrix {
 public:
  static constexpr std::int8_t kMissing = -1;

  ResponseMatrix(std::size_t n_persons, std::size_t n_items,
                 std::vector<std::int8_t> cells,
                 std::vector<std::string> person_ids,
                 std::vector<std::string> item_ids);

  /// Rows of 0/1/kMissing with generated labels P1.. and I1..
  ResponseMatrix(std::initializer_list<std::initializer_list<int>> rows);
  static ResponseMatrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t n_persons() const noexcept { return n_persons_; }
  std::size_t n_items() const noexcept { return n_items_; }

  std::int8_t operator()(std::size_t person, std::size_t item) const {
    return cells_[person * n_items_ + item];
  }
  bool missing(std::size_t person, std::size_t item) const {
    return (*this)(person, item) == kMissing;
  }

  std::span<const std::int8_t> row(std::size_t person) const {
    return {cells_.data() + person * n_items_, n_items_};
  }
  std::span<const std::int8_t> cells() const noexcept { return cells_; }

  const std::vector<std::string>& person_ids() const noexcept { return person_ids_; }
  const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }

  /// Items become persons and vice versa; labels swap with them.
  ResponseMatrix transposed() const;
  /// 0 <-> 1, missing stays missing.
  ResponseMatrix complemented() const;
  /// Submatrix keeping the listed persons and items in the given order.
  ResponseMatrix select(std::span<const std::size_t> persons,
                        std::span<const std::size_t> items) const;

  friend bool operator==(const ResponseMatrix&, const ResponseMatrix&) = default;

 private:
  std::size_t n_persons_;
  std::size_t n_items_;
  std::vector<std::int8_t> cells_;
  std::vector<std::string> person_ids_;
  std::vector<std::string> item_ids_;
};

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

enum class LinkFunction { Logistic, NormalOgive };

enum class ModelKind {
  Rasch,           // d_person = d_item = sqrt(2)
  TwoParamItem,    // Birnbaum, item discrimination free
  TwoParamPerson,  // Birnbaum variant, person discrimination free
  ThreeParam,      // both discriminations free
};

struct ModelSpec {
  ModelKind kind = ModelKind::Rasch;
  LinkFunction link = LinkFunction::Logistic;

  bool person_d_free() const noexcept {
    return kind == ModelKind::TwoParamPerson || kind == ModelKind::ThreeParam;
  }
  bool item_d_free() const noexcept {
    return kind == ModelKind::TwoParamItem || kind == ModelKind::ThreeParam;
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Short names used on the command line and in reports:
/// rasch, 2pl-item, 2pl-person, 3p.
std::string_view to_string(ModelKind kind);
std::string_view to_string(LinkFunction link);
std::optional<ModelKind> parse_model_kind(std::string_view name);
std::optional<LinkFunction> parse_link(std::string_view name);

/// Person and item parameters. Discrimination vectors are always full
/// length; sides a model keeps fixed hold kFixedDiscrimination.
struct ParameterSet {
  std::vector<double> theta;     // ability, one per person
  std::vector<double> beta;      // difficulty, one per item
  std::vector<double> d_person;  // > 0
  std::vector<double> d_item;    // > 0

  ParameterSet() = default;
  /// theta = beta = 0, all discriminations sqrt(2).
  ParameterSet(std::size_t n_persons, std::size_t n_items);

  std::size_t n_persons() const noexcept { return theta.size(); }
  std::size_t n_items() const noexcept { return beta.size(); }

  /// Throws DomainError unless the four vectors match the given dimensions
  /// and every discrimination is finite and positive.
  void validate(std::size_t n_persons, std::size_t n_items) const;

  /// Copy with the sides `kind` does not estimate reset to sqrt(2).
  ParameterSet with_fixings(ModelKind kind) const;
};

// ---------------------------------------------------------------------------
// Success functions
// ---------------------------------------------------------------------------

/// 1 / (1 + e^-x), evaluated without overflow for either sign of x. The
/// result reaches exactly 0 only below about -745 and exactly 1 above about
/// 37; callers that take logarithms clamp with kProbabilityFloor.
double logistic(double x) noexcept;

/// Standard normal distribution function via erfc, accurate to a few ulps
/// across the real line (no cancellation in the lower tail).
double normal_cdf(double x) noexcept;

/// Standard normal density.
double normal_pdf(double x) noexcept;

double link_probability(LinkFunction link, double x) noexcept;

/// d_i * d_j / sqrt(d_i^2 + d_j^2): the discrimination of a person-item pair
/// when their strength fluctuations add in variance (1/d_s^2 = 1/d_i^2 +
/// 1/d_j^2). Throws DomainError on nonpositive or non-finite input.
double combined_discrimination(double d_person, double d_item);

/// link(d_s * (theta - beta)).
double success_probability(const ModelSpec& spec, double theta, double beta,
                           double d_person, double d_item);

}  // namespace irtcal
