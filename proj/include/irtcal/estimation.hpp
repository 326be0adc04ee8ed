#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "irtcal/model.hpp"

namespace irtcal {

enum class ExtremeScorePolicy {
  Exclude,   // drop all-correct / all-wrong persons and items before fitting
  Penalize,  // keep them; add -kPenaltyWeight * (sum theta^2 + sum beta^2)
};

inline constexpr double kPenaltyWeight = 0.01;

struct EstimationConfig {
  std::size_t max_iterations = 500;
  double tolerance = 1e-4;  // max absolute parameter change per sweep
  double d_lower = 0.2;
  double d_upper = 5.0;
  double step_damping = 1.0;  // in (0, 1]; scales every Newton step
  ExtremeScorePolicy extreme_score_policy = ExtremeScorePolicy::Exclude;

  /// Throws DomainError unless tolerance > 0, 0 < d_lower <= sqrt(2) <=
  /// d_upper and 0 < step_damping <= 1.
  void validate() const;
};

/// Outcome of a joint maximum-likelihood fit.
///
/// `params` is indexed by the fitted matrix, which is the input minus any
/// excluded persons and items; `kept_persons` / `kept_items` map back to
/// input indices. `loglik_trace` holds the objective before the first sweep
/// and after each sweep (penalized under ExtremeScorePolicy::Penalize).
struct FitResult {
  ModelSpec spec;
  ParameterSet params;
  std::vector<double> loglik_trace;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::size_t> excluded_persons;
  std::vector<std::size_t> excluded_items;
  std::vector<std::size_t> kept_persons;
  std::vector<std::size_t> kept_items;
  std::vector<std::string> person_ids;
  std::vector<std::string> item_ids;

  double final_loglik() const { return loglik_trace.back(); }
};

/// Sum over non-missing cells of x ln P + (1 - x) ln(1 - P). Discriminations
/// of sides that `spec` keeps fixed are taken as sqrt(2) whatever `params`
/// holds. Throws DomainError on a dimension mismatch.
double log_likelihood(const ResponseMatrix& matrix, const ParameterSet& params,
                      const ModelSpec& spec);

/// Partial derivatives of log_likelihood. Blocks that `spec` keeps fixed are
/// returned empty.
struct Gradient {
  std::vector<double> theta;
  std::vector<double> beta;
  std::vector<double> d_person;
  std::vector<double> d_item;
};

Gradient loglik_gradient(const ResponseMatrix& matrix, const ParameterSet& params,
                         const ModelSpec& spec);

/// Rasch fit (both discriminations sqrt(2)) with mean(theta) = 0.
FitResult estimate_rasch(const ResponseMatrix& matrix, LinkFunction link,
                         const EstimationConfig& cfg = {});

/// Fits any model, warm-starting from a Rasch fit of the same link.
FitResult estimate(const ResponseMatrix& matrix, const ModelSpec& spec,
                   const EstimationConfig& cfg = {});

/// As above with the Rasch warm start supplied by the caller. `rasch` must
/// come from estimate_rasch on the same matrix, link and config.
FitResult estimate(const ResponseMatrix& matrix, const ModelSpec& spec,
                   const EstimationConfig& cfg, const FitResult& rasch);

}  // namespace irtcal
