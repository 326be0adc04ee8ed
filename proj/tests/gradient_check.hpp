#pragma once

// Compares loglik_gradient with central differences of log_likelihood on
// random instances.

#include <algorithm>
#include <cmath>
#include <random>

#include "irtcal/estimation.hpp"

namespace irtcal::testing {

struct Instance {
  ResponseMatrix matrix;
  ParameterSet params;
};

// Random matrix (about 10% missing) and random parameters in a moderate range.
inline Instance random_instance(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> dim(3, 9);
  const std::size_t np = dim(gen), ni = dim(gen);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> z(0, 1);
  std::vector<std::vector<int>> rows(np, std::vector<int>(ni));
  for (auto& r : rows)
    for (auto& c : r) c = u(gen) < 0.1 ? -1 : (u(gen) < 0.5 ? 1 : 0);
  ParameterSet p(np, ni);
  for (auto& t : p.theta) t = 1.5 * z(gen);
  for (auto& b : p.beta) b = 1.5 * z(gen);
  for (auto& d : p.d_person) d = std::exp(std::log(0.3) + u(gen) * std::log(4.0 / 0.3));
  for (auto& d : p.d_item) d = std::exp(std::log(0.3) + u(gen) * std::log(4.0 / 0.3));
  return {ResponseMatrix::from_rows(rows), p};
}

// Largest componentwise relative error |analytic - numeric| / max(|analytic|,
// |numeric|, floor). The floor keeps components that are zero up to rounding
// from dividing by nothing.
inline double max_gradient_error(const Instance& inst, const ModelSpec& spec, double h = 1e-5,
                                 double floor = 1e-3) {
  const auto g = loglik_gradient(inst.matrix, inst.params, spec);
  double worst = 0;
  auto probe = [&](std::vector<double> ParameterSet::*field, const std::vector<double>& analytic) {
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      ParameterSet plus = inst.params, minus = inst.params;
      (plus.*field)[k] += h;
      (minus.*field)[k] -= h;
      const double numeric = (log_likelihood(inst.matrix, plus, spec) -
                              log_likelihood(inst.matrix, minus, spec)) /
                             (2 * h);
      const double scale = std::max({std::abs(analytic[k]), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(analytic[k] - numeric) / scale);
    }
  };
  probe(&ParameterSet::theta, g.theta);
  probe(&ParameterSet::beta, g.beta);
  probe(&ParameterSet::d_person, g.d_person);
  probe(&ParameterSet::d_item, g.d_item);
  return worst;
}

}  // namespace irtcal::testing
