#include "irtcal/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace irtcal {

double SimulationRng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double SimulationRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ResponseMatrix simulate(const SimulationScenario& scenario) {
  const auto np = scenario.n_persons, ni = scenario.n_items;
  scenario.true_params.validate(np, ni);
  const ParameterSet p = scenario.true_params.with_fixings(scenario.spec.kind);
  SimulationRng rng(scenario.seed);
  std::vector<std::int8_t> cells(np * ni);
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < ni; ++j) {
      const double prob =
          success_probability(scenario.spec, p.theta[i], p.beta[j], p.d_person[i], p.d_item[j]);
      cells[i * ni + j] = rng.uniform() < prob ? 1 : 0;
    }
  }
  std::vector<std::string> pids, iids;
  for (std::size_t i = 1; i <= np; ++i) pids.push_back("P" + std::to_string(i));
  for (std::size_t j = 1; j <= ni; ++j) iids.push_back("I" + std::to_string(j));
  return ResponseMatrix(np, ni, std::move(cells), std::move(pids), std::move(iids));
}

ParameterSet sample_population(std::size_t n_persons, std::size_t n_items, std::uint64_t seed,
                               double d_spread, double d_lower, double d_upper) {
  if (n_persons < 2 || n_items < 2) throw DomainError("population needs at least 2x2");
  if (!(d_spread >= 0.0)) throw DomainError("d_spread must be non-negative");
  SimulationRng rng(seed);
  ParameterSet p(n_persons, n_items);
  for (double& t : p.theta) t = rng.normal();
  for (double& b : p.beta) b = rng.normal();
  auto draw_d = [&] {
    const double z = rng.normal();
    return std::clamp(kFixedDiscrimination * std::exp(d_spread * z), d_lower, d_upper);
  };
  for (double& d : p.d_person) d = draw_d();
  for (double& d : p.d_item) d = draw_d();
  return p;
}

}  // namespace irtcal
