// Simulate-then-fit at 500 x 60 for each model kind and print the theta
// recovery correlation. The output fixed the bounds in
// tests/recovery_fixture.hpp.

#include <cstdio>
#include <vector>

#include "irtcal/analysis.hpp"
#include "irtcal/estimation.hpp"
#include "irtcal/simulation.hpp"
#include "../tests/recovery_fixture.hpp"

using namespace irtcal;

int main() {
  for (const auto& c : testing::kRecoveryCases) {
    const auto pop = sample_population(testing::kRecoveryPersons, testing::kRecoveryItems,
                                       c.population_seed, c.d_spread);
    const ModelSpec spec{c.kind, LinkFunction::NormalOgive};
    const auto m = simulate(
        {spec, pop, c.response_seed, testing::kRecoveryPersons, testing::kRecoveryItems});
    const auto fit = estimate(m, spec);
    std::vector<double> truth;
    for (auto i : fit.kept_persons) truth.push_back(pop.theta[i]);
    const double r = pearson_r(standardize(truth), standardize(fit.params.theta));
    std::printf("%-10s seed %llu  r = %.4f  iterations %zu%s\n",
                std::string(to_string(c.kind)).c_str(),
                static_cast<unsigned long long>(c.population_seed), r, fit.iterations,
                fit.converged ? "" : " (not converged)");
  }
}
