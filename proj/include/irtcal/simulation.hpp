#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "irtcal/model.hpp"

namespace irtcal {

/// Deterministic stream used by the simulator.
///
/// std::mt19937_64 seeded with the 64-bit seed. A uniform draw takes the top
/// 53 bits of one engine output: u = (x >> 11) * 2^-53, so u is in [0, 1).
/// A normal draw consumes two uniforms (Box-Muller, cosine branch only):
/// sqrt(-2 ln(1 - u1)) * cos(2 pi u2). None of the implementation-defined
/// <random> distributions are used, so streams are identical on every
/// platform.
class SimulationRng {
 public:
  explicit SimulationRng(std::uint64_t seed) : gen_(seed) {}

  double uniform();
  double normal();

 private:
  std::mt19937_64 gen_;
};

struct SimulationScenario {
  ModelSpec spec;
  ParameterSet true_params;
  std::uint64_t seed = 0;
  std::size_t n_persons = 0;
  std::size_t n_items = 0;
};

/// Draws one response per cell, row-major (person 0 items 0..n-1, person 1,
/// ...). Cell (i, j) is 1 iff uniform() < success_probability with the
/// discriminations of sides the model keeps fixed taken as sqrt(2).
/// Throws DomainError if the scenario dimensions disagree.
ResponseMatrix simulate(const SimulationScenario& scenario);

/// Population for simulation studies, drawn in this order from one stream:
/// theta (n_persons normals), beta (n_items normals), d_person, d_item.
/// Discriminations are sqrt(2) * exp(d_spread * z), clamped to
/// [d_lower, d_upper].
ParameterSet sample_population(std::size_t n_persons, std::size_t n_items,
                               std::uint64_t seed, double d_spread,
                               double d_lower = 0.2, double d_upper = 5.0);

}  // namespace irtcal
