#include <doctest.h>

#include <cmath>
#include <random>

#include "irtcal/simulation.hpp"

using namespace irtcal;

TEST_CASE("rng stream is the documented one") {
  SimulationRng rng(42);
  std::mt19937_64 ref(42);
  for (int k = 0; k < 100; ++k) {
    const double u = static_cast<double>(ref() >> 11) * 0x1.0p-53;
    CHECK(rng.uniform() == u);
  }
  SimulationRng a(9);
  std::mt19937_64 r2(9);
  for (int k = 0; k < 50; ++k) {
    const double u1 = static_cast<double>(r2() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(r2() >> 11) * 0x1.0p-53;
    const double z = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
    CHECK(a.normal() == doctest::Approx(z).epsilon(1e-15));
  }
}

TEST_CASE("sample population") {
  const auto a = sample_population(20, 10, 5, 0.4);
  const auto b = sample_population(20, 10, 5, 0.4);
  CHECK(a.theta == b.theta);
  CHECK(a.d_item == b.d_item);
  CHECK(sample_population(20, 10, 6, 0.4).theta != a.theta);

  const auto flat = sample_population(30, 12, 1, 0.0);
  for (double d : flat.d_person) CHECK(d == kFixedDiscrimination);
  for (double d : flat.d_item) CHECK(d == kFixedDiscrimination);

  const auto wide = sample_population(500, 100, 2, 3.0, 0.5, 3.0);
  for (double d : wide.d_person) CHECK((d >= 0.5 && d <= 3.0));

  const auto big = sample_population(10000, 2, 3, 0.3);
  double m = 0;
  for (double t : big.theta) m += t;
  m /= big.theta.size();
  CHECK(std::abs(m) < 0.03);
}

TEST_CASE("simulate") {
  const ModelSpec spec{ModelKind::ThreeParam, LinkFunction::NormalOgive};
  auto pop = sample_population(30, 20, 4, 0.5);
  const SimulationScenario sc{spec, pop, 77, 30, 20};
  CHECK(simulate(sc) == simulate(sc));
  CHECK(simulate(sc).person_ids()[0] == "P1");

  // row-major, one uniform per cell
  const auto m = simulate(sc);
  SimulationRng rng(77);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 20; ++j) {
      const double p = success_probability(spec, pop.theta[i], pop.beta[j], pop.d_person[i],
                                           pop.d_item[j]);
      CHECK(m(i, j) == (rng.uniform() < p ? 1 : 0));
    }

  ParameterSet easy(5, 4);
  for (auto& t : easy.theta) t = 10;
  for (auto& b : easy.beta) b = -10;
  const auto all = simulate({{ModelKind::Rasch, LinkFunction::Logistic}, easy, 1, 5, 4});
  for (auto c : all.cells()) CHECK(c == 1);

  SimulationScenario bad = sc;
  bad.n_items = 21;
  CHECK_THROWS_AS(simulate(bad), DomainError);

  // fixed sides are read as sqrt(2) whatever the scenario holds
  auto odd = pop;
  for (auto& d : odd.d_person) d = 4.0;
  const ModelSpec item{ModelKind::TwoParamItem, LinkFunction::NormalOgive};
  auto fixed = pop;
  for (auto& d : fixed.d_person) d = kFixedDiscrimination;
  CHECK(simulate({item, odd, 3, 30, 20}) == simulate({item, fixed, 3, 30, 20}));
}

TEST_CASE("binomial concentration") {
  ParameterSet level(100, 100);
  const auto m = simulate({{ModelKind::Rasch, LinkFunction::Logistic}, level, 123, 100, 100});
  double s = 0;
  for (auto c : m.cells()) s += c;
  CHECK(std::abs(s / 1e4 - 0.5) < 0.02);

  // a cell's empirical mean over replications, 3 sigma
  const ModelSpec spec{ModelKind::ThreeParam, LinkFunction::Logistic};
  ParameterSet p(2, 2);
  p.theta = {0.8, -0.4};
  p.beta = {0.1, 0.5};
  p.d_person = {0.9, 2.2};
  p.d_item = {1.7, 0.6};
  const int reps = 4000;
  double hits[2][2] = {};
  for (int r = 0; r < reps; ++r) {
    const auto x = simulate({spec, p, 1000u + r, 2, 2});
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) hits[i][j] += x(i, j);
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double pr = success_probability(spec, p.theta[i], p.beta[j], p.d_person[i], p.d_item[j]);
      const double sd = std::sqrt(pr * (1 - pr) / reps);
      CHECK(std::abs(hits[i][j] / reps - pr) < 3 * sd);
    }
}
