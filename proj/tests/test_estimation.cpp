#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gradient_check.hpp"
#include "irtcal/estimation.hpp"
#include "irtcal/simulation.hpp"
#include "oracles.hpp"

using namespace irtcal;

namespace {

constexpr ModelKind kAllKinds[] = {ModelKind::Rasch, ModelKind::TwoParamItem,
                                   ModelKind::TwoParamPerson, ModelKind::ThreeParam};

ResponseMatrix simulated(std::size_t np, std::size_t ni, std::uint64_t seed, ModelSpec spec,
                         double spread, ParameterSet* truth = nullptr) {
  auto pop = sample_population(np, ni, seed, spread);
  if (truth) *truth = pop;
  return simulate({spec, pop, seed ^ 0xA5A5u, np, ni});
}

EstimationConfig tight() {
  EstimationConfig cfg;
  cfg.tolerance = 1e-10;
  cfg.max_iterations = 20000;
  return cfg;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST_CASE("config validation") {
  EstimationConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.d_lower = 1.5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.tolerance = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.step_damping = 1.5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.d_lower = cfg.d_upper = std::sqrt(2.0);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("log likelihood examples") {
  const ModelSpec rasch{ModelKind::Rasch, LinkFunction::Logistic};
  ResponseMatrix one{{1, -1}, {-1, -1}};
  CHECK(log_likelihood(one, ParameterSet(2, 2), rasch) == doctest::Approx(std::log(0.5)));
  ResponseMatrix two{{1, 0}, {-1, -1}};
  CHECK(log_likelihood(two, ParameterSet(2, 2), rasch) == doctest::Approx(2 * std::log(0.5)));

  ResponseMatrix all{{1, 1}, {1, 1}};
  ParameterSet far(2, 2);
  far.theta = {60, 60};
  far.beta = {-60, -60};
  for (auto link : {LinkFunction::Logistic, LinkFunction::NormalOgive}) {
    const double ll = log_likelihood(all, far, {ModelKind::Rasch, link});
    CHECK(std::isfinite(ll));
    CHECK(ll >= 4 * std::log1p(-kProbabilityFloor) - 1e-15);
    CHECK(ll <= 0);
    // wrong way round is clamped at the floor, still finite
    const double bad = log_likelihood(all.complemented(), far, {ModelKind::Rasch, link});
    CHECK(bad == doctest::Approx(4 * std::log(kProbabilityFloor)));
  }
  CHECK_THROWS_AS(log_likelihood(one, ParameterSet(3, 2), rasch), DomainError);
  CHECK_THROWS_AS(loglik_gradient(one, ParameterSet(2, 3), rasch), DomainError);
}

TEST_CASE("fixed sides ignore stored discriminations") {
  std::mt19937_64 gen(7);
  auto inst = testing::random_instance(gen);
  const ModelSpec rasch{ModelKind::Rasch, LinkFunction::NormalOgive};
  CHECK(log_likelihood(inst.matrix, inst.params, rasch) ==
        log_likelihood(inst.matrix, inst.params.with_fixings(ModelKind::Rasch), rasch));
  const auto g = loglik_gradient(inst.matrix, inst.params, rasch);
  CHECK(g.d_person.empty());
  CHECK(g.d_item.empty());
  const auto g2 = loglik_gradient(inst.matrix, inst.params, {ModelKind::TwoParamItem, rasch.link});
  CHECK(g2.d_person.empty());
  CHECK(g2.d_item.size() == inst.matrix.n_items());
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 gen(424242);
  for (auto link : {LinkFunction::Logistic, LinkFunction::NormalOgive})
    for (auto kind : kAllKinds)
      for (int k = 0; k < 20; ++k) {
        const auto inst = testing::random_instance(gen);
        CHECK(testing::max_gradient_error(inst, {kind, link}) < 1e-5);
      }
}

TEST_CASE("rasch gradient formula") {
  std::mt19937_64 gen(99);
  const auto inst = testing::random_instance(gen);
  const ModelSpec rasch{ModelKind::Rasch, LinkFunction::Logistic};
  const auto g = loglik_gradient(inst.matrix, inst.params, rasch);
  for (std::size_t i = 0; i < inst.matrix.n_persons(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < inst.matrix.n_items(); ++j) {
      if (inst.matrix.missing(i, j)) continue;
      s += inst.matrix(i, j) - 1.0 / (1.0 + std::exp(-(inst.params.theta[i] - inst.params.beta[j])));
    }
    CHECK(g.theta[i] == doctest::Approx(s).epsilon(1e-12));
  }
  ResponseMatrix single{{1, -1}, {-1, -1}};
  ParameterSet p(2, 2);
  p.theta[0] = 0.4;
  p.beta[0] = -0.3;
  const auto gs = loglik_gradient(single, p, rasch);
  CHECK(gs.theta[0] == -gs.beta[0]);
}

TEST_CASE("rasch recovery and exclusions") {
  ParameterSet truth;
  const ModelSpec spec{ModelKind::Rasch, LinkFunction::Logistic};
  auto m = simulated(200, 40, 2024, spec, 0.0, &truth);
  const auto fit = estimate_rasch(m, LinkFunction::Logistic);
  CHECK(fit.converged);
  std::vector<double> t;
  for (auto i : fit.kept_persons) t.push_back(truth.theta[i]);
  CHECK(oracle::pearson(t, fit.params.theta) >= 0.9);
  const double mean =
      std::accumulate(fit.params.theta.begin(), fit.params.theta.end(), 0.0) / fit.params.theta.size();
  CHECK(std::abs(mean) < 1e-12);

  ResponseMatrix with_extremes{{1, 1, 1, 1}, {1, 0, 1, 0}, {0, 1, 1, 0}, {1, 0, 0, 1}, {0, 0, 1, 1}};
  const auto fe = estimate_rasch(with_extremes, LinkFunction::Logistic);
  CHECK(std::find(fe.excluded_persons.begin(), fe.excluded_persons.end(), 0u) !=
        fe.excluded_persons.end());
  CHECK(fe.params.n_persons() == fe.kept_persons.size());
  CHECK(fe.person_ids.size() == fe.kept_persons.size());

  ResponseMatrix hopeless{{1, 1, 1}, {1, 1, 0}, {0, 0, 0}};
  CHECK_THROWS_AS(estimate_rasch(hopeless, LinkFunction::Logistic), RefusalError);
  ResponseMatrix empty_row{{1, 0}, {-1, -1}, {0, 1}};
  CHECK_THROWS_AS(estimate_rasch(empty_row, LinkFunction::Logistic), DomainError);
}

TEST_CASE("penalize keeps every row") {
  ResponseMatrix m{{1, 1, 1, 1}, {1, 0, 1, 0}, {0, 1, 1, 0}, {1, 0, 0, 1}, {0, 0, 0, 0}};
  EstimationConfig cfg;
  cfg.extreme_score_policy = ExtremeScorePolicy::Penalize;
  for (auto kind : kAllKinds) {
    const auto fit = estimate(m, {kind, LinkFunction::Logistic}, cfg);
    CHECK(fit.excluded_persons.empty());
    CHECK(fit.params.n_persons() == 5);
    for (double t : fit.params.theta) CHECK(std::isfinite(t));
    CHECK(fit.params.theta[0] > fit.params.theta[1]);
    CHECK(fit.params.theta[4] < fit.params.theta[3]);
    for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k)
      CHECK(fit.loglik_trace[k] >= fit.loglik_trace[k - 1] - 1e-9);
  }
}

TEST_CASE("identical rows get identical theta") {
  auto m = simulated(30, 12, 5, {ModelKind::Rasch, LinkFunction::NormalOgive}, 0.0);
  std::vector<std::vector<int>> rows;
  for (std::size_t i = 0; i < m.n_persons(); ++i) rows.emplace_back(m.row(i).begin(), m.row(i).end());
  rows[7] = {1, 1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0};
  rows[19] = rows[7];
  const auto dup = ResponseMatrix::from_rows(rows);
  const auto fit = estimate_rasch(dup, LinkFunction::NormalOgive, tight());
  auto pos = [&](std::size_t orig) {
    return std::find(fit.kept_persons.begin(), fit.kept_persons.end(), orig) -
           fit.kept_persons.begin();
  };
  CHECK(fit.params.theta[pos(7)] == doctest::Approx(fit.params.theta[pos(19)]).epsilon(1e-10));
}

TEST_CASE("reduction identity with frozen discriminations") {
  auto m = simulated(46, 44, 77, {ModelKind::ThreeParam, LinkFunction::NormalOgive}, 0.3);
  for (auto link : {LinkFunction::Logistic, LinkFunction::NormalOgive}) {
    auto cfg = tight();
    const auto rasch = estimate_rasch(m, link, cfg);
    cfg.d_lower = cfg.d_upper = std::sqrt(2.0);
    const auto three = estimate(m, {ModelKind::ThreeParam, link}, cfg);
    CHECK(max_abs_diff(three.params.theta, rasch.params.theta) < 1e-6);
    CHECK(max_abs_diff(three.params.beta, rasch.params.beta) < 1e-6);
  }
}

TEST_CASE("monotone ascent and nested ordering") {
  for (auto link : {LinkFunction::Logistic, LinkFunction::NormalOgive})
    for (std::uint64_t seed : {3u, 11u}) {
      auto m = simulated(46, 44, seed, {ModelKind::ThreeParam, link}, 0.4);
      const EstimationConfig cfg;
      const auto rasch = estimate_rasch(m, link, cfg);
      std::vector<FitResult> fits;
      for (auto kind : kAllKinds) fits.push_back(estimate(m, {kind, link}, cfg, rasch));
      for (const auto& f : fits) {
        CHECK(f.loglik_trace.size() == f.iterations + 1);
        for (std::size_t k = 1; k < f.loglik_trace.size(); ++k)
          CHECK(f.loglik_trace[k] >= f.loglik_trace[k - 1] - 1e-9);
        CHECK(f.final_loglik() <= 0);
      }
      CHECK(fits[1].final_loglik() >= fits[0].final_loglik() - 1e-6);
      CHECK(fits[2].final_loglik() >= fits[0].final_loglik() - 1e-6);
      CHECK(fits[3].final_loglik() >= fits[1].final_loglik() - 1e-6);
      CHECK(fits[3].final_loglik() >= fits[2].final_loglik() - 1e-6);
    }
}

TEST_CASE("fitted discriminations respect bounds") {
  auto m = simulated(60, 30, 8, {ModelKind::ThreeParam, LinkFunction::Logistic}, 1.0);
  EstimationConfig cfg;
  cfg.d_lower = 0.5;
  cfg.d_upper = 3.0;
  const auto f = estimate(m, {ModelKind::ThreeParam, LinkFunction::Logistic}, cfg);
  for (double d : f.params.d_person) CHECK((d >= 0.5 && d <= 3.0));
  for (double d : f.params.d_item) CHECK((d >= 0.5 && d <= 3.0));
}

TEST_CASE("gradient vanishes at the optimum") {
  auto m = simulated(40, 20, 21, {ModelKind::Rasch, LinkFunction::Logistic}, 0.0);
  const ModelSpec spec{ModelKind::TwoParamItem, LinkFunction::Logistic};
  const auto f = estimate(m, spec, tight());
  const auto reduced = m.select(f.kept_persons, f.kept_items);
  const auto g = loglik_gradient(reduced, f.params, spec);
  double norm = 0;
  for (double v : g.theta) norm += v * v;
  for (double v : g.beta) norm += v * v;
  for (std::size_t j = 0; j < g.d_item.size(); ++j) {
    // a d pinned at a bound need not have zero slope
    if (f.params.d_item[j] > 0.2 + 1e-9 && f.params.d_item[j] < 5.0 - 1e-9)
      norm += g.d_item[j] * g.d_item[j];
  }
  CHECK(std::sqrt(norm) < 1e-4);
}

TEST_CASE("person permutation is equivariant") {
  auto m = simulated(40, 15, 31, {ModelKind::ThreeParam, LinkFunction::NormalOgive}, 0.3);
  std::vector<std::size_t> perm(m.n_persons()), items(m.n_items());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::iota(items.begin(), items.end(), std::size_t{0});
  std::mt19937_64 gen(5);
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto pm = m.select(perm, items);
  // only summation order differs, so fit both right down to rounding
  auto cfg = tight();
  cfg.tolerance = 1e-13;
  for (auto kind : {ModelKind::Rasch, ModelKind::TwoParamItem}) {
    const ModelSpec spec{kind, LinkFunction::NormalOgive};
    const auto a = estimate(m, spec, cfg);
    const auto b = estimate(pm, spec, cfg);
    REQUIRE(a.kept_persons.size() == b.kept_persons.size());
    CHECK(max_abs_diff(a.params.beta, b.params.beta) < 1e-9);
    for (std::size_t k = 0; k < b.kept_persons.size(); ++k) {
      const auto orig = perm[b.kept_persons[k]];
      const auto at = std::find(a.kept_persons.begin(), a.kept_persons.end(), orig) -
                      a.kept_persons.begin();
      CHECK(std::abs(a.params.theta[at] - b.params.theta[k]) < 1e-9);
    }
  }
}

TEST_CASE("transpose duality") {
  for (auto link : {LinkFunction::Logistic, LinkFunction::NormalOgive}) {
    auto m = simulated(36, 24, 13, {ModelKind::ThreeParam, link}, 0.4);
    const auto dual = m.transposed().complemented();
    const auto person = estimate(m, {ModelKind::TwoParamPerson, link}, tight());
    const auto item = estimate(dual, {ModelKind::TwoParamItem, link}, tight());
    CHECK(std::abs(person.final_loglik() - item.final_loglik()) < 1e-6);
    // the dual parameters evaluate to the same likelihood in the original layout
    ParameterSet mapped(item.params.n_items(), item.params.n_persons());
    mapped.theta = item.params.beta;
    mapped.beta = item.params.theta;
    mapped.d_person = item.params.d_item;
    mapped.d_item = item.params.d_person;
    const auto reduced = m.select(item.kept_items, item.kept_persons);
    CHECK(std::abs(log_likelihood(reduced, mapped, {ModelKind::TwoParamPerson, link}) -
                   person.final_loglik()) < 1e-6);
  }
}

TEST_CASE("logistic and normal thetas differ by about 1.7") {
  auto m = simulated(300, 40, 17, {ModelKind::Rasch, LinkFunction::NormalOgive}, 0.0);
  const auto lg = estimate_rasch(m, LinkFunction::Logistic);
  const auto nm = estimate_rasch(m, LinkFunction::NormalOgive);
  REQUIRE(lg.kept_persons == nm.kept_persons);
  CHECK(oracle::pearson(lg.params.theta, nm.params.theta) > 0.999);
  const double slope = oracle::ols_slope(nm.params.theta, lg.params.theta);
  CHECK(slope >= 1.6);
  CHECK(slope <= 1.8);
}

TEST_CASE("warm start must match") {
  auto m = simulated(20, 10, 1, {ModelKind::Rasch, LinkFunction::Logistic}, 0.0);
  const auto r = estimate_rasch(m, LinkFunction::Logistic);
  CHECK_THROWS_AS(estimate(m, {ModelKind::ThreeParam, LinkFunction::NormalOgive}, {}, r),
                  DomainError);
}
