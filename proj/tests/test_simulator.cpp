#include <doctest.h>

#include <cmath>
#include <vector>

#include "ctmclearn/ctmc.hpp"
#include "ctmclearn/errors.hpp"
#include "ctmclearn/simulator.hpp"

using namespace ctmclearn;

namespace {

struct Mm1kFixture {
  ParametricModel model = ParametricModel::mm1k(2);
  Vector theta = (Vector(1) << 2.0).finished();
  UniformizedChain chain;
  SteadyState steady;

  Mm1kFixture() {
    chain = uniformize(build_rate_matrix(model, 1.0, theta));
    steady = steady_state(chain);
  }
};

}  // namespace

TEST_CASE("a single-state chain counts one tick per event plus the start") {
  Matrix p(1, 1);
  p << 1.0;
  auto chain = UniformizedChain::from_stochastic(p, 5.0);
  SteadyState steady;
  steady.pi = Vector::Ones(1);
  steady.residual = 0.0;

  Rng rng(99);
  auto counts = simulate_window(chain, steady, 1000.0, rng);
  REQUIRE(counts.size() == 1);
  // Poisson(5000) events: three sigma around the mean
  CHECK(counts[0] > 4800);
  CHECK(counts[0] < 5200);

  Rng replay(99);
  CHECK(simulate_window(chain, steady, 1000.0, replay) == counts);
}

TEST_CASE("long-run occupancy matches the stationary law") {
  Mm1kFixture fx;
  Rng rng(4);
  auto counts = simulate_window(fx.chain, fx.steady, 2000.0, rng);

  double total = 0.0;
  for (long c : counts) total += static_cast<double>(c);
  // roughly gamma * duration events
  CHECK(total > 0.8 * fx.chain.gamma * 2000.0);

  // loose multinomial-style bands; holding-time correlation widens them
  const Vector expected = (Vector(3) << 4.0 / 7, 2.0 / 7, 1.0 / 7).finished();
  for (Index s = 0; s < 3; ++s) {
    double freq = counts[static_cast<std::size_t>(s)] / total;
    double se = std::sqrt(expected(s) * (1 - expected(s)) / total);
    CHECK(std::abs(freq - expected(s)) < 6.0 * se);
  }
}

TEST_CASE("pooled dataset frequencies track the stationary law") {
  DatasetSpec spec;
  spec.windows = 200;
  spec.duration = 1.0;
  spec.load_min = 1.0;
  spec.load_max = 1.0;  // pin the load so every window shares one chain
  spec.seed = 12;

  Mm1kFixture fx;
  ObservedStateSet all({0, 1, 2}, 3);
  auto windows = generate_dataset(fx.model, fx.theta, all, spec);
  REQUIRE(windows.size() == 200);

  Vector pooled = Vector::Zero(3);
  for (const auto& w : windows) {
    CHECK(w.load == 1.0);
    for (auto [s, c] : w.counts) pooled(s) += static_cast<double>(c);
  }
  double total = pooled.sum();
  const Vector expected = (Vector(3) << 4.0 / 7, 2.0 / 7, 1.0 / 7).finished();
  for (Index s = 0; s < 3; ++s) {
    double se = std::sqrt(expected(s) * (1 - expected(s)) / total);
    CHECK(std::abs(pooled(s) / total - expected(s)) < 6.0 * se);
  }
}

TEST_CASE("masking keeps exactly the observed positive counts") {
  DatasetSpec spec;
  spec.windows = 30;
  spec.duration = 1.0;
  spec.load_min = 1.0;
  spec.load_max = 2.0;
  spec.seed = 8;

  Mm1kFixture fx;
  ObservedStateSet all({0, 1, 2}, 3);
  ObservedStateSet head({0, 1}, 3);

  auto full = generate_dataset(fx.model, fx.theta, all, spec);
  auto masked = generate_dataset(fx.model, fx.theta, head, spec);
  REQUIRE(full.size() == masked.size());

  for (std::size_t w = 0; w < full.size(); ++w) {
    CHECK(full[w].load == masked[w].load);
    std::vector<std::pair<int, long>> projected;
    for (auto [s, c] : full[w].counts)
      if (s <= 1) projected.emplace_back(s, c);
    CHECK(masked[w].counts == projected);
    for (auto [s, c] : masked[w].counts) {
      CHECK(c > 0);       // zero-count states are omitted
      CHECK(s <= 1);      // nothing outside the observed set
    }
    CHECK(masked[w].load >= 1.0);
    CHECK(masked[w].load <= 2.0);
  }
}

TEST_CASE("datasets are reproducible from their seed") {
  DatasetSpec spec;
  spec.windows = 10;
  spec.duration = 1.5;
  spec.load_min = 1.0;
  spec.load_max = 3.0;
  spec.seed = 77;

  Mm1kFixture fx;
  ObservedStateSet observed({0, 1}, 3);
  auto a = generate_dataset(fx.model, fx.theta, observed, spec);
  auto b = generate_dataset(fx.model, fx.theta, observed, spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t w = 0; w < a.size(); ++w) {
    CHECK(a[w].load == b[w].load);
    CHECK(a[w].counts == b[w].counts);
  }

  spec.seed = 78;
  auto c = generate_dataset(fx.model, fx.theta, observed, spec);
  bool differs = false;
  for (std::size_t w = 0; w < a.size(); ++w)
    if (a[w].load != c[w].load || a[w].counts != c[w].counts) differs = true;
  CHECK(differs);
}

TEST_CASE("simulation validates its arguments") {
  Mm1kFixture fx;
  Rng rng(1);
  CHECK_THROWS_AS(simulate_window(fx.chain, fx.steady, 0.0, rng),
                  InvariantViolation);
  CHECK_THROWS_AS(simulate_window(fx.chain, fx.steady, -1.0, rng),
                  InvariantViolation);

  SteadyState short_pi;
  short_pi.pi = Vector::Ones(2) / 2.0;
  CHECK_THROWS_AS(simulate_window(fx.chain, short_pi, 1.0, rng), LengthMismatch);

  DatasetSpec spec;
  spec.windows = 0;
  ObservedStateSet observed({0, 1}, 3);
  CHECK_THROWS_AS(generate_dataset(fx.model, fx.theta, observed, spec),
                  InvariantViolation);

  DatasetSpec bad_range;
  bad_range.windows = 1;
  bad_range.load_min = 2.0;
  bad_range.load_max = 1.0;
  CHECK_THROWS_AS(generate_dataset(fx.model, fx.theta, observed, bad_range),
                  InvariantViolation);

  DatasetSpec ok;
  ok.windows = 1;
  ok.load_min = 1.0;
  ok.load_max = 2.0;
  ObservedStateSet wrong_dim({0, 1}, 4);
  CHECK_THROWS_AS(generate_dataset(fx.model, fx.theta, wrong_dim, ok),
                  LengthMismatch);
}
