#include <doctest.h>

#include <cmath>
#include <vector>

#include "ctmclearn/ctmc.hpp"
#include "ctmclearn/errors.hpp"
#include "ctmclearn/optimizer.hpp"
#include "ctmclearn/simulator.hpp"

using namespace ctmclearn;

namespace {

OptimizerConfig base_config(Engine engine, int epochs, double eta0) {
  OptimizerConfig cfg;
  cfg.engine = engine;
  cfg.epochs = epochs;
  cfg.eta0 = eta0;
  cfg.seed = 17;
  return cfg;
}

std::vector<ObservationWindow> synthetic_windows() {
  DatasetSpec spec;
  spec.windows = 8;
  spec.duration = 2.0;
  spec.load_min = 1.0;
  spec.load_max = 2.0;
  spec.seed = 5;
  auto model = ParametricModel::mm1k(4);
  Vector theta_star = (Vector(1) << 3.0).finished();
  return generate_dataset(model, theta_star, ObservedStateSet({0, 1}, 5), spec);
}

}  // namespace

TEST_CASE("learning-rate schedules") {
  OptimizerConfig constant;
  constant.schedule = Schedule::Constant;
  constant.eta0 = 0.5;
  CHECK(lr_schedule(constant, 10) == 0.5);

  OptimizerConfig inverse;
  inverse.schedule = Schedule::InverseT;
  inverse.eta0 = 1.0;
  inverse.decay = 1.0;
  CHECK(lr_schedule(inverse, 3) == 0.25);
  CHECK(lr_schedule(inverse, 0) == 1.0);

  // the classic divergent-sum / convergent-square-sum conditions
  double sum = 0.0, sum_sq = 0.0;
  for (int h = 0; h < 1000000; ++h) {
    double eta = lr_schedule(inverse, h);
    sum += eta;
    sum_sq += eta * eta;
  }
  CHECK(sum > 10.0);
  CHECK(sum_sq < 2.0);

  OptimizerConfig bad = inverse;
  bad.eta0 = 0.0;
  CHECK_THROWS_AS(lr_schedule(bad, 0), InvariantViolation);
  CHECK_THROWS_AS(lr_schedule(inverse, -1), IndexOutOfRange);
}

TEST_CASE("fit is bitwise reproducible") {
  auto model = ParametricModel::mm1k(4);
  ObservedStateSet observed({0, 1}, 5);
  auto windows = synthetic_windows();
  auto cfg = base_config(Engine::InfSgd, 12, 0.1);

  auto a = fit(windows, model, observed, cfg);
  auto b = fit(windows, model, observed, cfg);

  REQUIRE(a.trajectory.size() == 13);
  CHECK(a.theta_hat == b.theta_hat);
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].train_nll == b.trajectory[i].train_nll);
    CHECK(a.trajectory[i].theta == b.trajectory[i].theta);
  }

  auto c_cfg = cfg;
  c_cfg.seed = 18;
  auto c = fit(windows, model, observed, c_cfg);
  CHECK(a.theta_hat != c.theta_hat);  // the seed matters
}

TEST_CASE("projection keeps every iterate at or above the floor") {
  auto model = ParametricModel::mm1k(4);
  ObservedStateSet observed({0, 1}, 5);
  auto windows = synthetic_windows();
  auto cfg = base_config(Engine::InfSgd, 15, 1e6);  // absurd step size
  cfg.eps_floor = 1e-6;

  auto result = fit(windows, model, observed, cfg);
  for (const auto& row : result.trajectory)
    CHECK(row.theta.minCoeff() >= cfg.eps_floor);
  CHECK(result.theta_hat.minCoeff() >= cfg.eps_floor);
}

TEST_CASE("a stationary point stays put") {
  // one window whose empirical split equals the conditional steady state at
  // theta = 2, so the loss gradient vanishes there
  auto model = ParametricModel::mm1k(2);
  ObservedStateSet observed({0, 1}, 3);
  ObservationWindow window;
  window.load = 1.0;
  window.counts = {{0, 40}, {1, 20}};  // 2:1, matching pi = (4/7, 2/7, 1/7)

  auto cfg = base_config(Engine::InfSgd, 5, 0.1);
  cfg.theta0 = (Vector(1) << 2.0).finished();
  auto result = fit({window}, model, observed, cfg);
  CHECK(std::abs(result.theta_hat(0) - 2.0) < 1e-9);

  auto dc_cfg = base_config(Engine::DcBptt, 5, 0.1);
  dc_cfg.levels = 9;  // deep enough that the squared kernel is stationary
  dc_cfg.theta0 = (Vector(1) << 2.0).finished();
  auto dc = fit({window}, model, observed, dc_cfg);
  CHECK(std::abs(dc.theta_hat(0) - 2.0) < 1e-7);
}

TEST_CASE("zero epochs returns the starting point with one record") {
  auto model = ParametricModel::mm1k(4);
  ObservedStateSet observed({0, 1}, 5);
  auto windows = synthetic_windows();
  auto cfg = base_config(Engine::InfSgd, 0, 0.1);

  auto result = fit(windows, model, observed, cfg);
  CHECK(result.trajectory.size() == 1);
  CHECK(result.theta_hat == model.initial_theta(cfg.eps_floor));
  CHECK(result.spectral_gap_min > 0.0);
  CHECK(result.spectral_gap_max >= result.spectral_gap_min);
}

TEST_CASE("smoothed training loss trends down while recovering the rate") {
  DatasetSpec spec;
  spec.windows = 20;
  spec.duration = 1.0;
  spec.load_min = 11.0;
  spec.load_max = 15.0;
  spec.seed = 23;
  auto model = ParametricModel::mm1k(20);
  Vector theta_star = (Vector(1) << 25.0).finished();
  ObservedStateSet observed({0, 1}, 21);
  auto windows = generate_dataset(model, theta_star, observed, spec);

  auto cfg = base_config(Engine::InfSgd, 50, 0.1);
  auto result = fit(windows, model, observed, cfg);

  auto moving_average = [&](int h) {
    double s = 0.0;
    for (int k = h - 4; k <= h; ++k)
      s += result.trajectory[static_cast<std::size_t>(k)].train_nll;
    return s / 5.0;
  };
  for (int h = 10; h <= 50; ++h)
    CHECK(moving_average(h) <= moving_average(h - 1) + 1e-9);
  // far from converged in 50 epochs, but moving in the right direction
  CHECK(result.theta_hat(0) > 2.0);
}

TEST_CASE("the two engines agree on an easy recovery") {
  DatasetSpec spec;
  spec.windows = 10;
  spec.duration = 1.0;
  spec.load_min = 11.0;
  spec.load_max = 15.0;
  spec.seed = 31;
  auto model = ParametricModel::mm1k(20);
  Vector theta_star = (Vector(1) << 25.0).finished();
  ObservedStateSet observed({0, 1}, 21);
  auto windows = generate_dataset(model, theta_star, observed, spec);

  auto sgd_cfg = base_config(Engine::InfSgd, 4000, 0.1);
  auto dc_cfg = base_config(Engine::DcBptt, 4000, 0.1);
  dc_cfg.levels = 7;

  auto sgd = fit(windows, model, observed, sgd_cfg);
  auto dc = fit(windows, model, observed, dc_cfg);

  double rel = std::abs(sgd.theta_hat(0) - dc.theta_hat(0)) / dc.theta_hat(0);
  CHECK(rel < 0.05);
}

TEST_CASE("windows without counts are skipped and reported") {
  auto model = ParametricModel::mm1k(4);
  ObservedStateSet observed({0, 1}, 5);
  auto windows = synthetic_windows();
  ObservationWindow empty;
  empty.load = 1.5;
  windows.push_back(empty);

  auto cfg = base_config(Engine::InfSgd, 3, 0.1);
  auto result = fit(windows, model, observed, cfg);
  CHECK(result.skipped_windows == 1);
  REQUIRE(!result.warnings.empty());
  bool mentioned = false;
  for (const auto& w : result.warnings)
    if (w.find("window") != std::string::npos) mentioned = true;
  CHECK(mentioned);
}

TEST_CASE("a stopping probability above the spectral gap raises a warning") {
  // a balanced random walk over 21 states mixes slowly, so its gap sits far
  // below the default stopping probability at the starting point theta = 1
  DatasetSpec spec;
  spec.windows = 3;
  spec.duration = 50.0;
  spec.load_min = 0.9;
  spec.load_max = 1.1;
  spec.seed = 7;
  auto model = ParametricModel::mm1k(20);
  Vector theta_star = (Vector(1) << 1.0).finished();
  ObservedStateSet observed({0, 1}, 21);
  auto windows = generate_dataset(model, theta_star, observed, spec);

  auto cfg = base_config(Engine::InfSgd, 1, 1e-3);
  cfg.p = 0.1;
  auto result = fit(windows, model, observed, cfg);
  bool mentioned = false;
  for (const auto& w : result.warnings)
    if (w.find("spectral gap") != std::string::npos) mentioned = true;
  CHECK(mentioned);
}

TEST_CASE("relaxation learns only off-support mass and needs the sgd engine") {
  auto model = ParametricModel::mm1k(4);
  ObservedStateSet observed({0, 1}, 5);
  auto windows = synthetic_windows();

  auto cfg = base_config(Engine::InfSgd, 10, 0.05);
  cfg.alpha = 0.5;
  auto result = fit(windows, model, observed, cfg);
  REQUIRE(result.relaxation.has_value());
  const Matrix& qt = result.relaxation->q_tilde;
  CHECK(qt.minCoeff() >= 0.0);
  auto support = structural_support(model);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j)
      if (i == j || support(i, j)) CHECK(qt(i, j) == 0.0);

  auto dc_cfg = base_config(Engine::DcBptt, 10, 0.05);
  dc_cfg.alpha = 0.5;
  CHECK_THROWS_AS(fit(windows, model, observed, dc_cfg), ConfigError);
}

TEST_CASE("configuration validation") {
  auto model = ParametricModel::mm1k(4);
  ObservedStateSet observed({0, 1}, 5);
  auto windows = synthetic_windows();

  auto bad_p = base_config(Engine::InfSgd, 1, 0.1);
  bad_p.p = 1.0;
  CHECK_THROWS_AS(fit(windows, model, observed, bad_p), InvariantViolation);

  auto bad_alpha = base_config(Engine::InfSgd, 1, 0.1);
  bad_alpha.alpha = -0.5;
  CHECK_THROWS_AS(fit(windows, model, observed, bad_alpha), InvariantViolation);

  auto bad_floor = base_config(Engine::InfSgd, 1, 0.1);
  bad_floor.eps_floor = 0.0;
  CHECK_THROWS_AS(fit(windows, model, observed, bad_floor), InvariantViolation);

  auto bad_levels = base_config(Engine::DcBptt, 1, 0.1);
  bad_levels.levels = -1;
  CHECK_THROWS_AS(fit(windows, model, observed, bad_levels), InvariantViolation);

  auto bad_theta0 = base_config(Engine::InfSgd, 1, 0.1);
  bad_theta0.theta0 = Vector::Ones(2);
  CHECK_THROWS_AS(fit(windows, model, observed, bad_theta0), LengthMismatch);

  CHECK_THROWS_AS(fit({}, model, observed, base_config(Engine::InfSgd, 1, 0.1)),
                  InvariantViolation);

  ObservedStateSet wrong_dim({0, 1}, 4);
  CHECK_THROWS_AS(fit(windows, model, wrong_dim, base_config(Engine::InfSgd, 1, 0.1)),
                  LengthMismatch);
}
