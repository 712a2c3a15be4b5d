#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctmclearn/gradients.hpp"
#include "ctmclearn/likelihood.hpp"
#include "ctmclearn/models.hpp"

namespace ctmclearn {

enum class Engine { InfSgd, DcBptt };
enum class Schedule { Constant, InverseT };

struct OptimizerConfig {
  Engine engine = Engine::InfSgd;
  int epochs = 50;
  double eta0 = 0.1;
  Schedule schedule = Schedule::Constant;
  double decay = 1.0;          // inverse_t: eta0 / (1 + h * decay)
  double p = 0.1;              // stopping probability (infsgd)
  int levels = 7;              // squaring depth (dcbptt)
  double eps_floor = kParamFloor;
  std::optional<double> alpha; // enables the relaxation when set
  std::uint64_t seed = 0;
  double slack = kDefaultSlack;
  std::optional<Vector> theta0; // warm start; defaults to the model's initial point
};

struct EpochRecord {
  int epoch = 0;
  double train_nll = 0.0;
  Vector theta;  // iterate the loss was measured at
  std::optional<double> test_mape;
  std::optional<double> test_mse;
};

struct FitResult {
  Vector theta_hat;
  std::optional<Relaxation> relaxation;
  std::vector<EpochRecord> trajectory;  // epochs + 1 rows, row 0 at theta_0
  double spectral_gap_min = 0.0;        // over training windows at theta_hat
  double spectral_gap_max = 0.0;
  std::vector<std::string> warnings;
  long skipped_windows = 0;
};

double lr_schedule(const OptimizerConfig& cfg, int epoch);

// Per-epoch metrics callback: (theta, relaxation or nullptr) -> (mape, mse).
using EvalHook =
    std::function<std::pair<double, double>(const Vector&, const Relaxation*)>;

// Full-batch projected SGD: per-window gradients averaged, update
// theta <- max(theta - eta * grad, eps_floor), relaxation entries clamped at
// zero with the ridge term added. Windows with no counts are skipped and
// tallied. Each (epoch, window) pair draws from its own derived seed, so runs
// are reproducible regardless of evaluation order.
FitResult fit(const std::vector<ObservationWindow>& windows,
              const ParametricModel& model, const ObservedStateSet& observed,
              const OptimizerConfig& cfg, const EvalHook& eval_hook = nullptr);

}  // namespace ctmclearn
