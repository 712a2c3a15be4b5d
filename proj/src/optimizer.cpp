#include "ctmclearn/optimizer.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "ctmclearn/ctmc.hpp"
#include "ctmclearn/errors.hpp"
#include "ctmclearn/rng.hpp"

namespace ctmclearn {

double lr_schedule(const OptimizerConfig& cfg, int epoch) {
  if (cfg.eta0 <= 0.0) throw InvariantViolation("eta0 must be positive");
  if (epoch < 0) throw IndexOutOfRange("epoch must be nonnegative");
  switch (cfg.schedule) {
    case Schedule::Constant:
      return cfg.eta0;
    case Schedule::InverseT:
      if (cfg.decay < 0.0) throw InvariantViolation("decay must be nonnegative");
      return cfg.eta0 / (1.0 + epoch * cfg.decay);
  }
  throw InvariantViolation("unknown schedule");
}

namespace {

// Off-diagonal entries outside the parametric support, row-major order.
std::vector<std::pair<int, int>> free_entries(const ParametricModel& model) {
  const auto support = structural_support(model);
  std::vector<std::pair<int, int>> entries;
  for (int i = 0; i < support.rows(); ++i)
    for (int j = 0; j < support.cols(); ++j)
      if (i != j && !support(i, j)) entries.emplace_back(i, j);
  return entries;
}

// dQ/dq_tilde_ij: a unit rate at (i, j) compensated on the diagonal.
Matrix elementary_jacobian(int n, int i, int j) {
  Matrix jac = Matrix::Zero(n, n);
  jac(i, j) = 1.0;
  jac(i, i) = -1.0;
  return jac;
}

}  // namespace

FitResult fit(const std::vector<ObservationWindow>& windows,
              const ParametricModel& model, const ObservedStateSet& observed,
              const OptimizerConfig& cfg, const EvalHook& eval_hook) {
  if (windows.empty()) throw InvariantViolation("fit needs at least one window");
  const int n = model.state_count();
  if (observed.dim() != n)
    throw LengthMismatch("observed-set dimension does not match the model");
  if (cfg.epochs < 0) throw InvariantViolation("epochs must be nonnegative");
  if (cfg.eps_floor <= 0.0)
    throw InvariantViolation("parameter floor must be positive");
  if (cfg.engine == Engine::InfSgd && (cfg.p <= 0.0 || cfg.p >= 1.0))
    throw InvariantViolation("stopping probability must lie in (0, 1)");
  if (cfg.engine == Engine::DcBptt && cfg.levels < 0)
    throw InvariantViolation("squaring depth must be nonnegative");
  if (cfg.alpha && *cfg.alpha < 0.0)
    throw InvariantViolation("relaxation weight must be nonnegative");
  if (cfg.alpha && cfg.engine != Engine::InfSgd)
    throw ConfigError("the relaxation is only supported by the infsgd engine");

  const int dim_theta = model.param_count();
  Vector theta = model.initial_theta(cfg.eps_floor);
  if (cfg.theta0) {
    if (cfg.theta0->size() != dim_theta)
      throw LengthMismatch("theta0 must have one entry per model parameter");
    if (cfg.theta0->minCoeff() < cfg.eps_floor)
      throw NonPositiveRate("theta0 entries must respect the parameter floor");
    theta = *cfg.theta0;
  }

  FitResult result;
  if (cfg.alpha)
    result.relaxation = Relaxation{Matrix::Zero(n, n), *cfg.alpha};
  Relaxation* relax = result.relaxation ? &*result.relaxation : nullptr;

  for (const auto& win : windows)
    if (win.total() == 0) ++result.skipped_windows;
  if (result.skipped_windows > 0)
    result.warnings.push_back(std::to_string(result.skipped_windows) +
                              " window(s) carry no counts and were skipped");

  // All four families are affine in theta with the load confined to the
  // superdiagonal, so dQ/dtheta_k is one constant matrix per parameter; the
  // relaxation entries append their unit jacobians behind the theta block.
  std::vector<Matrix> jacs = rate_jacobians(model, windows.front().load, theta);
  std::vector<std::pair<int, int>> extras;
  if (relax) {
    extras = free_entries(model);
    for (const auto& [i, j] : extras) jacs.push_back(elementary_jacobian(n, i, j));
  }

  auto gap_range = [&](const Vector& at) {
    double lo = 2.0, hi = -1.0;
    for (const auto& win : windows) {
      RateMatrix q = build_rate_matrix(model, win.load, at);
      if (relax) q = apply_relaxation(q, model, *relax);
      const double gap = spectral_gap(uniformize(q, cfg.slack));
      lo = std::min(lo, gap);
      hi = std::max(hi, gap);
    }
    return std::make_pair(lo, hi);
  };

  if (cfg.engine == Engine::InfSgd) {
    const double gap0 = gap_range(theta).first;
    if (cfg.p >= gap0)
      result.warnings.push_back(
          "stopping probability " + std::to_string(cfg.p) +
          " is not below the smallest spectral gap " + std::to_string(gap0) +
          " at the initial point; the estimator variance bound does not hold");
  }

  auto record = [&](int epoch) {
    EpochRecord row;
    row.epoch = epoch;
    row.theta = theta;
    row.train_nll = dataset_nll(windows, model, theta, observed, relax, cfg.slack);
    if (eval_hook) {
      auto [mape, mse] = eval_hook(theta, relax);
      row.test_mape = mape;
      row.test_mse = mse;
    }
    result.trajectory.push_back(row);
  };

  const auto window_count = static_cast<std::uint64_t>(windows.size());
  for (int h = 0; h <= cfg.epochs; ++h) {
    record(h);
    if (h == cfg.epochs) break;

    Vector theta_grad = Vector::Zero(dim_theta);
    Matrix relax_grad = relax ? Matrix::Zero(n, n) : Matrix();
    long active = 0;
    for (std::uint64_t w = 0; w < window_count; ++w) {
      const auto& win = windows[w];
      if (win.total() == 0) continue;
      ++active;
      const std::uint64_t stream =
          static_cast<std::uint64_t>(h) * window_count + w;
      if (cfg.engine == Engine::InfSgd) {
        RateMatrix q = build_rate_matrix(model, win.load, theta);
        if (relax) q = apply_relaxation(q, model, *relax);
        const UniformizedChain chain = uniformize(q, cfg.slack);
        const SteadyState steady = steady_state(chain);
        const Vector loss_grad = nll_grad_pi(win, steady.pi, observed);
        const StoppingRule rule{cfg.p, Rng::derive_seed(cfg.seed, stream)};
        const GradientEstimate est =
            sample_stopped_gradient(chain, steady, jacs, loss_grad, rule);
        theta_grad += est.values.head(dim_theta);
        if (relax)
          for (std::size_t f = 0; f < extras.size(); ++f)
            relax_grad(extras[f].first, extras[f].second) +=
                est.values(dim_theta + static_cast<Index>(f));
      } else {
        const DcbpttResult res = dcbptt_loss_grad(
            model, win.load, theta, win, observed, cfg.levels, cfg.slack);
        theta_grad += res.grad;
      }
    }
    if (active == 0)
      throw DegenerateChain("every window is empty; nothing to fit");
    theta_grad /= static_cast<double>(active);
    if (!theta_grad.allFinite())
      throw NonFiniteGradient("non-finite averaged gradient at epoch " +
                              std::to_string(h));

    const double eta = lr_schedule(cfg, h);
    theta = (theta - eta * theta_grad).cwiseMax(cfg.eps_floor);
    if (relax) {
      relax_grad /= static_cast<double>(active);
      relax_grad += 2.0 * relax->alpha * relax->q_tilde;
      if (!relax_grad.allFinite())
        throw NonFiniteGradient("non-finite relaxation gradient at epoch " +
                                std::to_string(h));
      relax->q_tilde = (relax->q_tilde - eta * relax_grad).cwiseMax(0.0);
    }
  }

  result.theta_hat = theta;
  std::tie(result.spectral_gap_min, result.spectral_gap_max) = gap_range(theta);
  return result;
}

}  // namespace ctmclearn
