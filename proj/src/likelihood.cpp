#include "ctmclearn/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctmclearn/ctmc.hpp"

namespace ctmclearn {

ObservedStateSet::ObservedStateSet(std::vector<int> states, int dim)
    : states_(std::move(states)), dim_(dim) {
  if (dim_ <= 0) throw ConfigError("state space dimension must be > 0");
  if (states_.empty()) throw ConfigError("observed state set must be non-empty");
  if (!std::is_sorted(states_.begin(), states_.end()) ||
      std::adjacent_find(states_.begin(), states_.end()) != states_.end())
    throw ConfigError("observed states must be strictly increasing");
  if (states_.front() < 0 || states_.back() >= dim_)
    throw IndexOutOfRange("observed state outside state space");
}

bool ObservedStateSet::contains(int state) const {
  return std::binary_search(states_.begin(), states_.end(), state);
}

long ObservationWindow::total() const {
  long sum = 0;
  for (const auto& [state, count] : counts) sum += count;
  return sum;
}

namespace {

double observed_mass(const Vector& pi, const ObservedStateSet& observed) {
  double mass = 0.0;
  for (int s : observed.states()) mass += pi(s);
  return mass;
}

void check_window(const ObservationWindow& window, const Vector& pi,
                  const ObservedStateSet& observed) {
  if (pi.size() != observed.dim())
    throw LengthMismatch("pi dimension does not match observed set");
  for (const auto& [state, count] : window.counts) {
    if (count < 0) throw InvariantViolation("counts must be nonnegative");
    if (!observed.contains(state))
      throw IndexOutOfRange("count on unobserved state " + std::to_string(state));
  }
}

}  // namespace

double window_nll(const ObservationWindow& window, const Vector& pi,
                  const ObservedStateSet& observed) {
  check_window(window, pi, observed);
  const double mass = observed_mass(pi, observed);
  if (!(mass > kProbFloor)) throw ZeroMass("observed set carries no mass");
  double loss = 0.0;
  for (const auto& [state, count] : window.counts) {
    if (count == 0) continue;
    if (!(pi(state) > kProbFloor))
      throw ZeroProbabilityObserved("state " + std::to_string(state) +
                                    " observed but has zero probability");
    loss -= static_cast<double>(count) * std::log(pi(state) / mass);
  }
  return loss;
}

Vector nll_grad_pi(const ObservationWindow& window, const Vector& pi,
                   const ObservedStateSet& observed) {
  check_window(window, pi, observed);
  const double mass = observed_mass(pi, observed);
  if (!(mass > kProbFloor)) throw ZeroMass("observed set carries no mass");
  const double total = static_cast<double>(window.total());
  Vector grad = Vector::Zero(pi.size());
  for (int s : observed.states()) grad(s) = total / mass;
  for (const auto& [state, count] : window.counts) {
    if (count == 0) continue;
    if (!(pi(state) > kProbFloor))
      throw ZeroProbabilityObserved("state " + std::to_string(state) +
                                    " observed but has zero probability");
    grad(state) -= static_cast<double>(count) / pi(state);
  }
  return grad;
}

double dataset_nll(const std::vector<ObservationWindow>& windows,
                   const ParametricModel& model, const Vector& theta,
                   const ObservedStateSet& observed, const Relaxation* relax,
                   double slack) {
  double loss = relax != nullptr ? relaxation_penalty(*relax) : 0.0;
  for (const auto& window : windows) {
    RateMatrix q = build_rate_matrix(model, window.load, theta);
    if (relax != nullptr) q = apply_relaxation(q, model, *relax);
    const SteadyState steady = steady_state(uniformize(q, slack));
    loss += window_nll(window, steady.pi, observed);
  }
  return loss;
}

}  // namespace ctmclearn
