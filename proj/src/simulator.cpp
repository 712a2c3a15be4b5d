#include "ctmclearn/simulator.hpp"

#include <utility>

#include "ctmclearn/ctmc.hpp"
#include "ctmclearn/errors.hpp"

namespace ctmclearn {

std::vector<long> simulate_window(const UniformizedChain& chain,
                                  const SteadyState& steady, double duration,
                                  Rng& rng) {
  if (duration <= 0.0) throw InvariantViolation("duration must be positive");
  if (steady.pi.size() != chain.dim())
    throw LengthMismatch("stationary vector does not match the chain");
  if (chain.gamma <= 0.0)
    throw InvariantViolation("event rate must be positive");

  std::vector<long> counts(static_cast<std::size_t>(chain.dim()), 0);
  int state = rng.categorical(steady.pi);
  ++counts[static_cast<std::size_t>(state)];
  double clock = rng.exponential(chain.gamma);
  while (clock <= duration) {
    state = rng.categorical(chain.p.row(state).transpose());
    ++counts[static_cast<std::size_t>(state)];
    clock += rng.exponential(chain.gamma);
  }
  return counts;
}

std::vector<ObservationWindow> generate_dataset(const ParametricModel& model,
                                                const Vector& theta,
                                                const ObservedStateSet& observed,
                                                const DatasetSpec& spec) {
  if (spec.windows <= 0)
    throw InvariantViolation("a dataset needs at least one window");
  if (!(spec.load_min > 0.0) || spec.load_max < spec.load_min)
    throw InvariantViolation("load range must satisfy 0 < min <= max");
  if (observed.dim() != model.state_count())
    throw LengthMismatch("observed-set dimension does not match the model");

  std::vector<ObservationWindow> windows;
  windows.reserve(static_cast<std::size_t>(spec.windows));
  for (int w = 0; w < spec.windows; ++w) {
    Rng rng(Rng::derive_seed(spec.seed, static_cast<std::uint64_t>(w)));
    ObservationWindow win;
    win.load = rng.uniform(spec.load_min, spec.load_max);
    const RateMatrix q = build_rate_matrix(model, win.load, theta);
    const UniformizedChain chain = uniformize(q, spec.slack);
    const SteadyState steady = steady_state(chain);
    const std::vector<long> counts =
        simulate_window(chain, steady, spec.duration, rng);
    for (int s : observed.states())
      if (counts[static_cast<std::size_t>(s)] > 0)
        win.counts.emplace_back(s, counts[static_cast<std::size_t>(s)]);
    windows.push_back(std::move(win));
  }
  return windows;
}

}  // namespace ctmclearn
