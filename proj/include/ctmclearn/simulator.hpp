#pragma once

#include <cstdint>
#include <vector>

#include "ctmclearn/likelihood.hpp"
#include "ctmclearn/models.hpp"
#include "ctmclearn/rng.hpp"
#include "ctmclearn/types.hpp"

namespace ctmclearn {

// Occupancy histogram of one uniformized run over the given duration. The
// initial state is drawn from the stationary law, events arrive at
// Exponential(gamma) gaps, and every visited state (the initial one included)
// adds one tick to its bin.
std::vector<long> simulate_window(const UniformizedChain& chain,
                                  const SteadyState& steady, double duration,
                                  Rng& rng);

struct DatasetSpec {
  int windows = 50;
  double duration = 1.0;  // simulated seconds per window
  double load_min = 1.0;
  double load_max = 2.0;
  std::uint64_t seed = 0;
  double slack = kDefaultSlack;
};

// Independent windows at loads drawn uniformly from [load_min, load_max],
// each simulated under its own derived seed and masked to the observed set.
// States outside the set, and zero-count states, are omitted from the window.
std::vector<ObservationWindow> generate_dataset(const ParametricModel& model,
                                                const Vector& theta,
                                                const ObservedStateSet& observed,
                                                const DatasetSpec& spec);

}  // namespace ctmclearn
