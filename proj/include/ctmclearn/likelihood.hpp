#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ctmclearn/models.hpp"
#include "ctmclearn/types.hpp"

namespace ctmclearn {

// Strictly increasing subset of state indices visible to the observer.
class ObservedStateSet {
 public:
  ObservedStateSet(std::vector<int> states, int dim);

  const std::vector<int>& states() const { return states_; }
  int dim() const { return dim_; }
  bool contains(int state) const;

 private:
  std::vector<int> states_;
  int dim_;
};

struct ObservationWindow {
  double load = 0.0;
  std::vector<std::pair<int, long>> counts;  // (state, count), state ascending

  long total() const;
};

// Negative log-likelihood of the counts under pi renormalized over the
// observed set. Invariant under rescaling of pi.
double window_nll(const ObservationWindow& window, const Vector& pi,
                  const ObservedStateSet& observed);

// d window_nll / d pi, a full-length vector vanishing off the observed set.
Vector nll_grad_pi(const ObservationWindow& window, const Vector& pi,
                   const ObservedStateSet& observed);

// Sum of window losses at theta, plus the relaxation ridge penalty if given.
double dataset_nll(const std::vector<ObservationWindow>& windows,
                   const ParametricModel& model, const Vector& theta,
                   const ObservedStateSet& observed,
                   const Relaxation* relax = nullptr,
                   double slack = kDefaultSlack);

}  // namespace ctmclearn
