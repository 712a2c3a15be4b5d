#pragma once

#include <cstdint>
#include <vector>

#include "ctmclearn/likelihood.hpp"
#include "ctmclearn/models.hpp"
#include "ctmclearn/types.hpp"

namespace ctmclearn {

// d P / d q_ij for an off-diagonal generator entry, with gamma re-derived from
// the perturbed matrix. Rows not attaining the exit-rate maximum only move
// their own two entries; the attaining row also drags gamma, which touches the
// whole matrix. Ties pick the lowest-index attaining row.
Matrix dp_dq(const UniformizedChain& chain, const RateMatrix& q, int i, int j);

// d P / d theta_k contracted over the structural entries of the rate jacobian;
// algebraically sum_{i != j} dq_ij * dp_dq(i, j) collapsed to O(n^2).
Matrix dp_dtheta(const UniformizedChain& chain, const RateMatrix& q,
                 const Matrix& rate_jac);

// d(P^t)/d theta_k = sum_{l=1..t} P^{t-l} (dP/dtheta_k) P^{l-1}. Every row
// tends to the stationary gradient as t grows.
Matrix truncated_power_gradient(const UniformizedChain& chain, const RateMatrix& q,
                                const Matrix& rate_jac, long t);

// d pi / d theta_k as a row vector: pi^T (dP/dtheta_k) Z.
Vector exact_steady_gradient(const UniformizedChain& chain, const SteadyState& steady,
                             const Matrix& fundamental, const Matrix& rate_jac);

struct StoppingRule {
  double p = 0.1;
  std::uint64_t seed = 0;
};

struct GradientEstimate {
  Vector values;  // one entry per parameter
  long draw = 0;  // the geometric stopping draw that produced it
};

// Single-draw unbiased estimate of the loss gradient in theta: the stopped,
// reweighted partial sum sum_{t=0}^{X-1} pi^T dP P^t / (1-p)^t contracted
// with d loss / d pi. One geometric draw is shared across parameters.
GradientEstimate sample_stopped_gradient(const UniformizedChain& chain,
                                         const SteadyState& steady,
                                         const std::vector<Matrix>& rate_jacs,
                                         const Vector& loss_grad,
                                         const StoppingRule& rule);

struct DcbpttResult {
  double loss = 0.0;
  Vector grad;       // d loss / d theta
  Matrix p_adjoint;  // d loss / d P, reusable for relaxation entries
};

// Loss and gradient of window_nll(y, p0^T P^(2^levels)) via repeated squaring
// forward and the product-rule adjoint backward.
DcbpttResult dcbptt_loss_grad(const ParametricModel& model, double load,
                              const Vector& theta, const ObservationWindow& window,
                              const ObservedStateSet& observed, int levels,
                              double slack = kDefaultSlack);

}  // namespace ctmclearn
