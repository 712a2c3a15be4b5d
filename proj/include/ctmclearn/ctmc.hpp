#pragma once

#include "ctmclearn/types.hpp"

namespace ctmclearn {

enum class SteadyMethod { LinearSolve, Power };

// P = I + Q/gamma with gamma = max_exit_rate * (1 + slack), or gamma = slack
// for the all-zero generator. slack must be > 0 so P's diagonal stays > 0.
UniformizedChain uniformize(const RateMatrix& q, double slack = kDefaultSlack);

// Stationary row vector of P. LinearSolve runs GTH elimination, which is
// subtraction-free and keeps small entries at full relative accuracy; Power
// iterates v^T P from the uniform vector until successive sup-norm change
// falls below tol.
SteadyState steady_state(const UniformizedChain& chain, double tol = kDefaultTol,
                         long max_iters = 1000000,
                         SteadyMethod method = SteadyMethod::LinearSolve);

// 1 - |lambda_2|. Throws DegenerateChain when a second eigenvalue sits on the
// unit circle (reducible or periodic chain).
double spectral_gap(const UniformizedChain& chain);

// Smallest t with max_i mean_j (P^t_ij - colmean_j(P^t))^2 <= epsilon.
// The per-entry mean keeps the threshold comparable across chain sizes.
long mixing_time(const UniformizedChain& chain, double epsilon, long cap = 1000000);

// P^(2^t) by t repeated squarings.
Matrix power_by_squaring(const UniformizedChain& chain, int t);

// Z = (I - P + Pi)^{-1}, the closed form of sum_l (P^l - Pi).
Matrix fundamental_matrix(const UniformizedChain& chain, const SteadyState& steady);

}  // namespace ctmclearn
