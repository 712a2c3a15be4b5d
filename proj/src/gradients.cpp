#include "ctmclearn/gradients.hpp"

#include <cmath>
#include <string>

#include "ctmclearn/ctmc.hpp"
#include "ctmclearn/rng.hpp"

namespace ctmclearn {

namespace {

// Lowest row index attaining the exit-rate maximum, or -1 for the all-zero
// generator (whose gamma does not depend on the rates at all).
Index attaining_row(const RateMatrix& q) {
  const double max_exit = q.max_exit_rate();
  if (!(max_exit > 0.0)) return -1;
  Index row = 0;
  (-q.entries().diagonal()).maxCoeff(&row);
  return row;
}

double slack_factor(const UniformizedChain& chain, const RateMatrix& q) {
  return chain.gamma / q.max_exit_rate();
}

}  // namespace

Matrix dp_dq(const UniformizedChain& chain, const RateMatrix& q, int i, int j) {
  const Index n = q.dim();
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw IndexOutOfRange("entry (" + std::to_string(i) + "," +
                          std::to_string(j) + ") outside matrix");
  if (i == j) throw DiagonalRequest("diagonal entries are not free rates");
  const double gamma = chain.gamma;
  Matrix d = Matrix::Zero(n, n);
  d(i, i) = -1.0 / gamma;
  d(i, j) = 1.0 / gamma;
  if (i == attaining_row(q)) {
    // gamma = c * (-q_ii) moves with every rate in this row.
    const double c = slack_factor(chain, q);
    d -= (c / (gamma * gamma)) * q.entries();
  }
  return d;
}

Matrix dp_dtheta(const UniformizedChain& chain, const RateMatrix& q,
                 const Matrix& rate_jac) {
  if (rate_jac.rows() != q.dim() || rate_jac.cols() != q.dim())
    throw LengthMismatch("rate jacobian dimension mismatch");
  const double gamma = chain.gamma;
  Matrix d = rate_jac / gamma;
  const Index r = attaining_row(q);
  if (r >= 0) {
    // d gamma/d theta_k = c * (exit-rate derivative of the attaining row);
    // the jacobian's zero row sums make that -jac(r, r).
    const double dgamma = -slack_factor(chain, q) * rate_jac(r, r);
    if (dgamma != 0.0) d -= (dgamma / (gamma * gamma)) * q.entries();
  }
  return d;
}

Matrix truncated_power_gradient(const UniformizedChain& chain, const RateMatrix& q,
                                const Matrix& rate_jac, long t) {
  if (t < 1) throw IndexOutOfRange("truncation horizon must be >= 1");
  const Matrix dp = dp_dtheta(chain, q, rate_jac);
  Matrix deriv = dp;              // d(P^1)
  Matrix power = chain.p;         // P^l while accumulating d(P^{l+1})
  for (long l = 1; l < t; ++l) {
    deriv = deriv * chain.p + power * dp;
    if (l + 1 < t) power *= chain.p;
  }
  return deriv;
}

Vector exact_steady_gradient(const UniformizedChain& chain, const SteadyState& steady,
                             const Matrix& fundamental, const Matrix& rate_jac) {
  const Matrix dp = dp_dtheta(chain, RateMatrix((chain.p - Matrix::Identity(
                                                    chain.dim(), chain.dim())) *
                                                chain.gamma),
                              rate_jac);
  return (steady.pi.transpose() * dp * fundamental).transpose();
}

GradientEstimate sample_stopped_gradient(const UniformizedChain& chain,
                                         const SteadyState& steady,
                                         const std::vector<Matrix>& rate_jacs,
                                         const Vector& loss_grad,
                                         const StoppingRule& rule) {
  if (loss_grad.size() != chain.dim())
    throw LengthMismatch("loss gradient dimension mismatch");
  Rng rng(rule.seed);
  const long draw = rng.geometric(rule.p);
  // w = sum_{t=0}^{X-1} P^t loss_grad / (1-p)^t, built by matrix-vector steps.
  Vector w = loss_grad;
  Vector term = loss_grad;
  double weight = 1.0;
  for (long t = 1; t < draw; ++t) {
    term = chain.p * term;
    weight /= (1.0 - rule.p);
    w.noalias() += weight * term;
  }
  const RateMatrix q(
      (chain.p - Matrix::Identity(chain.dim(), chain.dim())) * chain.gamma);
  Vector values(static_cast<Index>(rate_jacs.size()));
  for (std::size_t k = 0; k < rate_jacs.size(); ++k) {
    const Matrix dp = dp_dtheta(chain, q, rate_jacs[k]);
    values(static_cast<Index>(k)) = steady.pi.dot(dp * w);
  }
  if (!values.allFinite())
    throw NonFiniteGradient("stopped-sum gradient is not finite");
  return GradientEstimate{std::move(values), draw};
}

DcbpttResult dcbptt_loss_grad(const ParametricModel& model, double load,
                              const Vector& theta, const ObservationWindow& window,
                              const ObservedStateSet& observed, int levels,
                              double slack) {
  if (levels < 0) throw IndexOutOfRange("squaring depth must be >= 0");
  const RateMatrix q = build_rate_matrix(model, load, theta);
  const UniformizedChain chain = uniformize(q, slack);
  const Index n = chain.dim();

  std::vector<Matrix> squares;  // P, P^2, P^4, ..., P^(2^levels)
  squares.reserve(levels + 1);
  squares.push_back(chain.p);
  for (int s = 0; s < levels; ++s)
    squares.push_back(squares.back() * squares.back());

  // The chain starts empty: all mass on state 0. For subcritical loads this
  // sits close to the steady state, so the squaring horizon is only a real
  // handicap on slow-mixing chains.
  Vector p0 = Vector::Zero(n);
  p0(0) = 1.0;
  const Vector pi_hat = squares.back().transpose() * p0;
  const double loss = window_nll(window, pi_hat, observed);
  const Vector dloss = nll_grad_pi(window, pi_hat, observed);

  Matrix adjoint = p0 * dloss.transpose();
  for (int s = levels - 1; s >= 0; --s) {
    const Matrix& a = squares[static_cast<std::size_t>(s)];
    adjoint = adjoint * a.transpose() + a.transpose() * adjoint;
  }

  Vector grad(model.param_count());
  for (int k = 0; k < model.param_count(); ++k) {
    const Matrix dp = dp_dtheta(chain, q, rate_jacobian(model, load, theta, k));
    grad(k) = adjoint.cwiseProduct(dp).sum();
  }
  if (!grad.allFinite())
    throw NonFiniteGradient("squaring-adjoint gradient is not finite");
  return DcbpttResult{loss, std::move(grad), std::move(adjoint)};
}

}  // namespace ctmclearn
