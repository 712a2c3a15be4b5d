#pragma once

#include <Eigen/Dense>

#include "ctmclearn/errors.hpp"

namespace ctmclearn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultSlack = 0.01;
inline constexpr double kDefaultTol = 1e-10;
inline constexpr double kParamFloor = 1e-6;
// Probabilities below this are treated as structurally zero inside logs.
inline constexpr double kProbFloor = 1e-300;

// Conservative generator of an irreducible CTMC: zero row sums, nonnegative
// off-diagonal rates, nonpositive diagonal.
class RateMatrix {
 public:
  explicit RateMatrix(Matrix q);

  const Matrix& entries() const { return q_; }
  Index dim() const { return q_.rows(); }
  // max_k(-q_kk), the largest total exit rate.
  double max_exit_rate() const { return (-q_.diagonal()).maxCoeff(); }

 private:
  Matrix q_;
};

// Discrete-time embedding P = I + Q/gamma sharing Q's stationary vector.
struct UniformizedChain {
  Matrix p;
  double gamma = 1.0;

  Index dim() const { return p.rows(); }

  // Wraps an externally supplied stochastic matrix (no generator involved).
  static UniformizedChain from_stochastic(Matrix p, double gamma = 1.0);
};

struct SteadyState {
  Vector pi;
  double residual = 0.0;  // ||pi^T P - pi^T||_inf at return

  // Rank-one limit matrix: every row equals pi^T.
  Matrix pi_matrix() const;
};

Vector uniform_distribution(Index n);

}  // namespace ctmclearn
