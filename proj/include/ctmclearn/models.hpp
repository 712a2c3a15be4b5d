#pragma once

#include <utility>
#include <vector>

#include "ctmclearn/types.hpp"

namespace ctmclearn {

enum class ModelKind { MM1K, MMmK, MMMultipleK, UpperTriangular };

// Queueing model families whose generator Q(x, theta) is linear in the
// learnable rates theta, with the offered load x on the superdiagonal.
struct ParametricModel {
  ModelKind kind = ModelKind::MM1K;
  int capacity = 1;  // K, the largest queue length
  int servers = 1;   // m, MMmK only
  int bands = 3;     // d, MMMultipleK only

  int state_count() const;
  int param_count() const;
  // Full-queue state for the MM families; the overload state otherwise.
  std::vector<int> default_failure_states() const;
  Vector initial_theta(double eps_floor = kParamFloor) const;

  static ParametricModel mm1k(int capacity);
  static ParametricModel mmmk(int capacity, int servers);
  static ParametricModel mm_multiple_k(int capacity, int bands);
  static ParametricModel upper_triangular(int capacity);
};

RateMatrix build_rate_matrix(const ParametricModel& model, double load,
                             const Vector& theta);

// dQ/dtheta_k including the diagonal compensation keeping row sums zero.
Matrix rate_jacobian(const ParametricModel& model, double load,
                     const Vector& theta, int k);
std::vector<Matrix> rate_jacobians(const ParametricModel& model, double load,
                                   const Vector& theta);

// True for off-diagonal entries the parametric generator can populate.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> structural_support(
    const ParametricModel& model);

// Additive free-form rates on structurally zero entries, ridge-penalized.
struct Relaxation {
  Matrix q_tilde;
  double alpha = 0.0;
};

RateMatrix apply_relaxation(const RateMatrix& q, const ParametricModel& model,
                            const Relaxation& relax);
double relaxation_penalty(const Relaxation& relax);

// Row-major flattening of the strict lower triangle: (1,0) -> 0, (2,0) -> 1, ...
int lower_triangle_index(int i, int j);
std::pair<int, int> lower_triangle_coords(int index);

}  // namespace ctmclearn
