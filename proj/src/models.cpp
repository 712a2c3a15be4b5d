#include "ctmclearn/models.hpp"

#include <cmath>
#include <string>

namespace ctmclearn {

namespace {

void check_model(const ParametricModel& m) {
  if (m.capacity < 1) throw ConfigError("capacity must be >= 1");
  if (m.kind == ModelKind::MMmK && (m.servers < 1 || m.servers > m.capacity))
    throw ConfigError("servers must lie in [1, capacity]");
  if (m.kind == ModelKind::MMMultipleK &&
      (m.bands < 1 || m.bands > m.capacity))
    throw ConfigError("bands must lie in [1, capacity]");
}

void check_inputs(const ParametricModel& m, double load, const Vector& theta) {
  check_model(m);
  if (!(load > 0.0)) throw NonPositiveRate("load must be > 0");
  if (theta.size() != m.param_count())
    throw LengthMismatch("theta has " + std::to_string(theta.size()) +
                         " entries, model needs " +
                         std::to_string(m.param_count()));
  if (theta.size() > 0 && !(theta.minCoeff() > 0.0))
    throw NonPositiveRate("theta entries must be > 0");
}

int effective_servers(const ParametricModel& m) {
  return m.kind == ModelKind::MM1K ? 1 : m.servers;
}

}  // namespace

int ParametricModel::state_count() const {
  check_model(*this);
  // Queue lengths 0..K, plus a separate overload state for the triangular family.
  return kind == ModelKind::UpperTriangular ? capacity + 2 : capacity + 1;
}

int ParametricModel::param_count() const {
  check_model(*this);
  switch (kind) {
    case ModelKind::MM1K:
    case ModelKind::MMmK:
      return 1;
    case ModelKind::MMMultipleK:
      return bands;
    case ModelKind::UpperTriangular: {
      const int n = state_count();
      return n * (n - 1) / 2;
    }
  }
  throw ConfigError("unknown model kind");
}

std::vector<int> ParametricModel::default_failure_states() const {
  if (kind == ModelKind::UpperTriangular) return {state_count() - 1};
  return {capacity};
}

Vector ParametricModel::initial_theta(double eps_floor) const {
  // Rates must stay strictly positive, so the triangular family starts at the
  // projection floor instead of zero.
  const double fill =
      kind == ModelKind::UpperTriangular ? eps_floor : 1.0;
  return Vector::Constant(param_count(), fill);
}

namespace {

ParametricModel checked(ParametricModel m) {
  check_model(m);
  return m;
}

}  // namespace

ParametricModel ParametricModel::mm1k(int capacity) {
  return checked({ModelKind::MM1K, capacity, 1, 3});
}
ParametricModel ParametricModel::mmmk(int capacity, int servers) {
  return checked({ModelKind::MMmK, capacity, servers, 3});
}
ParametricModel ParametricModel::mm_multiple_k(int capacity, int bands) {
  return checked({ModelKind::MMMultipleK, capacity, 1, bands});
}
ParametricModel ParametricModel::upper_triangular(int capacity) {
  return checked({ModelKind::UpperTriangular, capacity, 1, 3});
}

RateMatrix build_rate_matrix(const ParametricModel& model, double load,
                             const Vector& theta) {
  check_inputs(model, load, theta);
  const int n = model.state_count();
  Matrix q = Matrix::Zero(n, n);
  switch (model.kind) {
    case ModelKind::MM1K:
    case ModelKind::MMmK: {
      const int m = effective_servers(model);
      for (int i = 0; i < model.capacity; ++i) q(i, i + 1) = load;
      for (int i = 1; i < n; ++i) q(i, i - 1) = std::min(i, m) * theta(0);
      break;
    }
    case ModelKind::MMMultipleK: {
      for (int i = 0; i < model.capacity; ++i) q(i, i + 1) = load;
      for (int i = 1; i < n; ++i)
        for (int b = 1; b <= std::min(i, model.bands); ++b)
          q(i, i - b) = theta(b - 1);
      break;
    }
    case ModelKind::UpperTriangular: {
      // Arrivals climb the queue; the last climb enters the overload state.
      for (int i = 0; i < n - 1; ++i) q(i, i + 1) = load;
      for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j)
          q(i, j) = theta(lower_triangle_index(i, j));
      break;
    }
  }
  for (int i = 0; i < n; ++i) q(i, i) = -q.row(i).sum();
  return RateMatrix(std::move(q));
}

Matrix rate_jacobian(const ParametricModel& model, double load,
                     const Vector& theta, int k) {
  check_inputs(model, load, theta);
  if (k < 0 || k >= model.param_count())
    throw IndexOutOfRange("parameter index " + std::to_string(k));
  const int n = model.state_count();
  Matrix jac = Matrix::Zero(n, n);
  switch (model.kind) {
    case ModelKind::MM1K:
    case ModelKind::MMmK: {
      const int m = effective_servers(model);
      for (int i = 1; i < n; ++i) {
        jac(i, i - 1) = std::min(i, m);
        jac(i, i) = -std::min(i, m);
      }
      break;
    }
    case ModelKind::MMMultipleK: {
      const int b = k + 1;
      for (int i = b; i < n; ++i) {
        jac(i, i - b) = 1.0;
        jac(i, i) = -1.0;
      }
      break;
    }
    case ModelKind::UpperTriangular: {
      const auto [i, j] = lower_triangle_coords(k);
      jac(i, j) = 1.0;
      jac(i, i) = -1.0;
      break;
    }
  }
  return jac;
}

std::vector<Matrix> rate_jacobians(const ParametricModel& model, double load,
                                   const Vector& theta) {
  std::vector<Matrix> jacs;
  jacs.reserve(model.param_count());
  for (int k = 0; k < model.param_count(); ++k)
    jacs.push_back(rate_jacobian(model, load, theta, k));
  return jacs;
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> structural_support(
    const ParametricModel& model) {
  check_model(model);
  const int n = model.state_count();
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> support(n, n);
  support.setConstant(false);
  const Matrix probe =
      build_rate_matrix(model, 1.0, Vector::Ones(model.param_count())).entries();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && probe(i, j) > 0.0) support(i, j) = true;
  return support;
}

RateMatrix apply_relaxation(const RateMatrix& q, const ParametricModel& model,
                            const Relaxation& relax) {
  if (relax.q_tilde.rows() != q.dim() || relax.q_tilde.cols() != q.dim())
    throw LengthMismatch("relaxation matrix dimension mismatch");
  if (relax.alpha < 0.0) throw ConfigError("relaxation alpha must be >= 0");
  const auto support = structural_support(model);
  Matrix out = q.entries();
  for (Index i = 0; i < q.dim(); ++i) {
    for (Index j = 0; j < q.dim(); ++j) {
      const double extra = relax.q_tilde(i, j);
      if (i == j) {
        if (extra != 0.0)
          throw SupportOverlap("relaxation may not touch the diagonal");
        continue;
      }
      if (extra == 0.0) continue;
      if (extra < 0.0)
        throw InvariantViolation("relaxation rates must be nonnegative");
      if (support(i, j))
        throw SupportOverlap("relaxation overlaps parametric entry (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
      out(i, j) += extra;
      out(i, i) -= extra;
    }
  }
  return RateMatrix(std::move(out));
}

double relaxation_penalty(const Relaxation& relax) {
  return relax.alpha * relax.q_tilde.squaredNorm();
}

int lower_triangle_index(int i, int j) {
  if (i <= j || j < 0) throw IndexOutOfRange("need i > j >= 0");
  return i * (i - 1) / 2 + j;
}

std::pair<int, int> lower_triangle_coords(int index) {
  if (index < 0) throw IndexOutOfRange("negative triangle index");
  int i = 1;
  while (i * (i + 1) / 2 <= index) ++i;
  return {i, index - i * (i - 1) / 2};
}

}  // namespace ctmclearn
