#include "ctmclearn/ctmc.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ctmclearn {

namespace {

double scale_tol(const Matrix& m) {
  return 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

}  // namespace

RateMatrix::RateMatrix(Matrix q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols() || q_.rows() == 0)
    throw NonSquare("rate matrix must be square and non-empty");
  const double tol = scale_tol(q_);
  for (Index i = 0; i < q_.rows(); ++i) {
    if (q_(i, i) > tol)
      throw InvariantViolation("rate matrix diagonal must be nonpositive");
    for (Index j = 0; j < q_.cols(); ++j) {
      if (i != j && q_(i, j) < -tol)
        throw InvariantViolation("off-diagonal rates must be nonnegative");
    }
    if (std::abs(q_.row(i).sum()) > tol)
      throw InvariantViolation("rate matrix rows must sum to zero, row " +
                               std::to_string(i));
  }
}

UniformizedChain UniformizedChain::from_stochastic(Matrix p, double gamma) {
  if (p.rows() != p.cols() || p.rows() == 0)
    throw NonSquare("stochastic matrix must be square and non-empty");
  const double tol = 1e-10;
  for (Index i = 0; i < p.rows(); ++i) {
    if (p.row(i).minCoeff() < -tol)
      throw InvariantViolation("stochastic matrix entries must be nonnegative");
    if (std::abs(p.row(i).sum() - 1.0) > tol)
      throw InvariantViolation("stochastic matrix rows must sum to one, row " +
                               std::to_string(i));
  }
  return UniformizedChain{std::move(p), gamma};
}

Matrix SteadyState::pi_matrix() const {
  return Vector::Ones(pi.size()) * pi.transpose();
}

Vector uniform_distribution(Index n) {
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

UniformizedChain uniformize(const RateMatrix& q, double slack) {
  if (slack <= 0.0) throw InvariantViolation("uniformization slack must be > 0");
  const double max_exit = q.max_exit_rate();
  const double gamma = max_exit > 0.0 ? max_exit * (1.0 + slack) : slack;
  Matrix p = Matrix::Identity(q.dim(), q.dim()) + q.entries() / gamma;
  return UniformizedChain{std::move(p), gamma};
}

namespace {

// Grassmann-Taksar-Heyman elimination: no subtractions, so entries spanning
// hundreds of orders of magnitude keep full relative accuracy.
Vector gth_steady(const Matrix& p) {
  const Index n = p.rows();
  Matrix a = p;
  for (Index k = n - 1; k >= 1; --k) {
    const double s = a.row(k).head(k).sum();
    if (!(s > 0.0))
      throw SingularSystem("chain is reducible: no exit below state " +
                           std::to_string(k));
    a.col(k).head(k) /= s;
    a.topLeftCorner(k, k).noalias() +=
        a.col(k).head(k) * a.row(k).head(k);
  }
  Vector x = Vector::Zero(n);
  x(0) = 1.0;
  for (Index k = 1; k < n; ++k) x(k) = x.head(k).dot(a.col(k).head(k));
  return x / x.sum();
}

Vector power_steady(const Matrix& p, double tol, long max_iters) {
  Vector v = uniform_distribution(p.rows());
  for (long it = 0; it < max_iters; ++it) {
    Vector w = p.transpose() * v;
    w /= w.sum();
    if ((w - v).cwiseAbs().maxCoeff() <= tol) return w;
    v.swap(w);
  }
  throw NotConverged("power iteration did not converge in " +
                     std::to_string(max_iters) + " iterations");
}

}  // namespace

SteadyState steady_state(const UniformizedChain& chain, double tol,
                         long max_iters, SteadyMethod method) {
  if (tol <= 0.0) throw InvariantViolation("tolerance must be > 0");
  Vector pi = method == SteadyMethod::LinearSolve
                  ? gth_steady(chain.p)
                  : power_steady(chain.p, tol, max_iters);
  const double residual =
      (chain.p.transpose() * pi - pi).cwiseAbs().maxCoeff();
  return SteadyState{std::move(pi), residual};
}

double spectral_gap(const UniformizedChain& chain) {
  Eigen::EigenSolver<Matrix> solver(chain.p, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw EigenFailure("eigenvalue iteration failed");
  std::vector<double> moduli(chain.dim());
  for (Index i = 0; i < chain.dim(); ++i)
    moduli[i] = std::abs(solver.eigenvalues()(i));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  if (std::abs(moduli.front() - 1.0) > 1e-6)
    throw EigenFailure("leading eigenvalue is not 1; matrix is not stochastic");
  const double second = moduli[1];
  if (second >= 1.0 - 1e-12)
    throw DegenerateChain("second eigenvalue on the unit circle");
  return 1.0 - second;
}

long mixing_time(const UniformizedChain& chain, double epsilon, long cap) {
  if (epsilon <= 0.0) throw InvariantViolation("epsilon must be > 0");
  const Index n = chain.dim();
  Matrix power = chain.p;
  for (long t = 1; t <= cap; ++t) {
    const Eigen::RowVectorXd col_mean = power.colwise().mean();
    const double worst =
        (power.rowwise() - col_mean).array().square().rowwise().sum().maxCoeff() /
        static_cast<double>(n);
    if (worst <= epsilon) return t;
    power *= chain.p;
  }
  throw CapExceeded("rows did not agree within " + std::to_string(epsilon) +
                    " after " + std::to_string(cap) + " steps");
}

Matrix power_by_squaring(const UniformizedChain& chain, int t) {
  if (t < 0) throw IndexOutOfRange("squaring depth must be >= 0");
  Matrix a = chain.p;
  for (int s = 0; s < t; ++s) a = a * a;
  return a;
}

Matrix fundamental_matrix(const UniformizedChain& chain, const SteadyState& steady) {
  if (steady.pi.size() != chain.dim())
    throw LengthMismatch("steady state dimension does not match chain");
  const Matrix m = Matrix::Identity(chain.dim(), chain.dim()) - chain.p +
                   steady.pi_matrix();
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible())
    throw SingularSystem("I - P + Pi is singular");
  return lu.inverse();
}

}  // namespace ctmclearn
