#pragma once
// Centralized reference computations used as independent ground truth:
// Tikhonov-trajectory points, the bilevel solution via lambda-continuation,
// and the centralized iteratively regularized descent comparator.

#include <optional>
#include <string>

#include "irpp/engine.hpp"
#include "irpp/problems.hpp"

namespace irpp {

struct OracleSolution {
  Vector x;
  double lambda = 0.0;  // 0 for the bilevel limit
  double residual = 0.0;
  std::string method;
};

// Disk cache keyed by (instance digest, lambda, tol); JSON sidecar.
class OracleCache {
 public:
  OracleCache() = default;  // disabled
  explicit OracleCache(std::string path);
  std::optional<OracleSolution> lookup(const std::string& digest, double lambda,
                                       double tol) const;
  void store(const std::string& digest, double lambda, double tol,
             const OracleSolution& sol);

 private:
  std::string path_;
};

// argmin g + lambda f. Quadratic instances are solved directly; otherwise
// accelerated gradient descent on the (lambda mu_f)-strongly convex
// composite. `tol` bounds the first-order residual.
OracleSolution tikhonov_point(const ProblemInstance& p, double lambda,
                              double tol = 1e-8, OracleCache* cache = nullptr);

// Lambda-continuation over {1e-2, 1e-4, 1e-6, 1e-8}; converged when the
// geometric extrapolation of the shrinking rung gaps puts the remaining
// distance to the limit below tol * (1 + ||x||). Throws if the trajectory
// does not contract at that resolution.
OracleSolution bilevel_solution(const ProblemInstance& p, double tol = 1e-6,
                                OracleCache* cache = nullptr);

using CentralizedObserver = std::function<void(long k, const Vector& x)>;

// x_{k+1} = x_k - gamma_hat_k (grad g(x_k) + lambda_k grad f(x_k)), run with
// the same schedule as the distributed method.
Vector centralized_ir_descent(const ProblemInstance& p, const Schedule& s,
                              long iterations,
                              const CentralizedObserver& observer = {},
                              const std::optional<Vector>& x0 = {});

}  // namespace irpp
