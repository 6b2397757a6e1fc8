#pragma once
// The iteratively regularized push-pull iteration: diminishing step-size and
// regularization schedules, the synchronous round update, and the
// fixed-regularization baseline.

#include <functional>
#include <optional>
#include <stdexcept>

#include "irpp/digraph.hpp"
#include "irpp/problems.hpp"

namespace irpp {

struct Schedule {
  double gamma0 = 0.0;   // step-size scale
  double lambda0 = 0.0;  // regularization scale
  double a = 0.0, b = 0.0;
  double theta = 0.0;  // lower bound factor for alpha_k
  std::vector<double> agent_scales;  // s_i in (0,1]; gamma_{i,k} = s_i gamma_hat_k
  bool fixed = false;  // baseline mode: gamma and lambda frozen at gamma0/lambda0

  double gamma_hat(long k) const;
  double lambda(long k) const;
  // |1 - lambda_{k+1}/lambda_k|
  double lambda_drift(long k) const;

  // Checks exponent constraints (0 < b < a < 1, a + b < 1) and scale ranges;
  // skipped for fixed baselines. Throws on violation.
  void validate(int m) const;
};

struct StepParams {
  double gamma_hat = 0.0;
  double lambda = 0.0;
  Vector gamma;  // per-agent step sizes (diagonal of Gamma_k)
  double alpha = 0.0;  // (1/m) u^T Gamma_k v
};

// Evaluates the schedule at iteration k. Throws if the computed alpha_k
// falls below theta * gamma_hat_k (inconsistent s_i/theta configuration).
StepParams schedule_at(const Schedule& s, long k, const MixingPair& mix);

struct NetworkState {
  long k = 0;
  Matrix X;  // m x n decision matrix, row i = x_{i,k}
  Matrix Y;  // m x n tracking matrix
  Matrix G;  // cached regularized gradient G_k(X_k)
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long iteration, const std::string& what)
      : std::runtime_error(what), iteration(iteration) {}
  long iteration;
};

// Y_0 = grad g(X_0) + lambda_0 grad f(X_0), k = 0.
NetworkState init_state(const ProblemInstance& p, const Matrix& X0,
                        const Schedule& s);

// One synchronous round:
//   X_{k+1} = R (X_k - Gamma_k Y_k)
//   Y_{k+1} = C Y_k + G_{k+1}(X_{k+1}) - G_k(X_k)
NetworkState step(const NetworkState& state, const MixingPair& mix,
                  const ProblemInstance& p, const Schedule& s);

using Observer = std::function<void(const NetworkState&, const StepParams&)>;

// Applies `step` K times; the observer fires at k = 0, every `stride`
// iterations, and at k = K. X0 defaults to the zero matrix.
NetworkState run(const ProblemInstance& p, const MixingPair& mix,
                 const Schedule& s, long iterations,
                 const Observer& observer = {}, long stride = 1,
                 const std::optional<Matrix>& X0 = {});

// Classical push-pull: lambda and gamma frozen (the comparison baseline).
NetworkState run_fixed_pushpull(const ProblemInstance& p, const MixingPair& mix,
                                double lambda_fixed, double gamma_fixed,
                                long iterations, const Observer& observer = {},
                                long stride = 1);

}  // namespace irpp
