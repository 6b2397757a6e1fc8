#include "irpp/engine.hpp"

#include <cmath>

#include "irpp/kernels.hpp"

namespace irpp {

double Schedule::gamma_hat(long k) const {
  if (fixed) return gamma0;
  return gamma0 / std::pow(static_cast<double>(k + 1), a);
}

double Schedule::lambda(long k) const {
  if (fixed) return lambda0;
  return lambda0 / std::pow(static_cast<double>(k + 1), b);
}

double Schedule::lambda_drift(long k) const {
  double lk = lambda(k);
  if (lk == 0.0) return 0.0;
  return std::abs(1.0 - lambda(k + 1) / lk);
}

void Schedule::validate(int m) const {
  if (gamma0 <= 0.0) throw std::invalid_argument("gamma0 must be positive");
  if (lambda0 < 0.0) throw std::invalid_argument("lambda0 must be nonnegative");
  if (static_cast<int>(agent_scales.size()) != m)
    throw std::invalid_argument("agent scale count mismatch");
  double max_scale = 0.0;
  for (double s : agent_scales) {
    if (s <= 0.0 || s > 1.0)
      throw std::invalid_argument("agent scales must lie in (0, 1]");
    max_scale = std::max(max_scale, s);
  }
  if (max_scale != 1.0)
    throw std::invalid_argument("at least one agent scale must equal 1");
  if (fixed) return;
  if (lambda0 <= 0.0) throw std::invalid_argument("lambda0 must be positive");
  if (!(0.0 < b && b < a && a < 1.0 && a + b < 1.0))
    throw std::invalid_argument(
        "schedule exponents must satisfy 0 < b < a < 1 and a + b < 1");
  if (theta <= 0.0) throw std::invalid_argument("theta must be positive");
}

StepParams schedule_at(const Schedule& s, long k, const MixingPair& mix) {
  const int m = static_cast<int>(mix.u.size());
  StepParams out;
  out.gamma_hat = s.gamma_hat(k);
  out.lambda = s.lambda(k);
  out.gamma.resize(m);
  double alpha = 0.0;
  for (int i = 0; i < m; ++i) {
    double si = s.agent_scales.empty() ? 1.0 : s.agent_scales[i];
    out.gamma[i] = si * out.gamma_hat;
    alpha += mix.u[i] * mix.v[i] * out.gamma[i];
  }
  out.alpha = alpha / m;
  if (!s.fixed && out.alpha < s.theta * out.gamma_hat * (1.0 - 1e-12))
    throw std::invalid_argument(
        "alpha_k < theta * gamma_hat_k: inconsistent agent scales / theta");
  return out;
}

namespace {

void check_finite(const Matrix& M, long iteration, const char* what) {
  const double* data = M.data();
  const std::size_t count = M.rows() * M.cols();
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(data[i]) || std::abs(data[i]) > 1e100)
      throw DivergenceError(
          iteration, std::string(what) + " diverged at iteration " +
                         std::to_string(iteration));
  }
}

}  // namespace

NetworkState init_state(const ProblemInstance& p, const Matrix& X0,
                        const Schedule& s) {
  if (static_cast<int>(X0.rows()) != p.m || static_cast<int>(X0.cols()) != p.n)
    throw std::invalid_argument("init_state: X0 shape mismatch");
  NetworkState state;
  state.k = 0;
  state.X = X0;
  state.G = eval_regularized_gradient(p, X0, s.lambda(0));
  state.Y = state.G;
  return state;
}

NetworkState step(const NetworkState& state, const MixingPair& mix,
                  const ProblemInstance& p, const Schedule& s) {
  const StepParams params = schedule_at(s, state.k, mix);
  const std::size_t n = state.X.cols();

  // Pull: X_{k+1} = R (X_k - Gamma_k Y_k)
  Matrix pulled(state.X.rows(), n);
  for (std::size_t i = 0; i < state.X.rows(); ++i)
    kernels::sub_scaled(state.X.row(i), params.gamma[i], state.Y.row(i),
                        pulled.row(i), n);
  Matrix Xn = matmul(mix.R, pulled);
  check_finite(Xn, state.k + 1, "decision matrix");

  // Push: Y_{k+1} = (C Y_k - G_k(X_k)) + G_{k+1}(X_{k+1})
  const double lambda_next = s.lambda(state.k + 1);
  Matrix Gn = eval_regularized_gradient(p, Xn, lambda_next);
  Matrix Yn = matmul(mix.C, state.Y);
  kernels::axpy(-1.0, state.G.data(), Yn.data(), Yn.rows() * n);
  kernels::axpy(1.0, Gn.data(), Yn.data(), Yn.rows() * n);
  check_finite(Yn, state.k + 1, "tracking matrix");

  NetworkState next;
  next.k = state.k + 1;
  next.X = std::move(Xn);
  next.Y = std::move(Yn);
  next.G = std::move(Gn);
  return next;
}

NetworkState run(const ProblemInstance& p, const MixingPair& mix,
                 const Schedule& s, long iterations, const Observer& observer,
                 long stride, const std::optional<Matrix>& X0) {
  if (iterations < 1) throw std::invalid_argument("iteration count must be >= 1");
  if (stride < 1) throw std::invalid_argument("observer stride must be >= 1");
  s.validate(p.m);

  NetworkState state = init_state(p, X0 ? *X0 : Matrix(p.m, p.n), s);
  if (observer) observer(state, schedule_at(s, 0, mix));
  for (long k = 0; k < iterations; ++k) {
    state = step(state, mix, p, s);
    if (observer && (state.k % stride == 0 || state.k == iterations))
      observer(state, schedule_at(s, state.k, mix));
  }
  return state;
}

NetworkState run_fixed_pushpull(const ProblemInstance& p, const MixingPair& mix,
                                double lambda_fixed, double gamma_fixed,
                                long iterations, const Observer& observer,
                                long stride) {
  if (lambda_fixed < 0.0) throw std::invalid_argument("lambda_fixed must be >= 0");
  if (gamma_fixed <= 0.0) throw std::invalid_argument("gamma_fixed must be > 0");
  Schedule s;
  s.fixed = true;
  s.gamma0 = gamma_fixed;
  s.lambda0 = lambda_fixed;
  s.agent_scales.assign(p.m, 1.0);
  return run(p, mix, s, iterations, observer, stride);
}

}  // namespace irpp
