#pragma once
// The bilevel problem family: per-agent outer objectives f_i (strongly
// convex) and inner objectives g_i (convex, smooth), plus the concrete
// instances used by the experiments.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irpp/linalg.hpp"

namespace irpp {

struct ProblemInstance {
  int n = 0;  // decision dimension
  int m = 0;  // agent count
  double mu_f = 0.0, L_f = 0.0, L_g = 0.0;

  using ValueFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<void(std::span<const double>, std::span<double>)>;
  std::vector<ValueFn> g_value, f_value;    // per agent
  std::vector<GradFn> g_gradient, f_gradient;

  // Linear constraint data (set for the linearly constrained model).
  bool has_linear_constraints = false;
  Matrix A;  // stacked rows of all agents
  Vector b;
  std::vector<int> nonneg_indices;  // 0-based

  // Quadratic composites expose closed-form gradient data so the oracle can
  // solve the regularized system directly:
  //   grad g(x) = g_hess x - g_lin,   grad f(x) = f_hess x + f_lin.
  bool closed_form = false;
  Matrix g_hess;
  Vector g_lin;
  Matrix f_hess;
  Vector f_lin;

  std::optional<Vector> known_xstar;
  std::string digest;    // content hash, keys the oracle cache
  std::string metadata;  // instance notes (e.g. SVM augmentation)

  // Sums over agents evaluated at a common point.
  double g(std::span<const double> x) const;
  double f(std::span<const double> x) const;
  Vector grad_g(std::span<const double> x) const;
  Vector grad_f(std::span<const double> x) const;
};

// Row i of the result is grad g_i(x_i) + lambda * grad f_i(x_i).
Matrix eval_regularized_gradient(const ProblemInstance& p, const Matrix& X,
                                 double lambda);

struct AgentBlock {
  Matrix A;  // d_i x n (d_i may be zero)
  Vector b;
};

// Least l2-norm least squares: g_i = 1/2 ||A_i x - b_i||^2, f_i = ||x||^2/m.
ProblemInstance make_least_norm_ls(const std::vector<AgentBlock>& blocks);

// Linearly constrained model: f_i = 1/2 x^T Q_i x + q_i^T x with Q_i SPD;
// g_i = 1/2 ||A_i x - b_i||^2 + (1/2m) sum_{j in J} max(0, -x_j)^2.
ProblemInstance make_linear_constrained(const std::vector<Matrix>& Q,
                                        const std::vector<Vector>& q,
                                        const std::vector<AgentBlock>& blocks,
                                        const std::vector<int>& nonneg_indices);

// Deblurring: 1-D symmetric kernel applied along image rows with reflective
// boundaries; rows of the blur operator split across m agents.
// g_i = ||A_i x - b_i||^2, f_i = ||x||^2 / (2m).
ProblemInstance make_blur_instance(const Vector& image, int width,
                                   const Vector& kernel, int m,
                                   double noise_sigma = 0.0,
                                   std::uint64_t noise_seed = 0);

// 1-D reflective-boundary convolution matrix used by the blur instance.
Matrix blur_operator_1d(int width, const Vector& kernel);

struct SvmData {
  Matrix features;  // one sample per row
  Vector labels;    // +1 / -1
};

// Penalized primal SVM; decision variable w = (x, bias, z). eps_sc is the
// strong-convexity augmentation applied to the otherwise merely linear f.
ProblemInstance make_svm_instance(const SvmData& train,
                                  const std::vector<std::vector<int>>& partition,
                                  double eta, double eps_sc = 1e-3);

}  // namespace irpp
