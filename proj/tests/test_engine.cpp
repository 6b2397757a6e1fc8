#include <cmath>
#include <vector>

#include "doctest.h"
#include "irpp/digraph.hpp"
#include "irpp/engine.hpp"
#include "irpp/kernels.hpp"
#include "irpp/problems.hpp"
#include "irpp/rng.hpp"

using namespace irpp;

namespace {

// g = 1/2 (x - 1)^2, f = x^2, one agent.
ProblemInstance scalar_quadratic() {
  std::vector<AgentBlock> blocks(1);
  blocks[0].A = Matrix(1, 1, 1.0);
  blocks[0].b = {1.0};
  return make_least_norm_ls(blocks);
}

MixingPair trivial_mixing() {
  MixingPair mix;
  mix.R = Matrix(1, 1, 1.0);
  mix.C = Matrix(1, 1, 1.0);
  mix.u = {1.0};
  mix.v = {1.0};
  return mix;
}

Schedule basic_schedule(int m, double gamma0 = 0.5, double lambda0 = 0.1,
                        double a = 0.4, double b = 0.2) {
  Schedule s;
  s.gamma0 = gamma0;
  s.lambda0 = lambda0;
  s.a = a;
  s.b = b;
  s.theta = 0.1;
  s.agent_scales.assign(m, 1.0);
  return s;
}

ProblemInstance ring_quadratic(int m, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<AgentBlock> blocks(m);
  for (auto& blk : blocks) {
    blk.A = Matrix(1, n);
    for (int c = 0; c < n; ++c) blk.A(0, c) = rng.normal();
    blk.b = {rng.normal()};
  }
  return make_least_norm_ls(blocks);
}

}  // namespace

TEST_CASE("power-law schedule values") {
  Schedule s = basic_schedule(1, 1.0, 0.1, 0.4, 0.2);
  CHECK(s.gamma_hat(0) == 1.0);
  CHECK(s.lambda(0) == 0.1);
  CHECK(s.gamma_hat(15) == doctest::Approx(0.32988).epsilon(1e-4));
  CHECK(s.lambda(15) == doctest::Approx(0.05743).epsilon(1e-4));
}

TEST_CASE("schedule validation") {
  Schedule good = basic_schedule(3);
  CHECK_NOTHROW(good.validate(3));

  Schedule s = good;
  s.b = 0.5;  // b >= a
  CHECK_THROWS(s.validate(3));
  s = good;
  s.a = 0.7;
  s.b = 0.4;  // a + b >= 1
  CHECK_THROWS(s.validate(3));
  s = good;
  s.b = 0.0;
  CHECK_THROWS(s.validate(3));
  s = good;
  s.gamma0 = 0.0;
  CHECK_THROWS(s.validate(3));
  s = good;
  s.theta = 0.0;
  CHECK_THROWS(s.validate(3));
  s = good;
  s.agent_scales = {0.5, 0.5, 0.5};  // nobody at full step
  CHECK_THROWS(s.validate(3));
  s = good;
  s.agent_scales = {1.0, 1.5, 1.0};  // out of range
  CHECK_THROWS(s.validate(3));
  s = good;
  s.agent_scales = {1.0, 1.0};  // wrong count
  CHECK_THROWS(s.validate(3));

  // Fixed baselines skip the exponent constraints.
  s = good;
  s.fixed = true;
  s.a = s.b = 0.0;
  s.lambda0 = 0.0;
  CHECK_NOTHROW(s.validate(3));
}

TEST_CASE("schedule drift properties sampled") {
  Schedule s = basic_schedule(1, 1.0, 0.1, 0.4, 0.35);
  double prev_drift = s.lambda_drift(0);
  for (long k = 1; k <= 10000; ++k) {
    CHECK(s.lambda(k) < s.lambda(k - 1));
    double drift = s.lambda_drift(k - 1);
    CHECK(drift <= 1.0 / static_cast<double>(k + 1));
    if (k >= 2) CHECK(drift <= prev_drift + 1e-15);
    prev_drift = drift;
  }
  // gamma_hat / lambda decays like k^-(a-b) since a > b.
  double ratio = s.gamma_hat(1000000) / s.lambda(1000000);
  double expected =
      (s.gamma_hat(0) / s.lambda(0)) * std::pow(1000001.0, -(0.4 - 0.35));
  CHECK(ratio == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ratio < s.gamma_hat(0) / s.lambda(0));
}

TEST_CASE("step parameters and the alpha bracket") {
  Digraph ring = make_topology(TopologyKind::ring, 3);
  MixingPair mix =
      perron_pair(build_row_stochastic(ring), build_column_stochastic(ring));
  Schedule s = basic_schedule(3);
  StepParams params = schedule_at(s, 7, mix);
  double uv = kernels::dot(mix.u.data(), mix.v.data(), 3) / 3.0;
  CHECK(params.alpha == doctest::Approx(uv * params.gamma_hat).epsilon(1e-12));
  CHECK(params.alpha >= s.theta * params.gamma_hat);
  for (int i = 0; i < 3; ++i) CHECK(params.gamma[i] == params.gamma_hat);

  // theta too aggressive for scaled-down agents: flagged.
  Schedule bad = s;
  bad.agent_scales = {1.0, 0.01, 0.01};
  bad.theta = 0.9;
  CHECK_THROWS(schedule_at(bad, 0, mix));
}

TEST_CASE("init_state matches the hand-computed tracking start") {
  ProblemInstance p = scalar_quadratic();
  Schedule s = basic_schedule(1);
  NetworkState st = init_state(p, Matrix(1, 1), s);
  CHECK(st.k == 0);
  CHECK(st.Y(0, 0) == doctest::Approx(-1.0));  // grad g(0) + 0.1 * grad f(0)

  // Regularization off: tracking variable is the plain gradient.
  Schedule s0 = s;
  s0.lambda0 = 0.0;
  NetworkState st0 = init_state(p, Matrix(1, 1), s0);
  CHECK(st0.Y(0, 0) == doctest::Approx(-1.0));

  // At the regularized stationary point both gradients vanish.
  Matrix X1(1, 1);
  X1(0, 0) = 1.0;
  NetworkState st1 = init_state(p, X1, s0);
  CHECK(st1.Y(0, 0) == doctest::Approx(0.0));

  CHECK_THROWS(init_state(p, Matrix(2, 1), s));
}

TEST_CASE("single step against the hand iteration") {
  ProblemInstance p = scalar_quadratic();
  MixingPair mix = trivial_mixing();
  Schedule s = basic_schedule(1, 0.5, 0.1, 0.4, 0.2);
  NetworkState st = init_state(p, Matrix(1, 1), s);
  NetworkState next = step(st, mix, p, s);
  CHECK(next.k == 1);
  CHECK(next.X(0, 0) == doctest::Approx(0.5));
  CHECK(next.Y(0, 0) == doctest::Approx(-0.41294).epsilon(1e-4));
}

TEST_CASE("zero step direction leaves the state fixed") {
  ProblemInstance p = scalar_quadratic();
  MixingPair mix = trivial_mixing();
  Schedule s = basic_schedule(1);
  s.lambda0 = 0.0;
  Matrix X(1, 1);
  X(0, 0) = 1.0;  // grad g and grad f * 0 vanish here
  NetworkState st = init_state(p, X, s);
  NetworkState next = step(st, mix, p, s);
  CHECK(next.X(0, 0) == 1.0);
}

TEST_CASE("weighted-average recursion") {
  const int m = 3, n = 4;
  ProblemInstance p = ring_quadratic(m, n, 31);
  Digraph ring = make_topology(TopologyKind::ring, m);
  MixingPair mix =
      perron_pair(build_row_stochastic(ring), build_column_stochastic(ring));
  Schedule s = basic_schedule(m, 0.1, 0.1, 0.4, 0.35);

  std::vector<NetworkState> states;
  std::vector<StepParams> params;
  run(p, mix, s, 50, [&](const NetworkState& st, const StepParams& pr) {
    states.push_back(st);
    params.push_back(pr);
  });
  REQUIRE(states.size() == 51);
  for (std::size_t t = 0; t + 1 < states.size(); ++t) {
    for (int j = 0; j < n; ++j) {
      double xbar = 0.0, xbar_next = 0.0, pull = 0.0;
      for (int i = 0; i < m; ++i) {
        xbar += mix.u[i] * states[t].X(i, j) / m;
        xbar_next += mix.u[i] * states[t + 1].X(i, j) / m;
        pull += mix.u[i] * params[t].gamma[i] * states[t].Y(i, j) / m;
      }
      CHECK(std::abs(xbar_next - (xbar - pull)) <= 1e-10);
    }
  }
}

TEST_CASE("observer stride arithmetic") {
  ProblemInstance p = scalar_quadratic();
  MixingPair mix = trivial_mixing();
  Schedule s = basic_schedule(1, 0.1);
  int rows = 0;
  run(p, mix, s, 100, [&](const NetworkState&, const StepParams&) { ++rows; },
      10);
  CHECK(rows == 11);

  CHECK_THROWS(run(p, mix, s, 0));
  CHECK_THROWS(run(p, mix, s, 10, {}, 0));
}

TEST_CASE("oversized fixed step diverges with a named iteration") {
  ProblemInstance p = scalar_quadratic();
  MixingPair mix = trivial_mixing();
  bool threw = false;
  try {
    run_fixed_pushpull(p, mix, 0.0, 2.5, 5000);
  } catch (const DivergenceError& e) {
    threw = true;
    CHECK(e.iteration > 0);
  }
  CHECK(threw);

  CHECK_THROWS(run_fixed_pushpull(p, mix, -0.1, 0.5, 10));
  CHECK_THROWS(run_fixed_pushpull(p, mix, 0.1, 0.0, 10));
}

TEST_CASE("fixed-lambda baseline reduces to classical push-pull") {
  // Frozen schedules: lambda_{k+1} = lambda_k, so the update is the
  // textbook gradient-tracking recursion on g + lambda f.
  ProblemInstance p = scalar_quadratic();
  MixingPair mix = trivial_mixing();
  NetworkState st = run_fixed_pushpull(p, mix, 0.1, 0.5, 2000);
  // Converges to the stationary point of g + 0.1 f: x = 1 / 1.2.
  CHECK(st.X(0, 0) == doctest::Approx(1.0 / 1.2).epsilon(1e-9));
  CHECK(st.Y(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("tracking identity holds along a networked run") {
  const int m = 4, n = 3;
  ProblemInstance p = ring_quadratic(m, n, 8);
  Digraph ring = make_topology(TopologyKind::ring, m);
  MixingPair mix =
      perron_pair(build_row_stochastic(ring), build_column_stochastic(ring));
  Schedule s = basic_schedule(m, 0.1, 0.1, 0.4, 0.35);
  run(p, mix, s, 300, [&](const NetworkState& st, const StepParams& pr) {
    Matrix G = eval_regularized_gradient(p, st.X, pr.lambda);
    for (int j = 0; j < n; ++j) {
      double ybar = 0.0, gbar = 0.0;
      for (int i = 0; i < m; ++i) {
        ybar += st.Y(i, j) / m;
        gbar += G(i, j) / m;
      }
      CHECK(std::abs(ybar - gbar) <=
            1e-10 * (1.0 + frobenius_norm(st.Y)));
    }
  });
}
