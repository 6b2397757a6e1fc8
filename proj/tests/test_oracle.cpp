#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "irpp/oracle.hpp"
#include "irpp/problems.hpp"

using namespace irpp;

namespace {

// g = 1/2 (x1 + x2 - 2)^2, f = x1^2 + x2^2; x*_lambda = (1,1)/(1+lambda).
ProblemInstance line_instance() {
  std::vector<AgentBlock> blocks(1);
  blocks[0].A = Matrix(1, 2, 1.0);
  blocks[0].b = {2.0};
  return make_least_norm_ls(blocks);
}

// Strongly convex inner objective: g = 1/2 ||x - (3,4)||^2.
ProblemInstance pinned_instance() {
  std::vector<AgentBlock> blocks(1);
  blocks[0].A = Matrix::identity(2);
  blocks[0].b = {3.0, 4.0};
  return make_least_norm_ls(blocks);
}

}  // namespace

TEST_CASE("regularized minimizers on the hand-solvable line") {
  ProblemInstance p = line_instance();
  OracleSolution sol = tikhonov_point(p, 1.0);
  CHECK(sol.x[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(sol.x[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(sol.method == "direct");
  CHECK(sol.residual <= 1e-8);

  OracleSolution tiny = tikhonov_point(p, 1e-8);
  CHECK(tiny.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tiny.x[1] == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS(tikhonov_point(p, 0.0));
  CHECK_THROWS(tikhonov_point(p, -1.0));
  CHECK_THROWS(tikhonov_point(p, 1.0, 0.0));
}

TEST_CASE("negligible regularization on a strongly convex inner problem") {
  ProblemInstance p = pinned_instance();
  OracleSolution sol = tikhonov_point(p, 1e-12);
  CHECK(sol.x[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(sol.x[1] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("direct and iterative solvers agree") {
  ProblemInstance p = line_instance();
  for (double lambda : {1.0, 1e-2, 1e-4}) {
    OracleSolution direct = tikhonov_point(p, lambda);
    ProblemInstance iterative = p;
    iterative.closed_form = false;
    OracleSolution agd = tikhonov_point(iterative, lambda, 1e-12);
    CHECK(agd.method == "agd");
    CHECK(agd.residual <= 1e-12);
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(direct.x[j] - agd.x[j]) <= 1e-8);
  }
}

TEST_CASE("continuation reaches the least-norm point") {
  ProblemInstance p = line_instance();
  OracleSolution sol = bilevel_solution(p);
  CHECK(sol.lambda == 0.0);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-5));

  // Strongly convex inner problem: the limit is argmin g regardless of f.
  OracleSolution pinned = bilevel_solution(pinned_instance());
  CHECK(pinned.x[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(pinned.x[1] == doctest::Approx(4.0).epsilon(1e-6));

  CHECK_THROWS(bilevel_solution(p, 0.0));
  // Over-tight tolerance: the fixed ladder cannot certify it.
  CHECK_THROWS(bilevel_solution(p, 1e-12));
}

TEST_CASE("trajectory norm and objective monotonicity") {
  ProblemInstance p = line_instance();
  Vector x_star = bilevel_solution(p).x;
  const double f_star = p.f(x_star);
  double prev_diff = 1e300;
  Vector prev;
  for (double lambda : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    Vector x = tikhonov_point(p, lambda).x;
    CHECK(p.f(x) <= f_star + 1e-9);
    if (!prev.empty()) {
      double diff = 0.0;
      for (int j = 0; j < 2; ++j) diff += (x[j] - prev[j]) * (x[j] - prev[j]);
      diff = std::sqrt(diff);
      CHECK(diff < prev_diff);
      prev_diff = diff;
    }
    prev = x;
  }
}

TEST_CASE("centralized regularized descent") {
  ProblemInstance p = line_instance();
  Schedule s;
  s.gamma0 = 0.25;
  s.lambda0 = 0.1;
  s.a = 0.4;
  s.b = 0.2;
  s.theta = 0.1;
  s.agent_scales = {1.0};

  CHECK_THROWS(centralized_ir_descent(p, s, 0));

  std::vector<Vector> trail;
  Vector final_x = centralized_ir_descent(
      p, s, 2000, [&](long, const Vector& x) { trail.push_back(x); });
  CHECK(trail.size() == 2001);
  // Drifts toward the least-norm point as lambda decays.
  CHECK(std::abs(final_x[0] - 1.0) < 0.1);
  CHECK(std::abs(final_x[1] - 1.0) < 0.1);

  // Scalar hand iteration: x0 = 0, gamma0 = 0.5 moves to 0.5.
  std::vector<AgentBlock> blocks(1);
  blocks[0].A = Matrix(1, 1, 1.0);
  blocks[0].b = {1.0};
  ProblemInstance scalar = make_least_norm_ls(blocks);
  Schedule s2 = s;
  s2.gamma0 = 0.5;
  Vector one_step = centralized_ir_descent(scalar, s2, 1);
  CHECK(one_step[0] == doctest::Approx(0.5));
}

TEST_CASE("disk cache round trip") {
  const std::string path = "test_oracle_cache.json";
  std::remove(path.c_str());
  ProblemInstance p = line_instance();
  {
    OracleCache cache(path);
    OracleSolution first = tikhonov_point(p, 0.5, 1e-8, &cache);
    OracleSolution hit = tikhonov_point(p, 0.5, 1e-8, &cache);
    CHECK(hit.x == first.x);
    CHECK(hit.method == first.method);
    // Different key: not served from the same entry.
    CHECK(cache.lookup(p.digest, 0.25, 1e-8) == std::nullopt);
    CHECK(cache.lookup("other", 0.5, 1e-8) == std::nullopt);
  }
  {
    // Fresh handle reads the persisted entry.
    OracleCache cache(path);
    auto hit = cache.lookup(p.digest, 0.5, 1e-8);
    REQUIRE(hit.has_value());
    CHECK(hit->x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  }
  {
    // Corrupt sidecars are ignored, not fatal.
    std::ofstream out(path, std::ios::trunc);
    out << "not json";
    out.close();
    OracleCache cache(path);
    CHECK(cache.lookup(p.digest, 0.5, 1e-8) == std::nullopt);
    CHECK_NOTHROW(tikhonov_point(p, 0.5, 1e-8, &cache));
  }
  std::remove(path.c_str());
}
