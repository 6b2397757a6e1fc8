#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "irpp/harness.hpp"

using namespace irpp;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("preset parameters") {
  ExperimentConfig sensor = preset("sensor");
  CHECK(sensor.schedule.a == 0.4);
  CHECK(sensor.schedule.b == doctest::Approx(0.35));
  CHECK(sensor.schedule.lambda0 == 0.1);

  ExperimentConfig qp = preset("constrained-qp");
  CHECK(qp.schedule.a == 0.2);
  CHECK(qp.schedule.b == doctest::Approx(0.2 - 0.05 / 3.0));

  ExperimentConfig svm = preset("svm");
  CHECK(svm.svm_eta == 0.05);
  CHECK(svm.topology == "line");

  CHECK_THROWS(preset("unknown"));
}

TEST_CASE("materialized instances have the advertised shapes") {
  ExperimentSetup sensor = materialize(preset("sensor"));
  CHECK(sensor.problem.m == 10);
  CHECK(sensor.problem.n == 20);
  CHECK(sensor.problem.A.rows() == 10);  // d = 1 row per agent

  ExperimentSetup deblur = materialize(preset("deblur"));
  CHECK(deblur.problem.m == 9);
  CHECK(deblur.problem.n == 256);
  REQUIRE(deblur.X0.has_value());
  CHECK(deblur.X0->rows() == 9);
  REQUIRE(deblur.problem.known_xstar.has_value());

  ExperimentSetup svm = materialize(preset("svm"));
  CHECK(svm.problem.m == 10);
  CHECK(svm.problem.n == 2 + 1 + 300);

  ExperimentSetup qp = materialize(preset("constrained-qp"));
  CHECK(qp.problem.m == 5);
  CHECK(qp.problem.n == 8);
  REQUIRE(qp.problem.known_xstar.has_value());
  // The planted optimum is feasible and strictly positive.
  const Vector& xs = *qp.problem.known_xstar;
  for (double v : xs) CHECK(v > 0.0);
  Vector res = matvec(qp.problem.A, xs);
  for (std::size_t i = 0; i < res.size(); ++i)
    CHECK(res[i] == doctest::Approx(qp.problem.b[i]).epsilon(1e-12));

  ExperimentSetup micro = materialize(preset("least-norm"));
  CHECK(micro.problem.m == 2);
  CHECK(micro.problem.n == 2);
}

TEST_CASE("every preset passes the assumption checks") {
  for (const char* name :
       {"sensor", "deblur", "svm", "constrained-qp", "least-norm"}) {
    ExperimentConfig cfg = preset(name);
    ValidationReport report = validate_experiment(cfg);
    CHECK(report.all_passed());
  }
  // The sensor preset supports both mixing constructions.
  ExperimentConfig lap = preset("sensor");
  lap.mixing = "laplacian";
  CHECK(validate_experiment(lap).all_passed());

  ExperimentConfig bad = preset("sensor");
  bad.mixing = "nonsense";
  CHECK_THROWS(validate_experiment(bad));
}

TEST_CASE("config file loading") {
  const std::string path = "test_harness_cfg.json";
  {
    std::ofstream out(path);
    out << R"({"preset": "least-norm", "iterations": 123, "stride": 5,
               "seed": 9, "output": "custom.csv",
               "schedule": {"gamma0": 0.25, "b": 0.3}})";
  }
  ExperimentConfig cfg = load_config(path);
  CHECK(cfg.name == "least-norm");
  CHECK(cfg.iterations == 123);
  CHECK(cfg.stride == 5);
  CHECK(cfg.seed == 9);
  CHECK(cfg.output == "custom.csv");
  CHECK(cfg.schedule.gamma0 == 0.25);
  CHECK(cfg.schedule.b == 0.3);
  CHECK(cfg.schedule.a == 0.4);  // preset default kept
  std::remove(path.c_str());

  CHECK_THROWS(load_config("missing_config.json"));
}

TEST_CASE("short run on the micro instance approaches the known solution") {
  ExperimentConfig cfg = preset("least-norm");
  cfg.iterations = 4000;
  cfg.stride = 200;
  cfg.output = "test_harness_micro.csv";
  std::ostringstream log;
  std::vector<MetricRow> rows = run_experiment(cfg, log);
  REQUIRE(rows.size() == 21);
  REQUIRE(rows.front().dist_xstar.has_value());
  REQUIRE(rows.back().dist_xstar.has_value());
  CHECK(*rows.back().dist_xstar < *rows.front().dist_xstar);
  CHECK(*rows.back().dist_xstar < 0.05);
  for (const MetricRow& row : rows) {
    REQUIRE(row.subopt_g.has_value());
    CHECK(*row.subopt_g >= -1e-9);
  }
  std::remove(cfg.output.c_str());
}

TEST_CASE("identical config produces byte-identical output") {
  ExperimentConfig cfg = preset("least-norm");
  cfg.iterations = 500;
  cfg.stride = 50;
  std::ostringstream log;

  cfg.output = "test_harness_det_a.csv";
  run_experiment(cfg, log);
  cfg.output = "test_harness_det_b.csv";
  run_experiment(cfg, log);
  CHECK(slurp("test_harness_det_a.csv") == slurp("test_harness_det_b.csv"));
  std::remove("test_harness_det_a.csv");
  std::remove("test_harness_det_b.csv");
}

TEST_CASE("command-line interface") {
  CHECK(run_cli({"run", "--preset", "least-norm", "--iters", "200",
                 "--stride", "50", "--output", "test_cli_run.csv"}) == 0);
  std::ifstream produced("test_cli_run.csv");
  CHECK(produced.good());
  produced.close();
  std::remove("test_cli_run.csv");

  // Missing config: nonzero exit, no partial output.
  CHECK(run_cli({"run", "--config", "missing.file",
                 "--output", "test_cli_none.csv"}) != 0);
  std::ifstream absent("test_cli_none.csv");
  CHECK_FALSE(absent.good());

  CHECK(run_cli({"validate", "--preset", "least-norm"}) == 0);
  CHECK(run_cli({"oracle", "--preset", "least-norm", "--lambda", "0.5"}) == 0);
  CHECK(run_cli({"bogus"}) != 0);
  CHECK(run_cli({}) != 0);
  CHECK(run_cli({"run", "--preset", "no-such-preset"}) != 0);
}
