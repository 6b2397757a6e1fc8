#include "irpp/harness.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "irpp/kernels.hpp"
#include "irpp/oracle.hpp"
#include "irpp/rng.hpp"
#include "json.hpp"

namespace irpp {

namespace {

using nlohmann::json;

// Synthetic 16x16 test image: vertical stripes over a two-band background,
// sharp edges so the blur is clearly visible.
Vector striped_image(int width) {
  Vector img(width * width);
  for (int r = 0; r < width; ++r)
    for (int c = 0; c < width; ++c)
      img[r * width + c] =
          (((c / 2) % 2) ? 1.0 : 0.0) + (((r / 4) % 2) ? 0.5 : 0.0);
  return img;
}

Vector gaussian_kernel3(double sigma) {
  double w = std::exp(-1.0 / (2.0 * sigma * sigma));
  double norm = 1.0 / (1.0 + 2.0 * w);
  return {w * norm, norm, w * norm};
}

SvmData sample_two_gaussians(Rng& rng, int count, int nf) {
  SvmData data;
  data.features = Matrix(count, nf);
  data.labels.resize(count);
  for (int i = 0; i < count; ++i) {
    double label = (i % 2 == 0) ? 1.0 : -1.0;
    data.labels[i] = label;
    for (int j = 0; j < nf; ++j)
      data.features(i, j) = 1.5 * label + rng.normal();
  }
  return data;
}

ProblemInstance build_sensor(std::uint64_t seed) {
  const int m = 10, n = 20, d = 1;
  Rng rng(seed);
  Vector x_true(n);
  for (double& v : x_true) v = rng.normal();
  std::vector<AgentBlock> blocks(m);
  for (auto& blk : blocks) {
    blk.A = Matrix(d, n);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < n; ++c) blk.A(r, c) = rng.normal();
    blk.b = matvec(blk.A, x_true);
  }
  return make_least_norm_ls(blocks);
}

ProblemInstance build_least_norm_micro() {
  std::vector<AgentBlock> blocks(2);
  blocks[0].A = Matrix(1, 2);
  blocks[0].A(0, 0) = 1.0;
  blocks[0].A(0, 1) = 1.0;
  blocks[0].b = {2.0};
  blocks[1].A = Matrix(0, 2);
  ProblemInstance p = make_least_norm_ls(blocks);
  p.known_xstar = Vector{1.0, 1.0};
  return p;
}

ProblemInstance build_deblur(std::uint64_t /*seed*/) {
  const int width = 16, m = 9;
  return make_blur_instance(striped_image(width), width, gaussian_kernel3(0.6),
                            m);
}

ProblemInstance build_constrained_qp(std::uint64_t seed) {
  const int m = 5, n = 8;
  Rng rng(seed);
  std::vector<Matrix> Q(m);
  std::vector<Vector> q(m, Vector(n, 0.0));
  std::vector<AgentBlock> blocks(m);
  // The outer objective is kept deliberately flat (factor 0.1) so its
  // suboptimality at the averaged iterate is reported on a small scale.
  const double flat = 0.1;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < m; ++i) {
    Matrix B(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) B(r, c) = scale * rng.normal();
    Q[i] = matmul(transpose(B), B);
    for (int r = 0; r < n; ++r) Q[i](r, r) += 0.5;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) Q[i](r, c) *= flat;
    blocks[i].A = Matrix(1, n);
    for (int c = 0; c < n; ++c) blocks[i].A(0, c) = rng.normal();
  }
  // Pick the solution first: a strictly positive point with the constraints
  // defined through it, and q chosen so the KKT conditions hold there. Then
  // the sign constraints are inactive at the optimum and it is known exactly.
  Vector x_star(n);
  for (double& v : x_star) v = 1.0 + rng.uniform();
  Vector nu(m);
  for (double& v : nu) v = flat * rng.normal();
  Matrix Q_total(n, n);
  for (int i = 0; i < m; ++i)
    for (int r = 0; r < n; ++r)
      kernels::axpy(1.0, Q[i].row(r), Q_total.row(r), n);
  Vector q_total = matvec(Q_total, x_star);
  for (double& v : q_total) v = -v;
  for (int i = 0; i < m; ++i) {
    kernels::axpy(nu[i], blocks[i].A.row(0), q_total.data(), n);
    blocks[i].b = {kernels::dot(blocks[i].A.row(0), x_star.data(), n)};
  }
  for (int i = 0; i < m; ++i)
    for (int c = 0; c < n; ++c) q[i][c] = q_total[c] / m;

  std::vector<int> nonneg(n);
  for (int j = 0; j < n; ++j) nonneg[j] = j;
  ProblemInstance p = make_linear_constrained(Q, q, blocks, nonneg);
  p.known_xstar = x_star;
  return p;
}

ProblemInstance build_svm(std::uint64_t seed, double eta) {
  const int m = 10, nf = 2, train_count = 300;
  Rng rng(seed);
  SvmData train = sample_two_gaussians(rng, train_count, nf);
  std::vector<std::vector<int>> partition(m);
  for (int i = 0; i < train_count; ++i) partition[i % m].push_back(i);
  return make_svm_instance(train, partition, eta);
}

double svm_test_accuracy(const ProblemInstance& p, const Vector& w,
                         std::uint64_t seed) {
  const int nf = 2, test_count = 500;
  Rng rng(seed + 1);
  SvmData test = sample_two_gaussians(rng, test_count, nf);
  int correct = 0;
  for (int i = 0; i < test_count; ++i) {
    double score = kernels::dot(test.features.row(i), w.data(), nf) + w[nf];
    if ((score >= 0.0 ? 1.0 : -1.0) == test.labels[i]) ++correct;
  }
  (void)p;
  return static_cast<double>(correct) / test_count;
}

}  // namespace

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.schedule.a = 0.4;
  cfg.schedule.b = 0.4 - cfg.epsilon;
  cfg.schedule.lambda0 = 0.1;
  if (name == "sensor") {
    cfg.topology = "ring";
    cfg.schedule.gamma0 = 0.05;
    cfg.baseline_gamma = 0.002;  // fixed push-pull needs a smaller stable step
    cfg.iterations = 100000;
    cfg.stride = 100;
  } else if (name == "deblur") {
    cfg.topology = "ring";
    cfg.schedule.gamma0 = 2.0;
    cfg.iterations = 10000;
    cfg.stride = 100;
  } else if (name == "svm") {
    cfg.topology = "line";
    cfg.schedule.gamma0 = 0.002;
    cfg.iterations = 2000;
    cfg.stride = 10;
  } else if (name == "constrained-qp") {
    cfg.topology = "ring";
    cfg.schedule.a = 0.2;
    cfg.schedule.b = 0.2 - cfg.epsilon / 3.0;
    cfg.schedule.lambda0 = 1.0;
    cfg.schedule.gamma0 = 0.05;
    cfg.iterations = 100000;
    cfg.stride = 100;
  } else if (name == "least-norm") {
    cfg.topology = "ring";
    cfg.schedule.gamma0 = 0.5;
    cfg.iterations = 20000;
    cfg.stride = 20;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json doc;
  in >> doc;
  ExperimentConfig cfg = preset(doc.at("preset").get<std::string>());
  if (doc.contains("topology")) cfg.topology = doc["topology"];
  if (doc.contains("mixing")) cfg.mixing = doc["mixing"];
  if (doc.contains("iterations")) cfg.iterations = doc["iterations"];
  if (doc.contains("stride")) cfg.stride = doc["stride"];
  if (doc.contains("seed")) cfg.seed = doc["seed"];
  if (doc.contains("output")) cfg.output = doc["output"];
  if (doc.contains("baseline_lambda")) cfg.baseline_lambda = doc["baseline_lambda"];
  if (doc.contains("baseline_gamma")) cfg.baseline_gamma = doc["baseline_gamma"];
  if (doc.contains("epsilon")) cfg.epsilon = doc["epsilon"];
  if (doc.contains("svm_eta")) cfg.svm_eta = doc["svm_eta"];
  if (doc.contains("oracle_tol")) cfg.oracle_tol = doc["oracle_tol"];
  if (doc.contains("schedule")) {
    const json& s = doc["schedule"];
    if (s.contains("gamma0")) cfg.schedule.gamma0 = s["gamma0"];
    if (s.contains("lambda0")) cfg.schedule.lambda0 = s["lambda0"];
    if (s.contains("a")) cfg.schedule.a = s["a"];
    if (s.contains("b")) cfg.schedule.b = s["b"];
    if (s.contains("theta")) cfg.schedule.theta = s["theta"];
  }
  return cfg;
}

ExperimentSetup materialize(const ExperimentConfig& cfg) {
  ExperimentSetup setup;
  if (cfg.name == "sensor") {
    setup.problem = build_sensor(cfg.seed);
  } else if (cfg.name == "deblur") {
    setup.problem = build_deblur(cfg.seed);
  } else if (cfg.name == "svm") {
    setup.problem = build_svm(cfg.seed, cfg.svm_eta);
  } else if (cfg.name == "constrained-qp") {
    setup.problem = build_constrained_qp(cfg.seed);
  } else if (cfg.name == "least-norm") {
    setup.problem = build_least_norm_micro();
  } else {
    throw std::invalid_argument("unknown experiment: " + cfg.name);
  }

  TopologyKind kind = topology_kind_from_string(cfg.topology);
  setup.graph = make_topology(kind, setup.problem.m, cfg.seed);
  // Pushing happens against the reversed edges for one-rooted topologies so
  // the pulling and pushing root sets intersect.
  const bool reverse_push =
      kind == TopologyKind::line || kind == TopologyKind::star;
  Digraph push_graph = reverse_push ? reverse(setup.graph) : setup.graph;
  Matrix R, C;
  if (cfg.mixing == "neighbor") {
    R = build_row_stochastic(setup.graph);
    C = build_column_stochastic(push_graph);
  } else if (cfg.mixing == "laplacian") {
    R = build_laplacian_row_stochastic(setup.graph);
    C = build_laplacian_column_stochastic(push_graph);
  } else {
    throw std::invalid_argument("unknown mixing rule: " + cfg.mixing);
  }
  setup.mix = perron_pair(R, C);

  if (cfg.name == "deblur") {
    // Every agent starts from the blurred observation.
    Matrix X0(setup.problem.m, setup.problem.n);
    for (int i = 0; i < setup.problem.m; ++i)
      std::copy(setup.problem.b.begin(), setup.problem.b.end(), X0.row(i));
    setup.X0 = std::move(X0);
  }
  return setup;
}

ValidationReport validate_experiment(const ExperimentConfig& cfg) {
  ExperimentSetup setup = materialize(cfg);
  return validate_assumptions(setup.mix.R, setup.mix.C);
}

std::string default_output_path(const ExperimentConfig& cfg) {
  return cfg.output.empty() ? "irpp-" + cfg.name + ".csv" : cfg.output;
}

std::string baseline_output_path(const ExperimentConfig& cfg) {
  std::string path = default_output_path(cfg);
  std::size_t dot = path.rfind('.');
  if (dot == std::string::npos) return path + "-fixed";
  return path.substr(0, dot) + "-fixed" + path.substr(dot);
}

namespace {

Schedule resolved_schedule(const ExperimentConfig& cfg,
                           const ExperimentSetup& setup) {
  Schedule s = cfg.schedule;
  if (s.agent_scales.empty()) s.agent_scales.assign(setup.problem.m, 1.0);
  if (s.theta <= 0.0) {
    double uv = kernels::dot(setup.mix.u.data(), setup.mix.v.data(),
                             setup.mix.u.size());
    s.theta = 0.5 * uv / setup.problem.m;
  }
  return s;
}

struct OracleContext {
  std::optional<Vector> x_star;
  double f_star = 0.0, g_star = 0.0;
};

OracleContext oracle_context(const ProblemInstance& p, double tol) {
  OracleContext ctx;
  if (p.known_xstar) {
    ctx.x_star = p.known_xstar;
  } else if (p.closed_form) {
    ctx.x_star = bilevel_solution(p, tol).x;
  }
  if (ctx.x_star) {
    ctx.f_star = p.f(*ctx.x_star);
    ctx.g_star = p.g(*ctx.x_star);
  }
  return ctx;
}

MetricRow metric_row(const ProblemInstance& p, const MixingPair& mix,
                     const NetworkState& state, const StepParams& params,
                     const OracleContext& ctx) {
  MetricRow row;
  row.k = state.k;
  row.gamma_hat = params.gamma_hat;
  row.lambda = params.lambda;
  row.consensus_x = consensus_violation(state.X);
  row.consensus_y = consensus_violation(state.Y);
  row.tracking_residual = tracking_residual(state.Y, state.X, p, params.lambda);
  Vector xbar = weighted_average(state.X, mix.u);
  if (ctx.x_star) {
    row.subopt_f = p.f(xbar) - ctx.f_star;
    row.subopt_g = p.g(xbar) - ctx.g_star;
    Vector diff(xbar.size());
    kernels::sub_scaled(xbar.data(), 1.0, ctx.x_star->data(), diff.data(),
                        xbar.size());
    row.dist_xstar = norm2(diff);
  }
  if (p.has_linear_constraints && p.A.rows() > 0) {
    Vector res = matvec(p.A, xbar);
    kernels::axpy(-1.0, p.b.data(), res.data(), res.size());
    row.infeas = kernels::sumsq(res.data(), res.size());
  }
  if (p.closed_form && params.lambda > 0.0) {
    Vector xt = tikhonov_point(p, params.lambda).x;
    Vector diff(xbar.size());
    kernels::sub_scaled(xbar.data(), 1.0, xt.data(), diff.data(), xbar.size());
    row.dist_tikhonov = norm2(diff);
  }
  return row;
}

std::vector<std::string> csv_comments(const ExperimentConfig& cfg,
                                      const Schedule& sched, bool fixed) {
  std::vector<std::string> c;
  c.push_back("irpp version " + std::string(kLibraryVersion));
  c.push_back("experiment: " + cfg.name + (fixed ? " (fixed-lambda baseline)"
                                                 : ""));
  c.push_back("topology: " + cfg.topology + ", mixing rule: " + cfg.mixing);
  c.push_back("iterations: " + std::to_string(cfg.iterations) +
              ", stride: " + std::to_string(cfg.stride) +
              ", seed: " + std::to_string(cfg.seed));
  if (fixed) {
    c.push_back("fixed lambda: " + format_double(cfg.baseline_lambda) +
                ", fixed gamma: " + format_double(sched.gamma0));
  } else {
    c.push_back("schedule: gamma0=" + format_double(sched.gamma0) +
                " lambda0=" + format_double(sched.lambda0) +
                " a=" + format_double(sched.a) + " b=" + format_double(sched.b) +
                " theta=" + format_double(sched.theta) +
                " (exponent offset epsilon=" + format_double(cfg.epsilon) + ")");
  }
  c.push_back(
      "prng: mt19937_64 with fixed 53-bit uniform and Box-Muller transforms");
  c.push_back(
      "all diagnostics use the 2-norm; cells are empty where the metric is "
      "undefined for the instance");
  return c;
}

}  // namespace

std::vector<MetricRow> run_experiment(const ExperimentConfig& cfg,
                                      std::ostream& log) {
  ExperimentSetup setup = materialize(cfg);
  ValidationReport report = validate_assumptions(setup.mix.R, setup.mix.C);
  if (!report.all_passed())
    throw std::runtime_error("mixing matrices fail the standing assumptions");
  Schedule sched = resolved_schedule(cfg, setup);
  sched.validate(setup.problem.m);
  OracleContext ctx = oracle_context(setup.problem, cfg.oracle_tol);

  std::vector<MetricRow> rows;
  Observer obs = [&](const NetworkState& state, const StepParams& params) {
    rows.push_back(metric_row(setup.problem, setup.mix, state, params, ctx));
  };
  NetworkState final_state = run(setup.problem, setup.mix, sched,
                                 cfg.iterations, obs, cfg.stride, setup.X0);

  write_metrics_csv(default_output_path(cfg), csv_comments(cfg, sched, false),
                    rows);
  log << cfg.name << ": " << cfg.iterations << " iterations, wrote "
      << rows.size() << " rows to " << default_output_path(cfg) << "\n";
  if (cfg.name == "svm") {
    Vector wbar = weighted_average(final_state.X, setup.mix.u);
    log << "svm test accuracy: "
        << svm_test_accuracy(setup.problem, wbar, cfg.seed) << "\n";
  }
  return rows;
}

std::vector<MetricRow> run_fixed_baseline(const ExperimentConfig& cfg,
                                          std::ostream& log) {
  ExperimentSetup setup = materialize(cfg);
  ValidationReport report = validate_assumptions(setup.mix.R, setup.mix.C);
  if (!report.all_passed())
    throw std::runtime_error("mixing matrices fail the standing assumptions");
  OracleContext ctx = oracle_context(setup.problem, cfg.oracle_tol);

  Schedule sched;
  sched.fixed = true;
  sched.gamma0 = cfg.baseline_gamma > 0.0 ? cfg.baseline_gamma
                                          : cfg.schedule.gamma0;
  sched.lambda0 = cfg.baseline_lambda;
  sched.agent_scales.assign(setup.problem.m, 1.0);

  std::vector<MetricRow> rows;
  Observer obs = [&](const NetworkState& state, const StepParams& params) {
    rows.push_back(metric_row(setup.problem, setup.mix, state, params, ctx));
  };
  run(setup.problem, setup.mix, sched, cfg.iterations, obs, cfg.stride,
      setup.X0);

  write_metrics_csv(baseline_output_path(cfg), csv_comments(cfg, sched, true),
                    rows);
  log << cfg.name << " baseline: wrote " << rows.size() << " rows to "
      << baseline_output_path(cfg) << "\n";
  return rows;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"iteratively regularized push-pull simulator"};
  app.require_subcommand(1);

  std::string config_path, preset_name, output;
  long iters = -1, stride = -1;
  std::int64_t seed = -1;
  double lambda = -1.0, tol = 1e-6;

  auto add_common = [&](CLI::App* sub, bool need_source) {
    auto* c = sub->add_option("--config", config_path, "JSON config file");
    auto* p = sub->add_option("--preset", preset_name,
                              "sensor|deblur|svm|constrained-qp|least-norm");
    if (need_source) {
      c->excludes(p);
      p->excludes(c);
    }
    sub->add_option("--output", output, "CSV output path");
    sub->add_option("--iters", iters, "iteration count override");
    sub->add_option("--stride", stride, "observer stride override");
    sub->add_option("--seed", seed, "PRNG seed override");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "run an experiment");
  add_common(cmd_run, true);
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "check graph and mixing assumptions");
  add_common(cmd_validate, true);
  CLI::App* cmd_oracle =
      app.add_subcommand("oracle", "print a centralized reference solution");
  add_common(cmd_oracle, true);
  cmd_oracle->add_option("--lambda", lambda,
                         "regularization level (omit for the bilevel limit)");
  cmd_oracle->add_option("--tol", tol, "oracle tolerance");
  CLI::App* cmd_compare = app.add_subcommand(
      "compare", "run the schedule-driven method and the fixed baseline");
  add_common(cmd_compare, true);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty())
      cfg = load_config(config_path);
    else if (!preset_name.empty())
      cfg = preset(preset_name);
    else
      throw std::runtime_error("need --config or --preset");
    if (!output.empty()) cfg.output = output;
    if (iters > 0) cfg.iterations = iters;
    if (stride > 0) cfg.stride = stride;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);

    if (cmd_run->parsed()) {
      run_experiment(cfg, std::cout);
      return 0;
    }
    if (cmd_validate->parsed()) {
      bool ok = true;
      std::vector<std::string> rules =
          cfg.name == "sensor" ? std::vector<std::string>{"neighbor",
                                                          "laplacian"}
                               : std::vector<std::string>{cfg.mixing};
      for (const std::string& rule : rules) {
        ExperimentConfig c = cfg;
        c.mixing = rule;
        ValidationReport report = validate_experiment(c);
        for (const ValidationCheck& check : report.checks)
          std::cout << (check.passed ? "PASS " : "FAIL ") << rule << ": "
                    << check.name
                    << (check.detail.empty() ? "" : " (" + check.detail + ")")
                    << "\n";
        ok = ok && report.all_passed();
      }
      return ok ? 0 : 1;
    }
    if (cmd_oracle->parsed()) {
      ExperimentSetup setup = materialize(cfg);
      OracleSolution sol = lambda > 0.0
                               ? tikhonov_point(setup.problem, lambda, tol)
                               : bilevel_solution(setup.problem, tol);
      std::cout << "method: " << sol.method << "\nlambda: "
                << format_double(sol.lambda)
                << "\nresidual: " << format_double(sol.residual) << "\nx:";
      for (double v : sol.x) std::cout << " " << format_double(v);
      std::cout << "\n";
      return 0;
    }
    if (cmd_compare->parsed()) {
      std::vector<MetricRow> ir = run_experiment(cfg, std::cout);
      std::vector<MetricRow> fixed = run_fixed_baseline(cfg, std::cout);
      auto final_of = [](const std::vector<MetricRow>& rows, const char* tag) {
        const MetricRow& r = rows.back();
        std::cout << tag << " final:";
        if (r.subopt_g) std::cout << " subopt_g=" << format_double(*r.subopt_g);
        if (r.dist_xstar)
          std::cout << " dist_xstar=" << format_double(*r.dist_xstar);
        std::cout << " consensus_x=" << format_double(r.consensus_x) << "\n";
      };
      final_of(ir, "schedule-driven");
      final_of(fixed, "fixed-lambda");
      return 0;
    }
    throw std::runtime_error("no subcommand");
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace irpp
