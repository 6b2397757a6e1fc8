#include "irpp/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "irpp/kernels.hpp"

namespace irpp {

Vector weighted_average(const Matrix& X, const Vector& u) {
  const std::size_t m = X.rows(), n = X.cols();
  if (u.size() != m)
    throw std::invalid_argument("weighted_average: dimension mismatch");
  Vector out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    kernels::axpy(u[i] / static_cast<double>(m), X.row(i), out.data(), n);
  return out;
}

double consensus_violation(const Matrix& X) {
  const std::size_t m = X.rows(), n = X.cols();
  Vector mean(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    kernels::axpy(1.0 / static_cast<double>(m), X.row(i), mean.data(), n);
  double sq = 0.0;
  Vector diff(n);
  for (std::size_t i = 0; i < m; ++i) {
    kernels::sub_scaled(X.row(i), 1.0, mean.data(), diff.data(), n);
    sq += kernels::sumsq(diff.data(), n);
  }
  return std::sqrt(sq);
}

double tracking_residual(const Matrix& Y, const Matrix& X,
                         const ProblemInstance& p, double lambda) {
  const std::size_t m = Y.rows(), n = Y.cols();
  if (X.rows() != m || X.cols() != n)
    throw std::invalid_argument("tracking_residual: dimension mismatch");
  Matrix G = eval_regularized_gradient(p, X, lambda);
  Vector ybar(n, 0.0), gbar(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    kernels::axpy(1.0 / static_cast<double>(m), Y.row(i), ybar.data(), n);
    kernels::axpy(1.0 / static_cast<double>(m), G.row(i), gbar.data(), n);
  }
  Vector diff(n);
  kernels::sub_scaled(ybar.data(), 1.0, gbar.data(), diff.data(), n);
  return norm2(diff);
}

double rate_slope(const std::vector<std::pair<long, double>>& series,
                  long k_lo, long k_hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long count = 0;
  for (const auto& [k, err] : series) {
    if (k < k_lo || k > k_hi) continue;
    if (err <= 0.0)
      throw std::invalid_argument("rate_slope: nonpositive error in window");
    const double x = std::log(static_cast<double>(k));
    const double y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 10)
    throw std::invalid_argument("rate_slope: need at least 10 samples");
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("rate_slope: degenerate window");
  return (count * sxy - sx * sy) / denom;
}

const char* const kMetricsCsvHeader =
    "k,gamma_hat,lambda,consensus_x,consensus_y,subopt_f,subopt_g,infeas,"
    "tracking_residual,dist_tikhonov,dist_xstar";

namespace {

void append_cell(std::string& line, const std::optional<double>& v) {
  line += ',';
  if (v) line += format_double(*v);
}

}  // namespace

std::string format_metric_row(const MetricRow& row) {
  std::string line = std::to_string(row.k);
  line += ',';
  line += format_double(row.gamma_hat);
  line += ',';
  line += format_double(row.lambda);
  line += ',';
  line += format_double(row.consensus_x);
  line += ',';
  line += format_double(row.consensus_y);
  append_cell(line, row.subopt_f);
  append_cell(line, row.subopt_g);
  append_cell(line, row.infeas);
  line += ',';
  line += format_double(row.tracking_residual);
  append_cell(line, row.dist_tikhonov);
  append_cell(line, row.dist_xstar);
  return line;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<std::string>& comments,
                       const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  for (const std::string& c : comments) out << "# " << c << "\n";
  out << kMetricsCsvHeader << "\n";
  for (const MetricRow& row : rows) out << format_metric_row(row) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace irpp
