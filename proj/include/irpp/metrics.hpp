#pragma once
// Error metrics recorded along a run: consensus violations, suboptimality,
// infeasibility, the gradient-tracking residual, Tikhonov distances, and
// empirical rate-slope estimation. All diagnostics use the 2-norm.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "irpp/engine.hpp"
#include "irpp/problems.hpp"

namespace irpp {

struct MetricRow {
  long k = 0;
  double gamma_hat = 0.0;
  double lambda = 0.0;
  double consensus_x = 0.0;
  double consensus_y = 0.0;
  std::optional<double> subopt_f;        // f(xbar_k) - f(x*)
  std::optional<double> subopt_g;        // g(xbar_k) - g(x*)
  std::optional<double> infeas;          // ||A xbar_k - b||^2
  double tracking_residual = 0.0;
  std::optional<double> dist_tikhonov;   // ||xbar_k - x*_{lambda_k}||
  std::optional<double> dist_xstar;      // ||xbar_k - x*||
};

// (1/m) u^T X; u must satisfy u^T 1 = m.
Vector weighted_average(const Matrix& X, const Vector& u);

// ||X - (1 1^T / m) X||_F, distance from rank-one average replication.
double consensus_violation(const Matrix& X);

// ||(1/m) 1^T Y - mean_i(grad g_i(x_i) + lambda grad f_i(x_i))||_2.
double tracking_residual(const Matrix& Y, const Matrix& X,
                         const ProblemInstance& p, double lambda);

// Least-squares slope of log err vs log k over k in [k_lo, k_hi].
// Requires at least 10 in-window samples with positive errors.
double rate_slope(const std::vector<std::pair<long, double>>& series,
                  long k_lo, long k_hi);

// CSV with '#'-prefixed comment lines, fixed column order, and empty cells
// where a metric is undefined for the instance.
extern const char* const kMetricsCsvHeader;
std::string format_metric_row(const MetricRow& row);
void write_metrics_csv(const std::string& path,
                       const std::vector<std::string>& comments,
                       const std::vector<MetricRow>& rows);

}  // namespace irpp
