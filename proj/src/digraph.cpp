#include "irpp/digraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "irpp/kernels.hpp"
#include "irpp/rng.hpp"

namespace irpp {

namespace {

void rebuild_adjacency(Digraph& g) {
  g.in_neighbors.assign(g.m, {});
  g.out_neighbors.assign(g.m, {});
  for (const auto& [parent, child] : g.edges) {
    g.out_neighbors[parent - 1].push_back(child);
    g.in_neighbors[child - 1].push_back(parent);
  }
  for (auto& v : g.in_neighbors) std::sort(v.begin(), v.end());
  for (auto& v : g.out_neighbors) std::sort(v.begin(), v.end());
}

// Vertices reachable from `start` (including itself).
std::vector<bool> reachable_from(const Digraph& g, int start) {
  std::vector<bool> seen(g.m, false);
  std::deque<int> queue{start};
  seen[start - 1] = true;
  while (!queue.empty()) {
    int at = queue.front();
    queue.pop_front();
    for (int next : g.out_neighbors[at - 1]) {
      if (!seen[next - 1]) {
        seen[next - 1] = true;
        queue.push_back(next);
      }
    }
  }
  return seen;
}

}  // namespace

TopologyKind topology_kind_from_string(const std::string& s) {
  if (s == "ring") return TopologyKind::ring;
  if (s == "line") return TopologyKind::line;
  if (s == "star") return TopologyKind::star;
  if (s == "random") return TopologyKind::random_strongly_connected;
  throw std::invalid_argument("unknown topology kind: " + s);
}

Digraph make_digraph(int m, const std::vector<std::pair<int, int>>& edges) {
  if (m < 1) throw std::invalid_argument("digraph needs at least one vertex");
  Digraph g;
  g.m = m;
  for (const auto& [from, to] : edges) {
    if (from < 1 || from > m || to < 1 || to > m)
      throw std::invalid_argument("edge endpoint out of range");
    if (from == to) continue;  // self-weights live in the matrix builders
    g.edges.emplace(from, to);
  }
  rebuild_adjacency(g);
  return g;
}

Digraph make_topology(TopologyKind kind, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("agent count must be positive");
  std::vector<std::pair<int, int>> edges;
  switch (kind) {
    case TopologyKind::ring:
      for (int i = 1; i <= m; ++i) edges.emplace_back(i, i % m + 1);
      break;
    case TopologyKind::line:
      for (int i = 1; i < m; ++i) edges.emplace_back(i, i + 1);
      break;
    case TopologyKind::star:
      for (int i = 2; i <= m; ++i) edges.emplace_back(1, i);
      break;
    case TopologyKind::random_strongly_connected: {
      if (m == 1) break;
      Rng rng(seed);
      // Erdos-Renyi rounds; keep sampling until strongly connected.
      const double p = std::min(1.0, 2.0 * std::log(std::max(2, m)) / m);
      Digraph g = make_digraph(m, {});
      while (!strongly_connected(g)) {
        for (int i = 1; i <= m; ++i)
          for (int j = 1; j <= m; ++j)
            if (i != j && rng.uniform() < p) g.edges.emplace(i, j);
        rebuild_adjacency(g);
      }
      return g;
    }
  }
  return make_digraph(m, edges);
}

Digraph reverse(const Digraph& g) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& [from, to] : g.edges) edges.emplace_back(to, from);
  return make_digraph(g.m, edges);
}

std::vector<int> roots(const Digraph& g) {
  std::vector<int> out;
  for (int s = 1; s <= g.m; ++s) {
    auto seen = reachable_from(g, s);
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
      out.push_back(s);
  }
  return out;
}

bool strongly_connected(const Digraph& g) {
  return static_cast<int>(roots(g).size()) == g.m;
}

Matrix build_row_stochastic(const Digraph& g, const Vector& self_weights) {
  if (static_cast<int>(self_weights.size()) != g.m)
    throw std::invalid_argument("self-weight count mismatch");
  for (double r : self_weights)
    if (r <= 0.0) throw std::invalid_argument("self-weights must be positive");
  Matrix R(g.m, g.m);
  for (int i = 1; i <= g.m; ++i) {
    const auto& in = g.in_neighbors[i - 1];
    const double denom = static_cast<double>(in.size()) + self_weights[i - 1];
    for (int j : in) R(i - 1, j - 1) = 1.0 / denom;
    R(i - 1, i - 1) = self_weights[i - 1] / denom;
  }
  return R;
}

Matrix build_column_stochastic(const Digraph& g, const Vector& self_weights) {
  if (static_cast<int>(self_weights.size()) != g.m)
    throw std::invalid_argument("self-weight count mismatch");
  for (double c : self_weights)
    if (c <= 0.0) throw std::invalid_argument("self-weights must be positive");
  Matrix C(g.m, g.m);
  for (int i = 1; i <= g.m; ++i) {
    const auto& out = g.out_neighbors[i - 1];
    const double denom = static_cast<double>(out.size()) + self_weights[i - 1];
    for (int l : out) C(l - 1, i - 1) = 1.0 / denom;
    C(i - 1, i - 1) = self_weights[i - 1] / denom;
  }
  return C;
}

Matrix build_row_stochastic(const Digraph& g) {
  return build_row_stochastic(g, Vector(g.m, 1.0));
}

Matrix build_column_stochastic(const Digraph& g) {
  return build_column_stochastic(g, Vector(g.m, 1.0));
}

Matrix build_laplacian_row_stochastic(const Digraph& g) {
  int d_max = 0;
  for (const auto& in : g.in_neighbors)
    d_max = std::max(d_max, static_cast<int>(in.size()));
  if (d_max == 0) throw std::invalid_argument("edgeless graph has no Laplacian mixing");
  const double w = 1.0 / (2.0 * d_max);
  Matrix R(g.m, g.m);
  for (int i = 1; i <= g.m; ++i) {
    const auto& in = g.in_neighbors[i - 1];
    for (int j : in) R(i - 1, j - 1) = w;
    R(i - 1, i - 1) = 1.0 - w * static_cast<double>(in.size());
  }
  return R;
}

Matrix build_laplacian_column_stochastic(const Digraph& g) {
  int d_max = 0;
  for (const auto& out : g.out_neighbors)
    d_max = std::max(d_max, static_cast<int>(out.size()));
  if (d_max == 0) throw std::invalid_argument("edgeless graph has no Laplacian mixing");
  const double w = 1.0 / (2.0 * d_max);
  Matrix C(g.m, g.m);
  for (int i = 1; i <= g.m; ++i) {
    const auto& out = g.out_neighbors[i - 1];
    for (int l : out) C(l - 1, i - 1) = w;
    C(i - 1, i - 1) = 1.0 - w * static_cast<double>(out.size());
  }
  return C;
}

Digraph induced_digraph(const Matrix& B) {
  const int m = static_cast<int>(B.rows());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && B(i, j) > 0.0) edges.emplace_back(j + 1, i + 1);
  return make_digraph(m, edges);
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.passed; });
}

ValidationReport validate_assumptions(const Matrix& R, const Matrix& C) {
  constexpr double kStochTol = 1e-12;
  ValidationReport report;
  auto add = [&](std::string name, bool ok, std::string detail = "") {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  const std::size_t m = R.rows();
  bool shapes_ok = R.cols() == m && C.rows() == m && C.cols() == m && m > 0;
  add("square matrices of equal size", shapes_ok);
  if (!shapes_ok) return report;

  bool r_nonneg = true, c_nonneg = true, r_diag = true, c_diag = true;
  for (std::size_t i = 0; i < m; ++i) {
    if (R(i, i) <= 0.0) r_diag = false;
    if (C(i, i) <= 0.0) c_diag = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (R(i, j) < 0.0) r_nonneg = false;
      if (C(i, j) < 0.0) c_nonneg = false;
    }
  }
  add("R nonnegative", r_nonneg);
  add("R positive diagonal", r_diag);
  add("C nonnegative", c_nonneg);
  add("C positive diagonal", c_diag);

  double worst_row = 0.0, worst_col = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double rs = 0.0, cs = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      rs += R(i, j);
      cs += C(j, i);
    }
    worst_row = std::max(worst_row, std::abs(rs - 1.0));
    worst_col = std::max(worst_col, std::abs(cs - 1.0));
  }
  add("R row-stochastic", worst_row <= kStochTol,
      "max |row sum - 1| = " + format_double(worst_row));
  add("C column-stochastic", worst_col <= kStochTol,
      "max |col sum - 1| = " + format_double(worst_col));

  auto roots_r = roots(induced_digraph(R));
  auto roots_ct = roots(induced_digraph(transpose(C)));
  std::vector<int> common;
  std::set_intersection(roots_r.begin(), roots_r.end(), roots_ct.begin(),
                        roots_ct.end(), std::back_inserter(common));
  std::string detail = "|roots(G_R)| = " + std::to_string(roots_r.size()) +
                       ", |roots(G_C^T)| = " + std::to_string(roots_ct.size()) +
                       ", intersection = " + std::to_string(common.size());
  add("root sets intersect", !common.empty(), detail);
  return report;
}

namespace {

constexpr int kPowerIterCap = 1000000;
constexpr double kPowerTol = 1e-10;

// Fixed point of x -> M x with eigenvalue 1, normalized to sum m.
Vector power_fixed_point(const Matrix& M, Vector x) {
  const std::size_t m = M.rows();
  double s = 0.0;
  for (double xi : x) s += xi;
  for (double& xi : x) xi *= static_cast<double>(m) / s;
  for (int it = 0; it < kPowerIterCap; ++it) {
    Vector next = matvec(M, x);
    double sum = 0.0;
    for (double v : next) sum += v;
    if (sum != 0.0)
      kernels::scale(static_cast<double>(m) / sum, next.data(), next.size());
    double res = 0.0;
    for (std::size_t i = 0; i < m; ++i) res += (next[i] - x[i]) * (next[i] - x[i]);
    x = std::move(next);
    if (std::sqrt(res) <= kPowerTol) return x;
  }
  throw std::runtime_error(
      "power iteration did not converge (spectral-gap failure)");
}

Vector perron_vector(const Matrix& M) {
  const std::size_t m = M.rows();
  // Two starts; a mismatch means the eigenvector is not unique.
  Vector a = power_fixed_point(M, Vector(m, 1.0));
  Rng rng(12345);
  Vector start(m);
  for (double& s : start) s = rng.uniform(0.5, 1.5);
  Vector b = power_fixed_point(M, start);
  for (std::size_t i = 0; i < m; ++i)
    if (std::abs(a[i] - b[i]) > 1e-6)
      throw std::runtime_error(
          "Perron eigenvector is not unique (Assumption violation, e.g. R = I)");
  return a;
}

}  // namespace

MixingPair perron_pair(const Matrix& R, const Matrix& C) {
  MixingPair mix;
  mix.R = R;
  mix.C = C;
  mix.u = perron_vector(transpose(R));
  mix.v = perron_vector(C);
  double uv = kernels::dot(mix.u.data(), mix.v.data(), mix.u.size());
  if (uv <= 0.0) throw std::runtime_error("u^T v must be positive");
  return mix;
}

}  // namespace irpp
