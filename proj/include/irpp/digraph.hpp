#pragma once
// Directed communication topologies, spanning-tree root sets, mixing-matrix
// construction, and Perron eigenvector computation.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "irpp/linalg.hpp"

namespace irpp {

struct Digraph {
  int m = 0;
  // Ordered pairs (parent j -> child i), no self-loops; 1-based vertex ids.
  std::set<std::pair<int, int>> edges;
  std::vector<std::vector<int>> in_neighbors;   // [i-1] = parents of i
  std::vector<std::vector<int>> out_neighbors;  // [i-1] = children of i
};

enum class TopologyKind { ring, line, star, random_strongly_connected };

TopologyKind topology_kind_from_string(const std::string& s);

Digraph make_digraph(int m, const std::vector<std::pair<int, int>>& edges);
Digraph make_topology(TopologyKind kind, int m, std::uint64_t seed = 0);

// All edges flipped; used to derive the pushing graph for line/star setups.
Digraph reverse(const Digraph& g);

// Vertices from which every other vertex is reachable (per-vertex BFS).
std::vector<int> roots(const Digraph& g);
bool strongly_connected(const Digraph& g);

// R_ij = 1/(|in(i)|+r_i) for in-neighbors, R_ii = r_i/(|in(i)|+r_i).
Matrix build_row_stochastic(const Digraph& g, const Vector& self_weights);
// Mirror with out-neighbors; C_{l,i} = 1/(|out(i)|+c_i), C_ii = c_i/(...).
Matrix build_column_stochastic(const Digraph& g, const Vector& self_weights);
// Uniform self-weight variants (r_i = c_i = 1).
Matrix build_row_stochastic(const Digraph& g);
Matrix build_column_stochastic(const Digraph& g);

// I - L/(2 d_max) with the in-degree Laplacian (row-stochastic output), or
// the out-degree Laplacian transposed into a column-stochastic matrix.
Matrix build_laplacian_row_stochastic(const Digraph& g);
Matrix build_laplacian_column_stochastic(const Digraph& g);

struct MixingPair {
  Matrix R, C;
  Vector u;  // left Perron eigenvector of R, u^T 1 = m
  Vector v;  // right Perron eigenvector of C, 1^T v = m
};

// Digraph induced by the nonzero off-diagonal pattern of B.
Digraph induced_digraph(const Matrix& B);

struct ValidationCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const;
};

ValidationReport validate_assumptions(const Matrix& R, const Matrix& C);

// Power iteration for u, v; normalizes u^T 1 = m and 1^T v = m. Throws on
// non-convergence or when the eigenvector is not unique (e.g. R = I).
MixingPair perron_pair(const Matrix& R, const Matrix& C);

}  // namespace irpp
