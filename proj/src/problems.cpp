#include "irpp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <memory>
#include <stdexcept>

#include "irpp/kernels.hpp"
#include "irpp/rng.hpp"

namespace irpp {

namespace {

// FNV-1a over the defining data; keys the oracle's disk cache.
class Digest {
 public:
  void add(const char* tag) {
    while (*tag) byte(static_cast<unsigned char>(*tag++));
  }
  void add(double v) {
    unsigned char raw[sizeof(double)];
    std::memcpy(raw, &v, sizeof(double));
    for (unsigned char c : raw) byte(c);
  }
  void add(const Vector& v) {
    add(static_cast<double>(v.size()));
    for (double x : v) add(x);
  }
  void add(const Matrix& a) {
    add(static_cast<double>(a.rows()));
    add(static_cast<double>(a.cols()));
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) add(a.data()[i]);
  }
  std::string str() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  void byte(unsigned char c) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

double lambda_min_spd(const Matrix& Q) {
  double s = spectral_norm(Q);
  if (s == 0.0) return 0.0;
  Matrix shifted(Q.rows(), Q.cols());
  for (std::size_t i = 0; i < Q.rows(); ++i)
    for (std::size_t j = 0; j < Q.cols(); ++j)
      shifted(i, j) = (i == j ? s : 0.0) - Q(i, j);
  return s - spectral_norm(shifted);
}

bool is_spd(const Matrix& Q) {
  const std::size_t n = Q.rows();
  if (Q.cols() != n) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(Q(i, j) - Q(j, i)) > 1e-12) return false;
  // Cholesky attempt.
  Matrix L(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = Q(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= L(i, k) * L(j, k);
      if (i == j) {
        if (acc <= 0.0) return false;
        L(i, i) = std::sqrt(acc);
      } else {
        L(i, j) = acc / L(j, j);
      }
    }
  }
  return true;
}

}  // namespace

double ProblemInstance::g(std::span<const double> x) const {
  double acc = 0.0;
  for (const auto& gi : g_value) acc += gi(x);
  return acc;
}

double ProblemInstance::f(std::span<const double> x) const {
  double acc = 0.0;
  for (const auto& fi : f_value) acc += fi(x);
  return acc;
}

Vector ProblemInstance::grad_g(std::span<const double> x) const {
  Vector out(n, 0.0), tmp(n);
  for (const auto& gi : g_gradient) {
    gi(x, tmp);
    kernels::axpy(1.0, tmp.data(), out.data(), tmp.size());
  }
  return out;
}

Vector ProblemInstance::grad_f(std::span<const double> x) const {
  Vector out(n, 0.0), tmp(n);
  for (const auto& fi : f_gradient) {
    fi(x, tmp);
    kernels::axpy(1.0, tmp.data(), out.data(), tmp.size());
  }
  return out;
}

Matrix eval_regularized_gradient(const ProblemInstance& p, const Matrix& X,
                                 double lambda) {
  if (static_cast<int>(X.rows()) != p.m || static_cast<int>(X.cols()) != p.n)
    throw std::invalid_argument("eval_regularized_gradient: shape mismatch");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  Matrix G(p.m, p.n);
  Vector tmp(p.n);
  for (int i = 0; i < p.m; ++i) {
    p.g_gradient[i](X.row_span(i), G.row_span(i));
    if (lambda != 0.0) {
      p.f_gradient[i](X.row_span(i), tmp);
      kernels::axpy(lambda, tmp.data(), G.row(i), tmp.size());
    }
  }
  return G;
}

ProblemInstance make_least_norm_ls(const std::vector<AgentBlock>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("need at least one block");
  const int m = static_cast<int>(blocks.size());
  const int n = static_cast<int>(blocks.front().A.cols());
  ProblemInstance p;
  p.m = m;
  p.n = n;
  Digest digest;
  digest.add("least_norm_ls");

  std::size_t total_rows = 0;
  for (const auto& blk : blocks) {
    if (static_cast<int>(blk.A.cols()) != n)
      throw std::invalid_argument("inconsistent block widths");
    if (blk.A.rows() != blk.b.size())
      throw std::invalid_argument("block row/rhs mismatch");
    total_rows += blk.A.rows();
  }

  p.A = Matrix(total_rows, n);
  p.b.resize(total_rows);
  std::size_t at = 0;
  for (const auto& blk : blocks) {
    for (std::size_t r = 0; r < blk.A.rows(); ++r, ++at) {
      std::copy(blk.A.row(r), blk.A.row(r) + n, p.A.row(at));
      p.b[at] = blk.b[r];
    }
    digest.add(blk.A);
    digest.add(blk.b);
  }

  p.mu_f = p.L_f = 2.0 / m;
  p.L_g = 0.0;
  p.g_hess = Matrix(n, n);
  p.g_lin = Vector(n, 0.0);
  for (const auto& blk : blocks) {
    p.L_g = std::max(p.L_g, spectral_norm(blk.A) * spectral_norm(blk.A));
    for (std::size_t r = 0; r < blk.A.rows(); ++r) {
      const double* row = blk.A.row(r);
      for (int i = 0; i < n; ++i) {
        if (row[i] == 0.0) continue;
        kernels::axpy(row[i], row, p.g_hess.row(i), n);
        p.g_lin[i] += row[i] * blk.b[r];
      }
    }
  }
  p.f_hess = Matrix(n, n);
  for (int i = 0; i < n; ++i) p.f_hess(i, i) = 2.0;
  p.f_lin = Vector(n, 0.0);
  p.closed_form = true;

  auto shared = std::make_shared<std::vector<AgentBlock>>(blocks);
  const double inv_m = 1.0 / m;
  for (int i = 0; i < m; ++i) {
    p.g_value.push_back([shared, i](std::span<const double> x) {
      const auto& blk = (*shared)[i];
      double acc = 0.0;
      for (std::size_t r = 0; r < blk.A.rows(); ++r) {
        double res = kernels::dot(blk.A.row(r), x.data(), x.size()) - blk.b[r];
        acc += res * res;
      }
      return 0.5 * acc;
    });
    p.g_gradient.push_back([shared, i](std::span<const double> x,
                                       std::span<double> out) {
      const auto& blk = (*shared)[i];
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t r = 0; r < blk.A.rows(); ++r) {
        double res = kernels::dot(blk.A.row(r), x.data(), x.size()) - blk.b[r];
        kernels::axpy(res, blk.A.row(r), out.data(), out.size());
      }
    });
    p.f_value.push_back([inv_m](std::span<const double> x) {
      return inv_m * kernels::sumsq(x.data(), x.size());
    });
    p.f_gradient.push_back([inv_m](std::span<const double> x,
                                   std::span<double> out) {
      for (std::size_t j = 0; j < x.size(); ++j) out[j] = 2.0 * inv_m * x[j];
    });
  }
  p.digest = digest.str();
  return p;
}

ProblemInstance make_linear_constrained(const std::vector<Matrix>& Q,
                                        const std::vector<Vector>& q,
                                        const std::vector<AgentBlock>& blocks,
                                        const std::vector<int>& nonneg_indices) {
  if (Q.empty() || Q.size() != q.size() || Q.size() != blocks.size())
    throw std::invalid_argument("agent-count mismatch between f and g data");
  const int m = static_cast<int>(Q.size());
  const int n = static_cast<int>(Q.front().rows());

  ProblemInstance p;
  p.m = m;
  p.n = n;
  Digest digest;
  digest.add("linear_constrained");

  p.mu_f = std::numeric_limits<double>::infinity();
  p.L_f = 0.0;
  for (int i = 0; i < m; ++i) {
    if (!is_spd(Q[i]))
      throw std::invalid_argument("Q blocks must be symmetric positive definite");
    if (static_cast<int>(q[i].size()) != n)
      throw std::invalid_argument("q dimension mismatch");
    p.mu_f = std::min(p.mu_f, lambda_min_spd(Q[i]));
    p.L_f = std::max(p.L_f, spectral_norm(Q[i]));
    digest.add(Q[i]);
    digest.add(q[i]);
  }

  std::size_t total_rows = 0;
  for (const auto& blk : blocks) {
    if (static_cast<int>(blk.A.cols()) != n && blk.A.rows() > 0)
      throw std::invalid_argument("inconsistent constraint block widths");
    total_rows += blk.A.rows();
  }
  p.A = Matrix(total_rows, n);
  p.b.resize(total_rows);
  std::size_t at = 0;
  p.L_g = 1.0 / std::sqrt(static_cast<double>(m));
  double max_rho = 0.0;
  for (const auto& blk : blocks) {
    max_rho = std::max(max_rho, spectral_norm(blk.A) * spectral_norm(blk.A));
    for (std::size_t r = 0; r < blk.A.rows(); ++r, ++at) {
      std::copy(blk.A.row(r), blk.A.row(r) + n, p.A.row(at));
      p.b[at] = blk.b[r];
    }
    digest.add(blk.A);
    digest.add(blk.b);
  }
  p.L_g += max_rho;
  p.has_linear_constraints = true;
  p.nonneg_indices = nonneg_indices;
  for (int j : nonneg_indices) {
    if (j < 0 || j >= n) throw std::invalid_argument("nonneg index out of range");
    digest.add(static_cast<double>(j));
  }

  if (nonneg_indices.empty()) {
    // Pure quadratic composite; expose closed-form data.
    p.closed_form = true;
    p.g_hess = Matrix(n, n);
    p.g_lin = Vector(n, 0.0);
    for (const auto& blk : blocks) {
      for (std::size_t r = 0; r < blk.A.rows(); ++r) {
        const double* row = blk.A.row(r);
        for (int i = 0; i < n; ++i) {
          if (row[i] == 0.0) continue;
          kernels::axpy(row[i], row, p.g_hess.row(i), n);
          p.g_lin[i] += row[i] * blk.b[r];
        }
      }
    }
    p.f_hess = Matrix(n, n);
    p.f_lin = Vector(n, 0.0);
    for (int i = 0; i < m; ++i) {
      for (int r = 0; r < n; ++r)
        kernels::axpy(1.0, Q[i].row(r), p.f_hess.row(r), n);
      kernels::axpy(1.0, q[i].data(), p.f_lin.data(), n);
    }
  }

  auto shared_blocks = std::make_shared<std::vector<AgentBlock>>(blocks);
  auto shared_Q = std::make_shared<std::vector<Matrix>>(Q);
  auto shared_q = std::make_shared<std::vector<Vector>>(q);
  auto shared_J = std::make_shared<std::vector<int>>(nonneg_indices);
  const double inv_m = 1.0 / m;
  for (int i = 0; i < m; ++i) {
    p.g_value.push_back([shared_blocks, shared_J, inv_m, i](
                            std::span<const double> x) {
      const auto& blk = (*shared_blocks)[i];
      double acc = 0.0;
      for (std::size_t r = 0; r < blk.A.rows(); ++r) {
        double res = kernels::dot(blk.A.row(r), x.data(), x.size()) - blk.b[r];
        acc += res * res;
      }
      acc *= 0.5;
      for (int j : *shared_J) {
        double h = std::max(0.0, -x[j]);
        acc += 0.5 * inv_m * h * h;
      }
      return acc;
    });
    p.g_gradient.push_back([shared_blocks, shared_J, inv_m, i](
                               std::span<const double> x, std::span<double> out) {
      const auto& blk = (*shared_blocks)[i];
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t r = 0; r < blk.A.rows(); ++r) {
        double res = kernels::dot(blk.A.row(r), x.data(), x.size()) - blk.b[r];
        kernels::axpy(res, blk.A.row(r), out.data(), out.size());
      }
      for (int j : *shared_J) out[j] -= inv_m * std::max(0.0, -x[j]);
    });
    p.f_value.push_back([shared_Q, shared_q, i](std::span<const double> x) {
      Vector qx = matvec((*shared_Q)[i], x);
      return 0.5 * kernels::dot(x.data(), qx.data(), x.size()) +
             kernels::dot((*shared_q)[i].data(), x.data(), x.size());
    });
    p.f_gradient.push_back([shared_Q, shared_q, i](std::span<const double> x,
                                                   std::span<double> out) {
      const Matrix& Qi = (*shared_Q)[i];
      for (std::size_t r = 0; r < Qi.rows(); ++r)
        out[r] = kernels::dot(Qi.row(r), x.data(), x.size()) + (*shared_q)[i][r];
    });
  }
  p.digest = digest.str();
  return p;
}

Matrix blur_operator_1d(int width, const Vector& kernel) {
  if (kernel.empty() || kernel.size() % 2 == 0)
    throw std::invalid_argument("kernel must have odd length");
  const int radius = static_cast<int>(kernel.size()) / 2;
  if (static_cast<int>(kernel.size()) > width)
    throw std::invalid_argument("kernel wider than image");
  Matrix T(width, width);
  for (int i = 0; i < width; ++i) {
    for (int off = -radius; off <= radius; ++off) {
      int j = i + off;
      if (j < 0) j = -j - 1;                        // reflective boundary
      if (j >= width) j = 2 * width - j - 1;
      T(i, j) += kernel[off + radius];
    }
  }
  return T;
}

ProblemInstance make_blur_instance(const Vector& image, int width,
                                   const Vector& kernel, int m,
                                   double noise_sigma, std::uint64_t noise_seed) {
  const int n = width * width;
  if (static_cast<int>(image.size()) != n)
    throw std::invalid_argument("image size must be width^2");
  if (m < 1 || m > n) throw std::invalid_argument("bad agent count");
  Matrix T = blur_operator_1d(width, kernel);

  // Row-wise convolution of the flattened image: block-diagonal operator.
  Matrix A(n, n);
  for (int row = 0; row < width; ++row)
    for (int i = 0; i < width; ++i)
      for (int j = 0; j < width; ++j)
        A(row * width + i, row * width + j) = T(i, j);

  Vector b = matvec(A, image);
  if (noise_sigma > 0.0) {
    Rng rng(noise_seed);
    for (double& v : b) v += noise_sigma * rng.normal();
  }

  // Contiguous near-equal row blocks (sizes differ by at most one).
  std::vector<AgentBlock> blocks(m);
  int base = n / m, extra = n % m, at = 0;
  for (int i = 0; i < m; ++i) {
    int rows = base + (i < extra ? 1 : 0);
    blocks[i].A = Matrix(rows, n);
    blocks[i].b.resize(rows);
    for (int r = 0; r < rows; ++r, ++at) {
      std::copy(A.row(at), A.row(at) + n, blocks[i].A.row(r));
      blocks[i].b[r] = b[at];
    }
  }

  ProblemInstance p;
  p.m = m;
  p.n = n;
  p.mu_f = p.L_f = 1.0 / m;  // f_i = ||x||^2/(2m)
  Digest digest;
  digest.add("blur");
  digest.add(image);
  digest.add(kernel);
  digest.add(static_cast<double>(m));
  digest.add(noise_sigma);
  digest.add(static_cast<double>(noise_seed));
  p.digest = digest.str();

  p.closed_form = true;
  p.g_hess = Matrix(n, n);
  p.g_lin = Vector(n, 0.0);
  p.L_g = 0.0;
  for (const auto& blk : blocks) {
    double rho = spectral_norm(blk.A);
    p.L_g = std::max(p.L_g, 2.0 * rho * rho);
    for (std::size_t r = 0; r < blk.A.rows(); ++r) {
      const double* row = blk.A.row(r);
      for (int i = 0; i < n; ++i) {
        if (row[i] == 0.0) continue;
        kernels::axpy(2.0 * row[i], row, p.g_hess.row(i), n);
        p.g_lin[i] += 2.0 * row[i] * blk.b[r];
      }
    }
  }
  p.f_hess = Matrix::identity(n);
  p.f_lin = Vector(n, 0.0);
  p.A = std::move(A);
  p.b = b;
  if (noise_sigma == 0.0) p.known_xstar = image;

  auto shared = std::make_shared<std::vector<AgentBlock>>(std::move(blocks));
  const double inv_2m = 0.5 / m;
  for (int i = 0; i < m; ++i) {
    p.g_value.push_back([shared, i](std::span<const double> x) {
      const auto& blk = (*shared)[i];
      double acc = 0.0;
      for (std::size_t r = 0; r < blk.A.rows(); ++r) {
        double res = kernels::dot(blk.A.row(r), x.data(), x.size()) - blk.b[r];
        acc += res * res;
      }
      return acc;
    });
    p.g_gradient.push_back([shared, i](std::span<const double> x,
                                       std::span<double> out) {
      const auto& blk = (*shared)[i];
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t r = 0; r < blk.A.rows(); ++r) {
        double res = kernels::dot(blk.A.row(r), x.data(), x.size()) - blk.b[r];
        kernels::axpy(2.0 * res, blk.A.row(r), out.data(), out.size());
      }
    });
    p.f_value.push_back([inv_2m](std::span<const double> x) {
      return inv_2m * kernels::sumsq(x.data(), x.size());
    });
    p.f_gradient.push_back([inv_2m](std::span<const double> x,
                                    std::span<double> out) {
      for (std::size_t j = 0; j < x.size(); ++j) out[j] = 2.0 * inv_2m * x[j];
    });
  }
  return p;
}

ProblemInstance make_svm_instance(const SvmData& train,
                                  const std::vector<std::vector<int>>& partition,
                                  double eta, double eps_sc) {
  const int s = static_cast<int>(train.features.rows());
  const int nf = static_cast<int>(train.features.cols());
  if (static_cast<int>(train.labels.size()) != s)
    throw std::invalid_argument("label count mismatch");
  for (double v : train.labels)
    if (v != 1.0 && v != -1.0)
      throw std::invalid_argument("labels must be +1 or -1");
  if (eta <= 0.0 || eps_sc <= 0.0)
    throw std::invalid_argument("eta and eps_sc must be positive");
  std::vector<bool> covered(s, false);
  for (const auto& cell : partition)
    for (int idx : cell) {
      if (idx < 0 || idx >= s || covered[idx])
        throw std::invalid_argument("partition cells must partition the samples");
      covered[idx] = true;
    }
  if (!std::all_of(covered.begin(), covered.end(), [](bool c) { return c; }))
    throw std::invalid_argument("partition does not cover all samples");

  const int m = static_cast<int>(partition.size());
  ProblemInstance p;
  p.m = m;
  p.n = nf + 1 + s;  // w = (x, bias, z)
  p.mu_f = std::min(eta, eps_sc) / m;
  p.L_f = std::max(eta, eps_sc) / m;
  p.metadata =
      "svm: f augmented with (eps_sc/2m)(b^2+|z|^2) = " + format_double(eps_sc) +
      " to restore strong convexity; hinge-squared smoothness uses the "
      "one-sided bound";

  Digest digest;
  digest.add("svm");
  digest.add(train.features);
  digest.add(train.labels);
  digest.add(eta);
  digest.add(eps_sc);
  for (const auto& cell : partition)
    for (int idx : cell) digest.add(static_cast<double>(idx));
  p.digest = digest.str();

  double max_cell = 1.0;
  for (const auto& cell : partition) {
    double acc = 1.0;  // z-hinge contribution
    for (int idx : cell)
      acc += kernels::sumsq(train.features.row(idx), nf) + 2.0;
    max_cell = std::max(max_cell, acc);
  }
  p.L_g = max_cell;

  auto feats = std::make_shared<Matrix>(train.features);
  auto labels = std::make_shared<Vector>(train.labels);
  auto cells = std::make_shared<std::vector<std::vector<int>>>(partition);
  const double inv_m = 1.0 / m;
  for (int i = 0; i < m; ++i) {
    p.g_value.push_back([feats, labels, cells, nf, i](std::span<const double> w) {
      double acc = 0.0;
      const double bias = w[nf];
      for (int idx : (*cells)[i]) {
        double margin =
            (*labels)[idx] *
                (kernels::dot(feats->row(idx), w.data(), nf) + bias);
        double z = w[nf + 1 + idx];
        double h1 = std::max(0.0, 1.0 - z - margin);
        double h2 = std::max(0.0, -z);
        acc += 0.5 * (h1 * h1 + h2 * h2);
      }
      return acc;
    });
    p.g_gradient.push_back([feats, labels, cells, nf, i](
                               std::span<const double> w, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      const double bias = w[nf];
      for (int idx : (*cells)[i]) {
        double v = (*labels)[idx];
        double margin =
            v * (kernels::dot(feats->row(idx), w.data(), nf) + bias);
        double z = w[nf + 1 + idx];
        double h1 = std::max(0.0, 1.0 - z - margin);
        if (h1 > 0.0) {
          kernels::axpy(-h1 * v, feats->row(idx), out.data(), nf);
          out[nf] -= h1 * v;
          out[nf + 1 + idx] -= h1;
        }
        out[nf + 1 + idx] -= std::max(0.0, -z);
      }
    });
    p.f_value.push_back([cells, nf, eta, eps_sc, inv_m, i](
                            std::span<const double> w) {
      double acc = 0.5 * eta * inv_m * kernels::sumsq(w.data(), nf);
      for (int idx : (*cells)[i]) acc += inv_m * w[nf + 1 + idx];
      double bias = w[nf];
      double zsq = kernels::sumsq(w.data() + nf + 1, w.size() - nf - 1);
      acc += 0.5 * eps_sc * inv_m * (bias * bias + zsq);
      return acc;
    });
    p.f_gradient.push_back([cells, nf, eta, eps_sc, inv_m, i](
                               std::span<const double> w, std::span<double> out) {
      for (int j = 0; j < nf; ++j) out[j] = eta * inv_m * w[j];
      out[nf] = eps_sc * inv_m * w[nf];
      for (std::size_t j = nf + 1; j < w.size(); ++j)
        out[j] = eps_sc * inv_m * w[j];
      for (int idx : (*cells)[i]) out[nf + 1 + idx] += inv_m;
    });
  }
  return p;
}

}  // namespace irpp
