#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "irpp/kernels.hpp"
#include "irpp/rng.hpp"

using namespace irpp;

namespace {

struct BackendGuard {
  kernels::Backend saved = kernels::active_backend();
  ~BackendGuard() { kernels::force_backend(saved); }
};

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-10.0, 10.0);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels match hand values") {
  BackendGuard guard;
  kernels::force_backend(kernels::Backend::scalar);
  double x[] = {1.0, 2.0, 3.0};
  double y[] = {4.0, -5.0, 6.0};
  CHECK(kernels::dot(x, y, 3) == doctest::Approx(12.0));
  CHECK(kernels::sumsq(x, 3) == doctest::Approx(14.0));

  double acc[] = {1.0, 1.0, 1.0};
  kernels::axpy(2.0, x, acc, 3);
  CHECK(acc[0] == 3.0);
  CHECK(acc[2] == 7.0);

  kernels::scale(0.5, acc, 3);
  CHECK(acc[0] == 1.5);

  double out[3];
  kernels::sub_scaled(x, 2.0, y, out, 3);
  CHECK(out[0] == -7.0);
  CHECK(out[1] == 12.0);
  CHECK(out[2] == -9.0);

  CHECK(kernels::dot(x, y, 0) == 0.0);
}

TEST_CASE("simd backend agrees with scalar reference across sizes") {
  BackendGuard guard;
  bool have_simd = true;
  try {
    kernels::force_backend(kernels::Backend::avx2);
  } catch (const std::runtime_error&) {
    have_simd = false;
  }
  if (!have_simd) {
    MESSAGE("simd backend unavailable on this CPU; skipping equivalence");
    return;
  }
  CHECK(std::string(kernels::backend_name()) == "avx2");

  Rng rng(42);
  for (std::size_t n :
       {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 32u, 33u,
        100u, 255u, 1000u}) {
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);
    const double tol = 1e-12 * (1.0 + static_cast<double>(n));

    double d_simd = kernels::dot(x.data(), y.data(), n);
    double d_ref = kernels::detail::dot_scalar(x.data(), y.data(), n);
    CHECK(std::abs(d_simd - d_ref) <= tol * (1.0 + std::abs(d_ref)));

    double s_simd = kernels::sumsq(x.data(), n);
    double s_ref = kernels::detail::sumsq_scalar(x.data(), n);
    CHECK(std::abs(s_simd - s_ref) <= tol * (1.0 + s_ref));

    auto y1 = y, y2 = y;
    kernels::axpy(1.75, x.data(), y1.data(), n);
    kernels::detail::axpy_scalar(1.75, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(y1[i] - y2[i]) <= 1e-13 * (1.0 + std::abs(y2[i])));

    auto z1 = x, z2 = x;
    kernels::scale(-0.3, z1.data(), n);
    kernels::detail::scale_scalar(-0.3, z2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(z1[i] == z2[i]);

    std::vector<double> o1(n), o2(n);
    kernels::sub_scaled(x.data(), 0.6, y.data(), o1.data(), n);
    kernels::detail::sub_scaled_scalar(x.data(), 0.6, y.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(o1[i] - o2[i]) <= 1e-13 * (1.0 + std::abs(o2[i])));
  }
}

TEST_CASE("forcing the scalar backend takes effect") {
  BackendGuard guard;
  kernels::force_backend(kernels::Backend::scalar);
  CHECK(kernels::active_backend() == kernels::Backend::scalar);
  CHECK(std::string(kernels::backend_name()) == "scalar");
}
