#include "irpp/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace irpp::kernels {

namespace detail {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sumsq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void sub_scaled_scalar(const double* x, double a, const double* y, double* out,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - a * y[i];
}

}  // namespace detail

namespace {

struct Dispatch {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*sub_scaled)(const double*, double, const double*, double*,
                     std::size_t);
};

constexpr Dispatch kScalar{Backend::scalar,
                           detail::dot_scalar,
                           detail::sumsq_scalar,
                           detail::axpy_scalar,
                           detail::scale_scalar,
                           detail::sub_scaled_scalar};

#if defined(IRPP_BUILD_AVX2)
constexpr Dispatch kAvx2{Backend::avx2,
                         detail::dot_avx2,
                         detail::sumsq_avx2,
                         detail::axpy_avx2,
                         detail::scale_avx2,
                         detail::sub_scaled_avx2};
#endif

bool avx2_available() {
#if defined(IRPP_BUILD_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Dispatch pick_initial() {
  if (const char* env = std::getenv("IRPP_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return kScalar;
#if defined(IRPP_BUILD_AVX2)
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) return kAvx2;
#endif
  }
#if defined(IRPP_BUILD_AVX2)
  if (avx2_available()) return kAvx2;
#endif
  return kScalar;
}

Dispatch g_dispatch = pick_initial();

}  // namespace

Backend active_backend() { return g_dispatch.backend; }

const char* backend_name() {
  return g_dispatch.backend == Backend::avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
  if (b == Backend::scalar) {
    g_dispatch = kScalar;
    return;
  }
#if defined(IRPP_BUILD_AVX2)
  if (avx2_available()) {
    g_dispatch = kAvx2;
    return;
  }
#endif
  throw std::runtime_error("requested kernel backend unavailable on this CPU");
}

double dot(const double* x, const double* y, std::size_t n) {
  return g_dispatch.dot(x, y, n);
}

double sumsq(const double* x, std::size_t n) { return g_dispatch.sumsq(x, n); }

void axpy(double a, const double* x, double* y, std::size_t n) {
  g_dispatch.axpy(a, x, y, n);
}

void scale(double a, double* x, std::size_t n) { g_dispatch.scale(a, x, n); }

void sub_scaled(const double* x, double a, const double* y, double* out,
                std::size_t n) {
  g_dispatch.sub_scaled(x, a, y, out, n);
}

}  // namespace irpp::kernels
