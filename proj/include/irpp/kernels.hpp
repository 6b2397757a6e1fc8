#pragma once
// Dense double-precision kernels used by the hot loops (mixing products,
// gradient evaluations, norms). A scalar reference implementation always
// exists; an AVX2/FMA variant is selected at runtime when the CPU supports
// it. Set IRPP_KERNELS=scalar (or =avx2) in the environment to override.

#include <cstddef>

namespace irpp::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name();
// Test hook; throws if the requested backend is unavailable on this CPU.
void force_backend(Backend b);

// x . y
double dot(const double* x, const double* y, std::size_t n);
// sum of squares
double sumsq(const double* x, std::size_t n);
// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);
// x *= a
void scale(double a, double* x, std::size_t n);
// out = x - a * y
void sub_scaled(const double* x, double a, const double* y, double* out,
                std::size_t n);

namespace detail {
// Scalar reference versions, exposed for equivalence tests.
double dot_scalar(const double* x, const double* y, std::size_t n);
double sumsq_scalar(const double* x, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
void scale_scalar(double a, double* x, std::size_t n);
void sub_scaled_scalar(const double* x, double a, const double* y, double* out,
                       std::size_t n);

#if defined(IRPP_BUILD_AVX2)
double dot_avx2(const double* x, const double* y, std::size_t n);
double sumsq_avx2(const double* x, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void scale_avx2(double a, double* x, std::size_t n);
void sub_scaled_avx2(const double* x, double a, const double* y, double* out,
                     std::size_t n);
#endif
}  // namespace detail

}  // namespace irpp::kernels
