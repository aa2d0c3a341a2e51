#pragma once

#include <cstddef>
#include <string>

// Vector arithmetic kernels used by the model and the nearest-neighbor
// search. Every kernel has a scalar reference implementation plus SIMD
// variants (AVX2 on x86-64, NEON on aarch64) selected once at startup.
// The SIMD variants reassociate floating-point sums, so results may
// differ from the scalar reference by a few ulps; within one process a
// single backend is active, so repeated calls are bit-identical.

namespace skmt::simd {

enum class Backend { scalar, avx2, neon };

// Backend chosen at startup (CPU detection, overridable via the
// SKMT_SIMD environment variable: "scalar", "avx2", "neon", "auto").
Backend active_backend();
std::string backend_name();

// Force a specific backend. Throws std::runtime_error if it is not
// available on this machine. Intended for tests and benchmarks.
void force_backend(Backend b);

// True if the backend can run on this CPU.
bool backend_available(Backend b);

// out = sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// out = sum_i (a[i] - b[i])^2
double squared_l2(const double* a, const double* b, std::size_t n);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// x[i] *= a
void scale(double* x, double a, std::size_t n);

// out[r] = dot(m + r*cols, x) for r in [0, rows); rows are contiguous.
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* out);

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
double squared_l2_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
void scale_scalar(double* x, double a, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
double squared_l2_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void scale_avx2(double* x, double a, std::size_t n);
#endif

#if defined(__aarch64__)
double dot_neon(const double* a, const double* b, std::size_t n);
double squared_l2_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double a, const double* x, double* y, std::size_t n);
void scale_neon(double* x, double a, std::size_t n);
#endif

}  // namespace detail

}  // namespace skmt::simd
