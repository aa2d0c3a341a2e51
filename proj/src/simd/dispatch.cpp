#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "skmt/simd/kernels.hpp"

namespace skmt::simd {

namespace {

struct Table {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    double (*squared_l2)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double*, double, std::size_t);
};

constexpr Table kScalar = {Backend::scalar, detail::dot_scalar, detail::squared_l2_scalar,
                           detail::axpy_scalar, detail::scale_scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2 = {Backend::avx2, detail::dot_avx2, detail::squared_l2_avx2,
                         detail::axpy_avx2, detail::scale_avx2};
#endif
#if defined(__aarch64__)
constexpr Table kNeon = {Backend::neon, detail::dot_neon, detail::squared_l2_neon,
                         detail::axpy_neon, detail::scale_neon};
#endif

const Table* table_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &kScalar;
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::avx2:
            return &kAvx2;
#endif
#if defined(__aarch64__)
        case Backend::neon:
            return &kNeon;
#endif
        default:
            return nullptr;
    }
}

Backend detect() {
    if (const char* env = std::getenv("SKMT_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
        if (v == "neon" && backend_available(Backend::neon)) return Backend::neon;
        // "auto" or an unavailable request falls through to detection.
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (backend_available(Backend::avx2)) return Backend::avx2;
#endif
#if defined(__aarch64__)
    return Backend::neon;
#endif
    return Backend::scalar;
}

std::atomic<const Table*> g_table{nullptr};

const Table* table() {
    const Table* t = g_table.load(std::memory_order_acquire);
    if (t == nullptr) {
        // detect() is deterministic, so concurrent first calls agree.
        t = table_for(detect());
        g_table.store(t, std::memory_order_release);
    }
    return t;
}

}  // namespace

bool backend_available(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active_backend() { return table()->backend; }

std::string backend_name() {
    switch (active_backend()) {
        case Backend::scalar:
            return "scalar";
        case Backend::avx2:
            return "avx2";
        case Backend::neon:
            return "neon";
    }
    return "unknown";
}

void force_backend(Backend b) {
    if (!backend_available(b)) {
        throw std::runtime_error("simd backend not available on this machine");
    }
    g_table.store(table_for(b), std::memory_order_release);
}

double dot(const double* a, const double* b, std::size_t n) { return table()->dot(a, b, n); }

double squared_l2(const double* a, const double* b, std::size_t n) {
    return table()->squared_l2(a, b, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) { table()->axpy(a, x, y, n); }

void scale(double* x, double a, std::size_t n) { table()->scale(x, a, n); }

void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* out) {
    const Table* t = table();
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = t->dot(m + r * cols, x, cols);
    }
}

}  // namespace skmt::simd
