#include <cmath>
#include <vector>

#include "doctest.h"
#include "skmt/simd/kernels.hpp"
#include "testutil.hpp"

using namespace skmt;

namespace {

std::vector<double> random_vec(testutil::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) {
        x = 2.0 * rng.real() - 1.0;
    }
    return v;
}

const std::vector<std::size_t> kSizes = {1, 2, 3, 4, 7, 8, 15, 16, 63, 64, 65, 127, 128, 1000};

}  // namespace

TEST_CASE("simd backends agree with the scalar reference") {
    std::vector<simd::Backend> backends;
    for (simd::Backend b : {simd::Backend::avx2, simd::Backend::neon}) {
        if (simd::backend_available(b)) {
            backends.push_back(b);
        }
    }
    const simd::Backend original = simd::active_backend();
    testutil::Rng rng(7);

    for (simd::Backend b : backends) {
        for (std::size_t n : kSizes) {
            const auto x = random_vec(rng, n);
            const auto y = random_vec(rng, n);

            simd::force_backend(simd::Backend::scalar);
            const double dot_ref = simd::dot(x.data(), y.data(), n);
            const double l2_ref = simd::squared_l2(x.data(), y.data(), n);
            auto axpy_ref = y;
            simd::axpy(0.37, x.data(), axpy_ref.data(), n);
            auto scale_ref = x;
            simd::scale(scale_ref.data(), -1.25, n);

            simd::force_backend(b);
            const double dot_v = simd::dot(x.data(), y.data(), n);
            const double l2_v = simd::squared_l2(x.data(), y.data(), n);
            auto axpy_v = y;
            simd::axpy(0.37, x.data(), axpy_v.data(), n);
            auto scale_v = x;
            simd::scale(scale_v.data(), -1.25, n);

            CHECK(dot_v == doctest::Approx(dot_ref).epsilon(1e-12));
            CHECK(l2_v == doctest::Approx(l2_ref).epsilon(1e-12));
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(axpy_v[i] == doctest::Approx(axpy_ref[i]).epsilon(1e-14));
                CHECK(scale_v[i] == doctest::Approx(scale_ref[i]).epsilon(1e-14));
            }
        }
    }
    simd::force_backend(original);
}

TEST_CASE("dot and squared_l2 satisfy small closed-form cases") {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const std::vector<double> b = {4.0, -5.0, 6.0};
    CHECK(simd::dot(a.data(), b.data(), 3) == doctest::Approx(1.0 * 4 - 2 * 5 + 3 * 6));
    CHECK(simd::squared_l2(a.data(), b.data(), 3) == doctest::Approx(9.0 + 49.0 + 9.0));
    CHECK(simd::squared_l2(a.data(), a.data(), 3) == 0.0);
    CHECK(simd::dot(a.data(), b.data(), 0) == 0.0);
}

TEST_CASE("matvec matches per-row dot") {
    testutil::Rng rng(11);
    const std::size_t rows = 17;
    const std::size_t cols = 64;
    const auto m = random_vec(rng, rows * cols);
    const auto x = random_vec(rng, cols);
    std::vector<double> out(rows);
    simd::matvec(m.data(), rows, cols, x.data(), out.data());
    for (std::size_t r = 0; r < rows; ++r) {
        CHECK(out[r] == doctest::Approx(simd::dot(m.data() + r * cols, x.data(), cols)));
    }
}

TEST_CASE("forcing an unavailable backend throws") {
    bool any_missing = false;
    for (simd::Backend b : {simd::Backend::avx2, simd::Backend::neon}) {
        if (!simd::backend_available(b)) {
            any_missing = true;
            CHECK_THROWS(simd::force_backend(b));
        }
    }
    if (!any_missing) {
        CHECK(true);  // both vector backends available on this machine
    }
}
