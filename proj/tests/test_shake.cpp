#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "varblur/shake.hpp"

using namespace varblur;

namespace {

struct Bbox {
    int min_x = 1 << 30, min_y = 1 << 30, max_x = -1, max_y = -1;
};

Bbox support_bbox(const Kernel& k) {
    Bbox b;
    for (int r = 0; r < k.k; ++r)
        for (int q = 0; q < k.k; ++q)
            if (k.at(r, q) > 0.0) {
                b.min_x = std::min(b.min_x, q);
                b.max_x = std::max(b.max_x, q);
                b.min_y = std::min(b.min_y, r);
                b.max_y = std::max(b.max_y, r);
            }
    return b;
}

}  // namespace

TEST_SUITE_BEGIN("shake_gen");

TEST_CASE("zero amplitude yields the centered delta") {
    ShakeParams p;
    p.k = 9;
    p.amplitude_scale = 0.0;
    p.seed = 3;
    const Kernel k = generate_shake_kernel(p);
    CHECK(k.at(4, 4) == doctest::Approx(1.0));
    double sum = 0.0;
    for (double t : k.taps) sum += t;
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("generated kernels satisfy the basis element invariants") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        ShakeParams p;
        p.k = 13;
        p.seed = seed;
        const Kernel k = generate_shake_kernel(p);
        CHECK(validate(k).ok);
        double sum = 0.0;
        for (double t : k.taps) {
            CHECK(t >= 0.0);
            sum += t;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("fixed seed reproduces the identical kernel") {
    ShakeParams p;
    p.k = 17;
    p.seed = 42;
    const Kernel a = generate_shake_kernel(p);
    const Kernel b = generate_shake_kernel(p);
    CHECK(a.taps == b.taps);
    p.seed = 43;
    const Kernel c = generate_shake_kernel(p);
    CHECK(a.taps != c.taps);
}

TEST_CASE("support bounding box stays strictly inside K for 1000 draws") {
    int nontrivial = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        ShakeParams p;
        p.k = 11;
        p.seed = seed;
        const Kernel k = generate_shake_kernel(p);
        const Bbox b = support_bbox(k);
        CHECK(b.max_x - b.min_x + 1 < p.k);
        CHECK(b.max_y - b.min_y + 1 < p.k);
        if (b.max_x > b.min_x || b.max_y > b.min_y) ++nontrivial;
    }
    CHECK(nontrivial > 900);  // the bank is not degenerate deltas
}

TEST_CASE("rasterization conserves mass for arbitrary subpixel positions") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ShakeParams p;
        p.k = 15;
        p.seed = seed;
        p.amplitude_scale = 2.5;
        const Kernel k = generate_shake_kernel(p);
        double sum = 0.0;
        for (double t : k.taps) sum += t;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("invalid parameters are rejected") {
    ShakeParams p;
    p.k = 8;
    CHECK_THROWS_AS(generate_shake_kernel(p), ValidationError);
    p.k = 9;
    p.exposure_steps = 1;
    CHECK_THROWS_AS(generate_shake_kernel(p), ValidationError);
    p.exposure_steps = 100;
    p.damping = 1.5;
    CHECK_THROWS_AS(generate_shake_kernel(p), ValidationError);
}

TEST_CASE("line kernel: length one is a delta") {
    const Kernel k = line_kernel(1, 0.7, 7);
    CHECK(k.at(3, 3) == doctest::Approx(1.0));
}

TEST_CASE("line kernel: three horizontal taps of one third") {
    const Kernel k = line_kernel(3, 0.0, 7);
    CHECK(k.at(3, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(k.at(3, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(k.at(3, 4) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    double sum = 0.0;
    for (double t : k.taps) sum += t;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("line kernel is symmetric under angle + pi") {
    for (double angle : {0.3, 1.1, 2.0}) {
        const Kernel a = line_kernel(5, angle, 9);
        const Kernel b = line_kernel(5, angle + 3.141592653589793, 9);
        for (std::size_t i = 0; i < a.taps.size(); ++i)
            CHECK(a.taps[i] == doctest::Approx(b.taps[i]).epsilon(1e-9));
    }
}

TEST_CASE("line kernel rejects lengths beyond the support") {
    CHECK_THROWS_AS(line_kernel(8, 0.0, 7), ValidationError);
    CHECK_THROWS_AS(line_kernel(0, 0.0, 7), ValidationError);
}

TEST_CASE("gaussian kernel normalizes and peaks at the center") {
    const Kernel k = gaussian_kernel(1.2);
    CHECK(k.k == 9);
    double sum = 0.0, mx = 0.0;
    for (double t : k.taps) {
        sum += t;
        mx = std::max(mx, t);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(k.at(k.k / 2, k.k / 2) == doctest::Approx(mx));
    CHECK(gaussian_kernel(0.0, 5).at(2, 2) == doctest::Approx(1.0));
}

TEST_SUITE_END();
