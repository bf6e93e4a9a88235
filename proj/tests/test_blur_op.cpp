#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "varblur/blur_op.hpp"
#include "varblur/rng.hpp"

using namespace varblur;

namespace {

// Independent oracle: per-pixel windowed dot product with the synthesized
// kernel, replicate boundary, then plain subsampling.
Image brute_force_apply(const BlurOperator& op, const Image& u) {
    const int h = u.height, w = u.width, k = op.basis.k, c = k / 2;
    Image full(h, w, u.channels);
    for (int ch = 0; ch < u.channels; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const Kernel kr = pixel_kernel(op.basis, op.field, y, x);
                double acc = 0.0;
                for (int r = 0; r < k; ++r)
                    for (int q = 0; q < k; ++q) {
                        const int sy = std::clamp(y + r - c, 0, h - 1);
                        const int sx = std::clamp(x + q - c, 0, w - 1);
                        acc += kr.at(r, q) * u.at(sy, sx, ch);
                    }
                full.at(y, x, ch) = acc;
            }
    if (op.downsample == 1) return full;
    Image out(h / op.downsample, w / op.downsample, u.channels);
    for (int ch = 0; ch < u.channels; ++ch)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x)
                out.at(y, x, ch) = full.at(y * op.downsample, x * op.downsample, ch);
    return out;
}

double dot(const Image& a, const Image& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

}  // namespace

TEST_SUITE_BEGIN("blur_op");

TEST_CASE("delta basis is the identity operator") {
    KernelBasis basis({Kernel::delta(5)});
    auto field = MixingField::uniform(1, 9, 7);
    BlurOperator op(basis, field);
    const Image u = testutil::random_image(9, 7, 3, 17);
    const Image v = apply(op, u);
    for (std::size_t i = 0; i < u.data.size(); ++i) CHECK(v.data[i] == doctest::Approx(u.data[i]).epsilon(1e-15));
}

TEST_CASE("constant images pass through any unit-mass operator") {
    auto basis = testutil::random_basis(3, 5, 3);
    auto field = testutil::random_field(3, 8, 8, 4);
    BlurOperator op(basis, field);
    const Image u(8, 8, 1, 0.37);
    const Image v = apply(op, u);
    for (double s : v.data) CHECK(s == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("apply matches the brute-force windowed dot product") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto basis = testutil::random_basis(3, 5, seed);
        auto field = testutil::random_field(3, 16, 16, seed + 9);
        BlurOperator op(basis, field);
        const Image u = testutil::random_image(16, 16, 1, seed + 40);
        const Image fast = apply(op, u);
        const Image slow = brute_force_apply(op, u);
        for (std::size_t i = 0; i < fast.data.size(); ++i)
            CHECK(std::abs(fast.data[i] - slow.data[i]) < 1e-6);
    }
}

TEST_CASE("apply rejects mismatched dimensions") {
    auto basis = testutil::random_basis(2, 3, 1);
    auto field = testutil::random_field(2, 8, 8, 2);
    BlurOperator op(basis, field);
    CHECK_THROWS_AS(apply(op, Image(7, 8, 1, 0.0)), ValidationError);
    CHECK_THROWS_AS(adjoint(op, Image(8, 9, 1, 0.0)), ValidationError);
}

TEST_CASE("operator construction validates downsampling divisibility") {
    auto basis = testutil::random_basis(1, 3, 5);
    auto field = testutil::random_field(1, 9, 9, 6);
    CHECK_THROWS_AS(BlurOperator(basis, field, 2), ValidationError);
    CHECK_NOTHROW(BlurOperator(basis, testutil::random_field(1, 8, 8, 6), 2));
}

TEST_CASE("adjoint of the delta operator is the identity") {
    KernelBasis basis({Kernel::delta(3)});
    BlurOperator op(basis, MixingField::uniform(1, 6, 6));
    const Image y = testutil::random_image(6, 6, 1, 8);
    const Image x = adjoint(op, y);
    for (std::size_t i = 0; i < y.data.size(); ++i)
        CHECK(x.data[i] == doctest::Approx(y.data[i]).epsilon(1e-15));
}

TEST_CASE("dot-product adjoint test on random operators") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        auto basis = testutil::random_basis(2, 5, seed + 1);
        auto field = testutil::random_field(2, 12, 12, seed + 31);
        BlurOperator op(basis, field);
        const Image x = testutil::random_image(12, 12, 1, seed + 61);
        const Image y = testutil::random_image(12, 12, 1, seed + 91);
        const double lhs = dot(apply(op, x), y);
        const double rhs = dot(x, adjoint(op, y));
        CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(std::abs(lhs), std::abs(rhs)));
    }
}

TEST_CASE("adjoint of subsampling is zero-insertion upsampling") {
    KernelBasis basis({Kernel::delta(3)});
    BlurOperator op(basis, MixingField::uniform(1, 8, 8), 2);
    const Image y = testutil::random_image(4, 4, 1, 77);
    const Image up = adjoint(op, y);
    for (int yy = 0; yy < 8; ++yy)
        for (int x = 0; x < 8; ++x) {
            if (yy % 2 == 0 && x % 2 == 0)
                CHECK(up.at(yy, x) == doctest::Approx(y.at(yy / 2, x / 2)).epsilon(1e-15));
            else
                CHECK(up.at(yy, x) == 0.0);
        }
}

TEST_CASE("adjoint test holds with downsampling") {
    for (int alpha : {1, 2, 4}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto basis = testutil::random_basis(2, 5, seed + 3);
            auto field = testutil::random_field(2, 16, 16, seed + 13);
            BlurOperator op(basis, field, alpha);
            const Image x = testutil::random_image(16, 16, 1, seed + 23);
            const Image y = testutil::random_image(16 / alpha, 16 / alpha, 1, seed + 33);
            const double lhs = dot(apply(op, x), y);
            const double rhs = dot(x, adjoint(op, y));
            CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(std::abs(lhs), std::abs(rhs)));
        }
    }
}

TEST_CASE("apply is linear") {
    auto basis = testutil::random_basis(2, 3, 41);
    auto field = testutil::random_field(2, 10, 10, 42);
    BlurOperator op(basis, field);
    const Image x = testutil::random_image(10, 10, 1, 43);
    const Image y = testutil::random_image(10, 10, 1, 44);
    const double a = 0.7, b = -1.3;
    Image combo(10, 10, 1);
    for (std::size_t i = 0; i < combo.data.size(); ++i) combo.data[i] = a * x.data[i] + b * y.data[i];
    const Image lhs = apply(op, combo);
    const Image hx = apply(op, x), hy = apply(op, y);
    for (std::size_t i = 0; i < lhs.data.size(); ++i)
        CHECK(std::abs(lhs.data[i] - (a * hx.data[i] + b * hy.data[i])) < 1e-8);
}

TEST_CASE("saturation response reference values") {
    SaturationParams p;  // a = 50
    CHECK(std::abs(saturation_response(0.0, p)) < 1e-20);
    CHECK(saturation_response(1.0, p) == doctest::Approx(1.0 - std::log(2.0) / 50.0).epsilon(1e-12));
    CHECK(saturation_response(1.0, p) == doctest::Approx(0.986137).epsilon(1e-5));
    CHECK(saturation_response(2.0, p) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::isfinite(saturation_response(1e6, p)));  // overflow-safe branch
}

TEST_CASE("saturation response is increasing, below identity, bounded") {
    SaturationParams p;
    // Everywhere: monotone, R(z) <= z, bounded above.
    double prev = -1e300;
    for (double z = -3.0; z <= 3.0; z += 0.01) {
        const double r = saturation_response(z, p);
        CHECK(r >= prev);
        CHECK(r <= z);
        CHECK(r <= 1.0 + std::log(2.0) / p.a);
        prev = r;
    }
    // Strict versions hold where the gap is representable in doubles
    // (z - R(z) underflows far below the knee, R flattens far above it).
    prev = -1e300;
    for (double z = 0.4; z <= 1.4; z += 0.01) {
        const double r = saturation_response(z, p);
        CHECK(r > prev);
        CHECK(r < z);
        prev = r;
    }
}

TEST_CASE("saturation derivative matches finite differences and asymptotes") {
    SaturationParams p;
    CHECK(saturation_response_deriv(1.0, p) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(saturation_response_deriv(-10.0, p) == doctest::Approx(1.0).epsilon(1e-12));
    for (double z : {0.2, 0.9, 1.1}) {
        const double h = 1e-5;
        const double fd = (saturation_response(z + h, p) - saturation_response(z - h, p)) / (2.0 * h);
        CHECK(std::abs(saturation_response_deriv(z, p) - fd) < 1e-6);
    }
    for (double z : {-5.0, 0.5, 1.0, 1.5, 9.0})
        CHECK(saturation_response_deriv(z, p) > 0.0);
}

TEST_CASE("degrade with a delta basis and no noise is near-identity below saturation") {
    KernelBasis basis({Kernel::delta(3)});
    BlurOperator op(basis, MixingField::uniform(1, 8, 8));
    SaturationParams p;
    Image u = testutil::random_image(8, 8, 1, 5, 0.0, 0.85);
    const Image v = degrade(op, u, p, 0.0, 1);
    for (std::size_t i = 0; i < u.data.size(); ++i)
        CHECK(std::abs(v.data[i] - u.data[i]) < 1e-5);
}

TEST_CASE("degrade of an all-ones image hits the saturated response value") {
    KernelBasis basis({Kernel::delta(3)});
    BlurOperator op(basis, MixingField::uniform(1, 4, 4));
    SaturationParams p;
    const Image u(4, 4, 1, 1.0);
    const Image v = degrade(op, u, p, 0.0, 1);
    const double expect = std::pow(1.0 - std::log(2.0) / 50.0, 1.0 / 2.2);
    for (double s : v.data) CHECK(s == doctest::Approx(expect).epsilon(1e-9));
    CHECK(expect == doctest::Approx(0.99365).epsilon(1e-4));
}

TEST_CASE("degrade is deterministic per seed and sensitive to it") {
    auto basis = testutil::random_basis(2, 5, 7);
    auto field = testutil::random_field(2, 8, 8, 8);
    BlurOperator op(basis, field);
    const Image u = testutil::random_image(8, 8, 3, 9);
    SaturationParams p;
    const Image a = degrade(op, u, p, 0.01, 42);
    const Image b = degrade(op, u, p, 0.01, 42);
    const Image c = degrade(op, u, p, 0.01, 43);
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
}

TEST_CASE("degrade rejects negative sigma") {
    KernelBasis basis({Kernel::delta(3)});
    BlurOperator op(basis, MixingField::uniform(1, 4, 4));
    CHECK_THROWS_AS(degrade(op, Image(4, 4, 1, 0.5), SaturationParams{}, -0.1, 0), ValidationError);
}

TEST_CASE("degrade with delta basis and sigma 0 is idempotent") {
    KernelBasis basis({Kernel::delta(3)});
    BlurOperator op(basis, MixingField::uniform(1, 8, 8));
    SaturationParams p;
    Image u = testutil::random_image(8, 8, 1, 15, 0.0, 0.9);
    const Image once = degrade(op, u, p, 0.0, 0);
    const Image twice = degrade(op, once, p, 0.0, 0);
    for (std::size_t i = 0; i < u.data.size(); ++i)
        CHECK(std::abs(once.data[i] - twice.data[i]) < 1e-4);
}

TEST_SUITE_END();
