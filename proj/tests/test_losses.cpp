#include <doctest.h>

#include <cmath>
#include <numeric>

#include "test_util.hpp"
#include "varblur/losses.hpp"
#include "varblur/rng.hpp"

using namespace varblur;

namespace {

// Brute-force oracle: synthesize each pixel kernel via pixel_kernel and
// accumulate the weighted squared distance.
double kernel_loss_oracle(const KernelBasis& basis, const MixingField& field,
                          const KernelField& gt, const SegmentWeights& w) {
    double loss = 0.0;
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x) {
            const Kernel k = pixel_kernel(basis, field, y, x);
            const auto g = gt.at(y, x);
            double ss = 0.0;
            for (int t = 0; t < basis.k * basis.k; ++t) {
                const double d = k.taps[t] - g[t];
                ss += d * d;
            }
            loss += w.at(y, x) * ss;
        }
    return loss;
}

KernelField field_from(const KernelBasis& basis, const MixingField& field) {
    KernelField out(field.height, field.width, basis.k);
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x) {
            const Kernel k = pixel_kernel(basis, field, y, x);
            auto dst = out.at(y, x);
            std::copy(k.taps.begin(), k.taps.end(), dst.begin());
        }
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("losses");

TEST_CASE("segment weights follow the inverse-size rule") {
    SegmentMap map(2, 3, {0, 0, 1, 0, 1, 1});
    const auto w = SegmentWeights::from_segments(map);
    CHECK(w.at(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(w.at(0, 2) == doctest::Approx(1.0 / 3.0));
    for (double v : w.w) CHECK(v > 0.0);
}

TEST_CASE("reblur loss vanishes on identical images") {
    const Image v = testutil::random_image(4, 4, 3, 1);
    const auto w = SegmentWeights::constant(4, 4, 1.0 / 16.0);
    CHECK(reblur_loss(v, v, w, 2.2) == 0.0);
}

TEST_CASE("reblur loss hand-checked scalar case") {
    // two pixels, values (0,1) vs (0,0), gamma 1, weights 1/2
    Image a(1, 2, 1, std::vector<double>{0.0, 1.0});
    Image b(1, 2, 1, std::vector<double>{0.0, 0.0});
    const auto w = SegmentWeights::constant(1, 2, 0.5);
    CHECK(reblur_loss(a, b, w, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("doubling a segment halves its pixels' weights") {
    SegmentMap small(2, 2, {0, 0, 1, 1});
    SegmentMap big(2, 4, {0, 0, 1, 1, 0, 0, 1, 1});
    const auto ws = SegmentWeights::from_segments(small);
    const auto wb = SegmentWeights::from_segments(big);
    CHECK(wb.at(0, 0) == doctest::Approx(ws.at(0, 0) / 2.0));
}

TEST_CASE("reblur loss rejects shape mismatches") {
    const Image a = testutil::random_image(4, 4, 1, 2);
    const Image b = testutil::random_image(4, 5, 1, 3);
    const auto w = SegmentWeights::constant(4, 4, 1.0);
    CHECK_THROWS_AS(reblur_loss(a, b, w, 1.0), ValidationError);
}

TEST_CASE("kernel loss vanishes when predictions equal ground truth") {
    auto basis = testutil::random_basis(3, 5, 4);
    auto field = testutil::random_field(3, 6, 6, 5);
    const auto gt = field_from(basis, field);
    const auto w = SegmentWeights::constant(6, 6, 1.0 / 36.0);
    CHECK(kernel_loss(basis, field, gt, w) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("kernel loss of delta vs shifted delta is 2") {
    KernelBasis basis({Kernel::delta(3)});
    auto field = MixingField::uniform(1, 1, 1);
    KernelField gt(1, 1, 3);
    gt.at(0, 0)[1 * 3 + 2] = 1.0;  // shifted delta
    const auto w = SegmentWeights::constant(1, 1, 1.0);
    CHECK(kernel_loss(basis, field, gt, w) == doctest::Approx(2.0));
}

TEST_CASE("kernel loss matches the brute-force oracle on 8x8 instances") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto basis = testutil::random_basis(3, 5, seed + 10);
        auto field = testutil::random_field(3, 8, 8, seed + 20);
        auto gt_basis = testutil::random_basis(3, 5, seed + 30);
        auto gt_field = testutil::random_field(3, 8, 8, seed + 40);
        const auto gt = field_from(gt_basis, gt_field);
        SegmentMap segs(8, 8, [&] {
            std::vector<int> l(64, 0);
            for (int i = 32; i < 64; ++i) l[i] = 1;
            return l;
        }());
        const auto w = SegmentWeights::from_segments(segs);
        const double fast = kernel_loss(basis, field, gt, w);
        const double slow = kernel_loss_oracle(basis, field, gt, w);
        CHECK(std::abs(fast - slow) < 1e-10);
    }
}

TEST_CASE("losses are invariant under basis permutation with matched planes") {
    auto basis = testutil::random_basis(3, 5, 50);
    auto field = testutil::random_field(3, 6, 6, 51);
    // permute basis elements (2,0,1) together with their coefficient planes
    const int k2 = basis.k * basis.k;
    const std::size_t plane = 36;
    std::vector<double> ptaps(basis.taps.size());
    std::vector<double> pcoeffs(field.coeffs.size());
    const int perm[3] = {2, 0, 1};
    for (int b = 0; b < 3; ++b) {
        std::copy_n(basis.taps.begin() + perm[b] * k2, k2, ptaps.begin() + b * k2);
        std::copy_n(field.coeffs.begin() + perm[b] * plane, plane, pcoeffs.begin() + b * plane);
    }
    KernelBasis basis_p(3, 5, std::move(ptaps));
    MixingField field_p(3, 6, 6, std::move(pcoeffs));

    const auto gt = field_from(testutil::random_basis(3, 5, 52), testutil::random_field(3, 6, 6, 53));
    const auto w = SegmentWeights::constant(6, 6, 0.5);
    CHECK(kernel_loss(basis, field, gt, w) ==
          doctest::Approx(kernel_loss(basis_p, field_p, gt, w)).epsilon(1e-12));
    CHECK(kernel_l2_reg(basis, field) == doctest::Approx(kernel_l2_reg(basis_p, field_p)).epsilon(1e-12));
}

TEST_CASE("restoration loss basics") {
    const Image a = testutil::random_image(3, 3, 1, 7);
    CHECK(restoration_loss(a, a) == 0.0);
    Image b = a;
    b.at(1, 1) += 0.5;
    CHECK(restoration_loss(a, b) == doctest::Approx(0.25));
    CHECK(restoration_loss(a, b) == doctest::Approx(restoration_loss(b, a)));
    CHECK_THROWS_AS(restoration_loss(a, Image(3, 4, 1, 0.0)), ValidationError);
}

TEST_CASE("regularizers: delta kernels give l2 = 1, constant field gives tv = 0") {
    KernelBasis basis({Kernel::delta(5), Kernel::delta(5)});
    auto field = MixingField::uniform(2, 5, 5);
    CHECK(kernel_l2_reg(basis, field) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mask_tv_reg(field) == doctest::Approx(0.0));
}

TEST_CASE("mask tv matches the pair-counting oracle on a checkerboard") {
    const int n = 4;
    std::vector<double> plane(n * n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) plane[y * n + x] = (x + y) % 2 == 0 ? 1.0 : 0.0;

    // counting oracle: every adjacent pair differs by exactly 1
    const double pairs = static_cast<double>(n * (n - 1) + (n - 1) * n);
    CHECK(plane_tv(plane, n, n) == doctest::Approx(pairs));

    // two complementary checkerboard planes form a valid field; each plane
    // contributes pairs/(n*n), i.e. 2 per interior pixel-pair count
    std::vector<double> coeffs(2 * n * n);
    for (int i = 0; i < n * n; ++i) {
        coeffs[i] = plane[i];
        coeffs[n * n + i] = 1.0 - plane[i];
    }
    MixingField field(2, n, n, std::move(coeffs));
    CHECK(mask_tv_reg(field) == doctest::Approx(pairs / (n * n)));
    CHECK(mask_tv_reg(field) == doctest::Approx(2.0 * (n - 1) / n));
}

TEST_CASE("losses are non-negative on random inputs") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const Image a = testutil::random_image(5, 5, 1, rng.next_u64());
        const Image b = testutil::random_image(5, 5, 1, rng.next_u64());
        const auto w = SegmentWeights::constant(5, 5, 0.04);
        CHECK(reblur_loss(a, b, w, 2.2) >= 0.0);
        CHECK(restoration_loss(a, b) >= 0.0);
    }
}

TEST_SUITE_END();
