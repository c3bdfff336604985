#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fbmp/ops.hpp"
#include "test_util.hpp"

using namespace fbmp;
namespace tu = fbmp::testutil;

TEST_CASE("circular convolution: centered Dirac is the identity") {
    auto rng = tu::make_rng(1);
    Plane img = tu::random_plane(rng, 8, 8);
    Plane out = circular_convolve(img, Kernel2D::dirac(3));
    for (std::size_t i = 0; i < img.size(); ++i)
        CHECK(out.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-13));
}

TEST_CASE("circular convolution: unit-sum kernel preserves constants and the mean") {
    auto rng = tu::make_rng(2);
    Kernel2D k = tu::random_simplex_kernel(rng, 5);

    Plane constant(8, 8, 5.0);
    Plane out = circular_convolve(constant, k);
    for (double v : out.samples()) CHECK(v == doctest::Approx(5.0).epsilon(1e-12));

    Plane img = tu::random_plane(rng, 12, 12);
    CHECK(circular_convolve(img, k).mean() == doctest::Approx(img.mean()).epsilon(1e-12));
}

TEST_CASE("circular convolution: shifted Dirac moves with wrap semantics") {
    Plane img(4, 4);
    img(0, 0) = 1.0;
    Kernel2D k(3);
    k(1, 2) = 1.0;  // one tap right of center
    Plane out = circular_convolve(img, k);
    Plane expect = tu::naive_circular_convolve(img, k);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            CHECK(out(r, c) == doctest::Approx(expect(r, c)).epsilon(1e-12));
            CHECK(out(r, c) == doctest::Approx(r == 0 && c == 1 ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
        }
}

TEST_CASE("circular convolution matches the spatial-domain oracle") {
    auto rng = tu::make_rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        Plane img = tu::random_plane(rng, 16, 16, -1.0, 2.0);
        Kernel2D k = tu::random_simplex_kernel(rng, trial % 2 ? 5 : 3);
        Plane fast = circular_convolve(img, k);
        Plane slow = tu::naive_circular_convolve(img, k);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < fast.size(); ++i) {
            num += (fast.data()[i] - slow.data()[i]) * (fast.data()[i] - slow.data()[i]);
            den += slow.data()[i] * slow.data()[i];
        }
        CHECK(std::sqrt(num / den) < 1e-9);
    }
}

TEST_CASE("circular convolution rejects kernels larger than the image") {
    Plane img(4, 4, 1.0);
    CHECK_THROWS_AS(circular_convolve(img, Kernel2D::dirac(5)), DimensionError);
}

TEST_CASE("convolution adjoint pairing") {
    auto rng = tu::make_rng(4);
    Kernel2D k = tu::random_simplex_kernel(rng, 5);
    Plane x = tu::random_plane(rng, 10, 10, -1.0, 1.0);
    Plane y = tu::random_plane(rng, 10, 10, -1.0, 1.0);
    const double lhs = dot(circular_convolve(x, k), y);
    const double rhs = dot(x, circular_convolve_adjoint(y, k));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("downsample keeps the top-left phase") {
    std::vector<double> vals(16);
    for (int i = 0; i < 16; ++i) vals[i] = i;
    Plane img(4, 4, vals);
    Plane out = downsample(img, 2);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == 2.0);
    CHECK(out(1, 0) == 8.0);
    CHECK(out(1, 1) == 10.0);

    CHECK_THROWS_AS(downsample(Plane(5, 4, 1.0), 2), DimensionError);

    auto rng = tu::make_rng(5);
    Plane any = tu::random_plane(rng, 6, 6);
    Plane same = downsample(any, 1);
    for (std::size_t i = 0; i < any.size(); ++i) CHECK(any.data()[i] == same.data()[i]);
}

TEST_CASE("upsample_adjoint inserts zeros and is the transpose of downsample") {
    Plane one(1, 1, std::vector<double>{3.0});
    Plane up = upsample_adjoint(one, 2);
    CHECK(up(0, 0) == 3.0);
    CHECK(up(0, 1) == 0.0);
    CHECK(up(1, 0) == 0.0);
    CHECK(up(1, 1) == 0.0);

    auto rng = tu::make_rng(6);
    Plane x = tu::random_plane(rng, 8, 8, -1.0, 1.0);
    Plane y = tu::random_plane(rng, 4, 4, -1.0, 1.0);
    CHECK(dot(downsample(x, 2), y) == doctest::Approx(dot(x, upsample_adjoint(y, 2))).epsilon(1e-12));

    // left inverse
    Plane lr = tu::random_plane(rng, 4, 4);
    Plane back = downsample(upsample_adjoint(lr, 2), 2);
    for (std::size_t i = 0; i < lr.size(); ++i) CHECK(lr.data()[i] == back.data()[i]);
}

TEST_CASE("difference operators annihilate constants") {
    Plane constant(6, 7, 3.25);
    for (DiffOp op : {DiffOp::grad_h, DiffOp::grad_v, DiffOp::laplacian}) {
        Plane out = diff_operator(constant, op);
        for (double v : out.samples()) CHECK(v == 0.0);
    }
}

TEST_CASE("laplacian stencil on a centered Dirac") {
    Plane img(5, 5);
    img(2, 2) = 1.0;
    Plane out = diff_operator(img, DiffOp::laplacian);
    CHECK(out(2, 2) == 4.0);
    CHECK(out(1, 2) == -1.0);
    CHECK(out(3, 2) == -1.0);
    CHECK(out(2, 1) == -1.0);
    CHECK(out(2, 3) == -1.0);
    CHECK(out(0, 0) == 0.0);
}

TEST_CASE("difference operators pass random adjoint tests") {
    auto rng = tu::make_rng(7);
    for (DiffOp op : {DiffOp::grad_h, DiffOp::grad_v, DiffOp::laplacian}) {
        Plane x = tu::random_plane(rng, 9, 11, -1.0, 1.0);
        Plane y = tu::random_plane(rng, 9, 11, -1.0, 1.0);
        const double lhs = dot(diff_operator(x, op), y);
        const double rhs = dot(x, diff_adjoint(y, op));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("box_mean: constants, identity radius, and the naive oracle") {
    Plane constant(5, 5, 2.5);
    Plane out = box_mean(constant, 2);
    for (double v : out.samples()) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));

    auto rng = tu::make_rng(8);
    Plane img = tu::random_plane(rng, 7, 7);
    Plane same = box_mean(img, 0);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(img.data()[i] == same.data()[i]);

    Plane fast = box_mean(img, 1);
    Plane slow = tu::naive_box_mean(img, 1);
    for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(fast.data()[i] == doctest::Approx(slow.data()[i]).epsilon(1e-12));

    CHECK_THROWS_AS(box_mean(Plane(3, 3, 1.0), 2), DimensionError);
}

TEST_CASE("circular box blur matches kernel convolution for odd windows") {
    auto rng = tu::make_rng(9);
    Plane img = tu::random_plane(rng, 8, 8);
    const int window = 5;
    Kernel2D box(window);
    for (int r = 0; r < window; ++r)
        for (int c = 0; c < window; ++c) box(r, c) = 1.0 / (window * window);
    Plane a = circular_box_blur(img, window);
    Plane b = circular_convolve(img, box);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-11));
}

TEST_CASE("plane invariants: finite data and shape checks") {
    CHECK_THROWS_AS(Plane(2, 2, std::vector<double>{1.0}), DimensionError);
    CHECK_THROWS_AS(MultiBandImage(std::vector<Plane>{}), DimensionError);
    CHECK_THROWS_AS(MultiBandImage({Plane(2, 2), Plane(3, 3)}), DimensionError);
    CHECK_THROWS_AS(Kernel2D(4), ParamError);
    CHECK(Kernel2D::dirac(5).in_simplex());
}
