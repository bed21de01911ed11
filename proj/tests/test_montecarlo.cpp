#include <doctest.h>

#include <cmath>

#include "wqf/errors.hpp"
#include "wqf/montecarlo.hpp"
#include "wqf/oracles.hpp"

#include "support/test_util.hpp"

using namespace wqf;

TEST_CASE("path sampling is reproducible and chunk-independent") {
    const TimeGrid g(1.0, 32);
    const WienerPath a = sample_path(42, 7, g, 2);
    const WienerPath b = sample_path(42, 7, g, 2);
    CHECK(a.flat() == b.flat()); // bit-exact
    const WienerPath c = sample_path(42, 8, g, 2);
    CHECK(a.flat() != c.flat());
    const WienerPath d = sample_path(43, 7, g, 2);
    CHECK(a.flat() != d.flat());
    for (std::size_t k = 0; k < 2; ++k)
        CHECK(a.value(0, k) == 0.0);
}

TEST_CASE("brownian moments") {
    const TimeGrid g(1.0, 16);
    const McConfig mc{20000, 11, 1};
    const Estimate mean_wt = estimate([](const WienerPath& w) { return w.value(16, 0); }, g, 1, mc);
    CHECK(std::abs(mean_wt.mean) <= 3.0 * mean_wt.std_error);

    const Estimate sq = estimate(
        [](const WienerPath& w) {
            double s = 0.0;
            for (std::size_t c = 0; c < 2; ++c)
                s += w.value(16, c) * w.value(16, c);
            return s;
        },
        g, 2, mc);
    CHECK(std::abs(sq.mean - 2.0) <= 3.0 * sq.std_error);
}

TEST_CASE("ito integral of sigma theta is centered") {
    const TimeGrid g(1.0, 64);
    const MatrixFunction sigma = MatrixFunction::constant(g, Mat{{0.5}});
    CHECK(ito_p_sigma(MatrixFunction::zero(g, 1), sample_path(1, 0, g, 1)) == 0.0);

    const Estimate est = estimate([&sigma](const WienerPath& w) { return ito_p_sigma(sigma, w); }, g, 1,
                                  McConfig{30000, 5, 1});
    CHECK(std::abs(est.mean) <= 3.0 * est.std_error);
}

TEST_CASE("exponential moment of p_sigma approaches the scalar closed form") {
    const TimeGrid g(1.0, 128);
    const MatrixFunction sigma = MatrixFunction::constant(g, Mat{{0.5}});
    const Estimate est = estimate([&sigma](const WienerPath& w) { return std::exp(ito_p_sigma(sigma, w)); },
                                  g, 1, McConfig{50000, 17, 1});
    // 3 sigma plus an O(dt) discretization allowance.
    CHECK(std::abs(est.mean - ou_square(0.5, 1.0)) <= 3.0 * est.std_error + 2.0 / 128.0);
}

TEST_CASE("exponential moment of the planar area matches the secant") {
    const TimeGrid g(1.0, 128);
    const Mat j{{0.0, -1.0}, {1.0, 0.0}};
    const MatrixFunction sigma = MatrixFunction::constant(g, 0.4 * j);
    const Estimate est = estimate([&sigma](const WienerPath& w) { return std::exp(ito_p_sigma(sigma, w)); },
                                  g, 2, McConfig{30000, 29, 1});
    CHECK(std::abs(est.mean - levy_area(0.8, 1.0)) <= 3.0 * est.std_error + 2.0 / 128.0);
}

TEST_CASE("quad_q basics") {
    const TimeGrid g(1.0, 64);
    const MatrixFunction zero = MatrixFunction::zero(g, 1);
    CHECK(quad_q(zero, zero, sample_path(3, 1, g, 1)) == 0.0);

    const MatrixFunction kappa = MatrixFunction::constant(g, Mat{{-1.0}});
    for (std::uint64_t p = 0; p < 20; ++p)
        CHECK(quad_q(zero, kappa, sample_path(5, p, g, 1)) <= 0.0);
}

TEST_CASE("harmonic oscillator weight matches Cameron-Martin") {
    const TimeGrid g(1.0, 128);
    const MatrixFunction zero = MatrixFunction::zero(g, 1);
    const MatrixFunction kappa = MatrixFunction::constant(g, Mat{{-1.0}});
    const Estimate est = estimate(
        [&](const WienerPath& w) { return std::exp(quad_q(zero, kappa, w)); }, g, 1, McConfig{50000, 23, 1});
    CHECK(std::abs(est.mean - cameron_martin(1.0, 1.0)) <= 3.0 * est.std_error + 2.0 / 128.0);
}

TEST_CASE("estimate of a constant has zero spread") {
    const Estimate one = estimate([](const WienerPath&) { return 1.0; }, TimeGrid(1.0, 16), 1,
                                  McConfig{1000, 7, 1});
    CHECK(one.mean == 1.0);
    CHECK(one.std_error == 0.0);
    CHECK_THROWS_AS(estimate([](const WienerPath&) { return 1.0; }, TimeGrid(1.0, 16), 1, McConfig{1, 7, 1}),
                    Error);
}

TEST_CASE("estimates are byte-identical for any worker count") {
    const TimeGrid g(1.0, 32);
    const MatrixFunction sigma = MatrixFunction::constant(g, Mat{{0.4}});
    auto fn = [&sigma](const WienerPath& w) { return std::exp(ito_p_sigma(sigma, w)); };
    const Estimate e1 = estimate(fn, g, 1, McConfig{10000, 99, 1});
    const Estimate e3 = estimate(fn, g, 1, McConfig{10000, 99, 3});
    const Estimate e8 = estimate(fn, g, 1, McConfig{10000, 99, 8});
    CHECK(e1.mean == e3.mean);
    CHECK(e1.std_error == e3.std_error);
    CHECK(e1.mean == e8.mean);
    CHECK(e1.std_error == e8.std_error);

    const Estimate other_seed = estimate(fn, g, 1, McConfig{10000, 100, 1});
    CHECK(e1.mean != other_seed.mean);
}

TEST_CASE("estimate_multi evaluates all components on one stream") {
    const TimeGrid g(1.0, 16);
    auto fn = [](const WienerPath& w, double* out) {
        out[0] = w.value(16, 0);
        out[1] = 2.0 * w.value(16, 0);
        out[2] = out[1] - out[0];
    };
    const auto est = estimate_multi(fn, 3, g, 1, McConfig{5000, 31, 1});
    CHECK(est[1].mean == doctest::Approx(2.0 * est[0].mean).epsilon(1e-12));
    CHECK(est[2].mean == doctest::Approx(est[0].mean).epsilon(1e-12));
}

TEST_CASE("test functionals are bounded") {
    const TimeGrid g(1.0, 32);
    const TestFunctional one = TestFunctional::one();
    const TestFunctional cosf = TestFunctional::cosine(Vec{1.0, -0.5});
    const TestFunctional cyl = TestFunctional::cylinder({{8, Vec{0.3, 0.0}}, {32, Vec{0.0, 1.0}}});
    for (std::uint64_t p = 0; p < 25; ++p) {
        const WienerPath w = sample_path(13, p, g, 2);
        CHECK(one(w) == 1.0);
        CHECK(std::abs(cosf(w)) <= 1.0);
        CHECK(std::abs(cyl(w)) <= 1.0);
    }
}

TEST_CASE("degenerate identity has z = 0") {
    const TimeGrid g(1.0, 32);
    IdentityBuilder builder = [](const TimeGrid& grid) {
        return make_t_to_q_sides(MatrixFunction::zero(grid, 1), Route::riccati, TestFunctional::one());
    };
    const IdentityReport rep = run_identity(IdentityCase::t_to_q, builder, g, McConfig{512, 3, 1}, false);
    CHECK(rep.diff.mean == 0.0);
    CHECK(rep.z == 0.0);
    CHECK(rep.rhs_constant == doctest::Approx(1.0));
}

TEST_CASE("t-to-q identity verifies on a small scalar case") {
    const TimeGrid g(1.0, 64);
    IdentityBuilder builder = [](const TimeGrid& grid) {
        return make_t_to_q_sides(MatrixFunction::constant(grid, Mat{{0.3}}), Route::riccati,
                                 TestFunctional::cosine(Vec{1.0}));
    };
    const IdentityReport rep =
        run_identity(IdentityCase::t_to_q, builder, g, McConfig{20000, 71, 1}, true);
    CHECK(std::abs(rep.z) <= 5.0);
    CHECK(rep.has_bias);
    CHECK(std::abs(rep.z_bias_corrected) <= 5.0);
    CHECK(rep.diff_fine.n_steps == 128);
}

TEST_CASE("cvf2 identity verifies for an embedded constant chi") {
    const TimeGrid g(1.0, 64);
    IdentityBuilder builder = [](const TimeGrid& grid) {
        const Kernel eta = embed_chi(MatrixFunction::constant(grid, Mat{{0.3}}));
        return make_cvf2_sides(eta, TestFunctional::cosine(Vec{1.0}));
    };
    const IdentityReport rep = run_identity(IdentityCase::cvf2, builder, g, McConfig{20000, 77, 1}, false);
    CHECK(std::abs(rep.z) <= 5.0);
}

TEST_CASE("kernel caps are enforced") {
    const TimeGrid g(1.0, 32);
    std::mt19937 rng(55);
    const Kernel big = wqf::testing::random_smooth_kernel(rng, g, 1, 0.7);
    CHECK_THROWS_AS(make_cv0_sides(big, TestFunctional::one()), Error);
    try {
        make_cv0_sides(big, TestFunctional::one());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parameter_out_of_range);
    }
    const Kernel huge = wqf::testing::random_smooth_kernel(rng, g, 1, 1.2);
    CHECK_THROWS_AS(make_cvf2_sides(huge, TestFunctional::one()), Error);
}
