#include <doctest.h>

#include "errors.hpp"
#include "flow.hpp"
#include "infotheory.hpp"
#include "numcore.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace rbig;

namespace {

// Closed-form KL divergences to N(0, 1) for unit-variance laws, in bits.
const double kUniformNegentropy = 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e) - 0.5 * std::log2(12.0);
const double kExponentialNegentropy = 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e) - std::log2(std::numbers::e);

std::vector<double> exponential_draws(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = -std::log(uniform01(rng));
    return v;
}

FitConfig quick_config(std::uint64_t seed = 0) {
    FitConfig c;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("closed-form oracles") {
    CHECK(kUniformNegentropy == doctest::Approx(0.2546).epsilon(1e-3));
    CHECK(kExponentialNegentropy == doctest::Approx(0.604).epsilon(1e-3));
}

TEST_CASE("marginal negentropy examples") {
    const auto g = marginal_negentropy(support::column(support::gaussian(10000, 1, 1), 0));
    CHECK(std::abs(g.bits) <= 0.01);
    CHECK(g.n_samples == 10000);
    CHECK(g.bins == negentropy_bins(10000));
    CHECK_FALSE(g.low_confidence);

    const auto u = marginal_negentropy(support::column(support::uniform_cube(10000, 1, 2), 0));
    CHECK(std::abs(u.bits - kUniformNegentropy) <= 0.03);

    const auto e = marginal_negentropy(exponential_draws(10000, 3));
    CHECK(std::abs(e.bits - kExponentialNegentropy) <= 0.05);
}

TEST_CASE("negentropy estimates respect the noise floor") {
    for (std::uint64_t seed = 10; seed < 30; ++seed) {
        const auto g = marginal_negentropy(support::column(support::gaussian(2000, 1, seed), 0));
        CHECK(std::isfinite(g.bits));
        CHECK(g.bits >= -kNegentropyNoiseFloorBits);
    }
}

TEST_CASE("small samples are flagged as low confidence") {
    const auto small = marginal_negentropy(support::column(support::gaussian(499, 1, 4), 0));
    CHECK(small.low_confidence);
    CHECK(std::isfinite(small.bits));
    CHECK_FALSE(marginal_negentropy(support::column(support::gaussian(500, 1, 4), 0)).low_confidence);
}

TEST_CASE("negentropy of degenerate input is an error") {
    const std::vector<double> flat(1000, 2.5);
    try {
        marginal_negentropy(flat);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateMarginal);
    }
}

TEST_CASE("negentropy is invariant to affine standardization") {
    auto x = exponential_draws(5000, 5);
    const double base = marginal_negentropy(x).bits;
    for (auto& v : x) v = -3.0 + 7.5 * v;
    CHECK(std::abs(marginal_negentropy(x).bits - base) <= 0.01);
}

TEST_CASE("unit negentropy adds the Gaussian moment term") {
    auto x = support::column(support::gaussian(10000, 1, 6), 0);
    const double shape = marginal_negentropy(x).bits;
    CHECK(std::abs(marginal_negentropy_unit(x) - shape) <= 1e-3);
    for (auto& v : x) v = 1.0 + 2.0 * v;
    // D(N(1, 4) || N(0, 1)) = 0.5 (1 + 4 - 1 - ln 4) nats.
    const double moment = 0.5 * (1.0 + 4.0 - 1.0 - std::log(4.0)) / std::numbers::ln2;
    CHECK(std::abs(marginal_negentropy_unit(x) - moment) <= 0.03);
}

TEST_CASE("total marginal negentropy examples") {
    CHECK(std::abs(total_marginal_negentropy(support::gaussian(10000, 4, 7))) <= 0.04);
    const Matrix cube = support::uniform_cube(10000, 2, 8);
    const double axis = total_marginal_negentropy(cube);
    CHECK(std::abs(axis - 2.0 * kUniformNegentropy) <= 0.05);
    CHECK(total_marginal_negentropy(support::rotate2d(cube, std::numbers::pi / 4)) < axis);
    const double by_column = marginal_negentropy(support::column(cube, 0)).bits + marginal_negentropy(support::column(cube, 1)).bits;
    CHECK(axis == doctest::Approx(by_column).epsilon(1e-12));
}

TEST_CASE("Gaussianity test keeps its size on standard normal data") {
    int accepted = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const auto v = gaussianity_test(support::gaussian(2000, 2, 1000 + rep), 0.05, {.null_resamples = 200, .seed = 1});
        CHECK(v.accept == (v.statistic <= v.threshold));
        CHECK(v.alpha == 0.05);
        accepted += v.accept;
    }
    CHECK(accepted >= 90);
}

TEST_CASE("Gaussianity test rejects a uniform cube") {
    int rejected = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        // Standardized so the test sees shape, not just scale.
        Matrix x = support::uniform_cube(2000, 2, 2000 + rep);
        x = ((x.array() - 0.5) * std::sqrt(12.0)).matrix();
        rejected += !gaussianity_test(x, 0.05, {.null_resamples = 200, .seed = 1}).accept;
    }
    CHECK(rejected >= 99);
}

TEST_CASE("Gaussianity test accepts an exact quantile grid") {
    constexpr int m = 45;
    Matrix x(m * m, 2);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            x(i * m + j, 0) = probit((i + 0.5) / m);
            x(i * m + j, 1) = probit((j + 0.5) / m);
        }
    const auto v = gaussianity_test(x, 0.05, {.null_resamples = 200, .seed = 3});
    CHECK(v.accept);
    // A grid is more regular than any random sample, so it sits below a typical null draw.
    CHECK(v.statistic <= gaussianity_test(support::gaussian(m * m, 2, 4), 0.05, {.null_resamples = 200, .seed = 3}).threshold);
}

TEST_CASE("Gaussianity test preconditions and determinism") {
    auto code = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Domain;
    };
    CHECK(code([] { gaussianity_test(support::gaussian(99, 2, 1), 0.05); }) == ErrorCode::InsufficientData);
    CHECK(code([] { gaussianity_test(support::gaussian(200, 2, 1), 1.5); }) == ErrorCode::Config);
    const Matrix x = support::gaussian(300, 3, 9);
    const auto a = gaussianity_test(x, 0.1, {.null_resamples = 50, .seed = 5});
    const auto b = gaussianity_test(x, 0.1, {.null_resamples = 50, .seed = 5});
    CHECK(a.statistic == b.statistic);
    CHECK(a.threshold == b.threshold);
    CHECK(energy_statistic(x) == a.statistic);
}

TEST_CASE("multi-information of a correlated Gaussian") {
    const double rho = 0.9231;
    const auto c = support::correlation_2d(rho);
    CHECK(support::gaussian_mi_bits(c) == doctest::Approx(1.38).epsilon(1e-3));
    const double mi = multi_information(support::correlated_gaussian(10000, c, 21), quick_config());
    CHECK(std::abs(mi - 1.38) <= 0.05);
}

TEST_CASE("multi-information of independent data is near zero") {
    const double mi = multi_information(support::gaussian(10000, 2, 22), quick_config());
    CHECK(mi >= -0.03);
    CHECK(mi <= 0.03);
}

TEST_CASE("multi-information of a rotated uniform cube") {
    const Matrix x = support::rotate2d(support::uniform_cube(10000, 2, 23), std::numbers::pi / 4);
    const double mi = multi_information(x, quick_config());
    CHECK(mi >= 0.30);
    CHECK(mi <= 0.45);
}

TEST_CASE("multi-information is invariant under per-dimension monotone maps") {
    const Matrix x = support::correlated_gaussian(10000, support::correlation_2d(0.7), 24);
    Matrix y = x;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        y(i, 0) = std::exp(x(i, 0));
        y(i, 1) = x(i, 1) * x(i, 1) * x(i, 1) + x(i, 1);
    }
    const double a = multi_information(x, quick_config());
    const double b = multi_information(y, quick_config());
    CHECK(std::abs(a - b) <= 0.05);
}

TEST_CASE("multi-information error shrinks as the sample grows") {
    const auto c = support::random_correlation(3, 31);
    const double truth = support::gaussian_mi_bits(c);
    double err_small = 0.0, err_large = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        err_small += std::abs(multi_information(support::correlated_gaussian(2000, c, 40 + seed), quick_config(seed)) - truth);
        err_large += std::abs(multi_information(support::correlated_gaussian(20000, c, 50 + seed), quick_config(seed)) - truth);
    }
    CHECK(err_large < err_small);
}
