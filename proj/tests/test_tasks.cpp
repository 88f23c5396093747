#include <doctest.h>

#include "errors.hpp"
#include "support.hpp"
#include "tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace rbig;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Domain;
}

FitConfig seeded(std::uint64_t seed) {
    FitConfig c;
    c.seed = seed;
    return c;
}

Matrix points(std::initializer_list<std::pair<double, double>> xy) {
    Matrix m(static_cast<Eigen::Index>(xy.size()), 2);
    Eigen::Index i = 0;
    for (auto [a, b] : xy) {
        m(i, 0) = a;
        m(i, 1) = b;
        ++i;
    }
    return m;
}

Matrix add_noise(const Matrix& clean, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    StandardNormal normal;
    Matrix x = clean;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) += sigma * normal(rng);
    return x;
}

double mse(const Matrix& a, const Matrix& b) { return (a - b).squaredNorm() / static_cast<double>(a.rows()); }

const RbigModel& gaussian_prior_1d() {
    static const RbigModel m = [] {
        Matrix x = support::gaussian(10000, 1, 70);
        x *= 2.0;
        return fit(x, seeded(1));
    }();
    return m;
}

}  // namespace

TEST_CASE("one-class training rejection rate equals nu") {
    const Matrix blob = support::gaussian(2000, 2, 61);
    const auto m = fit_one_class(blob, 0.1, seeded(1));
    CHECK(m.nu() == 0.1);
    const auto s = score(m, blob);
    const auto rejected = std::count(s.accept.begin(), s.accept.end(), std::uint8_t{0});
    const double rate = static_cast<double>(rejected) / 2000.0;
    CHECK(std::abs(rate - 0.1) <= 0.01);
    // The quantile construction is exact up to ties, so the binomial 95% band is loose.
    CHECK(std::abs(rate - 0.1) <= 1.96 * std::sqrt(0.1 * 0.9 / 2000.0));
    for (Eigen::Index i = 0; i < blob.rows(); ++i)
        CHECK(static_cast<bool>(s.accept[static_cast<std::size_t>(i)]) == (s.log_density[i] >= m.log_threshold()));
}

TEST_CASE("one-class rejects far outliers and accepts the centre") {
    const auto m = fit_one_class(support::gaussian(2000, 2, 62), 0.05, seeded(2));
    Matrix far(16, 2);
    for (int k = 0; k < 16; ++k) {
        const double t = 2.0 * std::numbers::pi * k / 16.0;
        far(k, 0) = 10.0 * std::cos(t);
        far(k, 1) = 10.0 * std::sin(t);
    }
    const auto s = score(m, far);
    CHECK(std::count(s.accept.begin(), s.accept.end(), std::uint8_t{1}) == 0);
    CHECK(score(m, points({{0.0, 0.0}})).accept[0] == 1);
}

TEST_CASE("one-class acceptance region on two moons is not convex") {
    const auto m = fit_one_class(support::two_moons(4000, 0.1, 63), 0.05, seeded(3));
    const auto s = score(m, points({{0.5, 0.25}, {0.0, 1.0}, {1.0, -0.5}}));
    CHECK(s.accept[0] == 0);
    CHECK(s.accept[1] == 1);
    CHECK(s.accept[2] == 1);
}

TEST_CASE("a score exactly at the threshold is accepted") {
    const auto fitted = fit_one_class(support::gaussian(1000, 2, 64), 0.2, seeded(4));
    const Matrix probe = points({{0.3, -0.7}});
    const double at = fitted.density_model().log_density(probe)[0];
    const OneClassModel tie(fitted.density_model(), at, 0.2);
    CHECK(score(tie, probe).accept[0] == 1);
    const OneClassModel above(fitted.density_model(), std::nextafter(at, INFINITY), 0.2);
    CHECK(score(above, probe).accept[0] == 0);
}

TEST_CASE("one-class preconditions") {
    const Matrix x = support::gaussian(500, 2, 65);
    CHECK(code_of([&] { fit_one_class(x, 0.0, seeded(1)); }) == ErrorCode::Config);
    CHECK(code_of([&] { fit_one_class(x, 1.0, seeded(1)); }) == ErrorCode::Config);
    const auto m = fit_one_class(x, 0.1, seeded(1));
    CHECK(code_of([&] { score(m, support::gaussian(5, 3, 1)); }) == ErrorCode::Shape);
    CHECK(code_of([&] { OneClassModel(m.density_model(), std::nan(""), 0.1); }) == ErrorCode::Domain);
}

TEST_CASE("denoising with vanishing noise returns the input") {
    const Matrix noisy = points({{0.1, 0.2}, {-1.0, 0.5}, {1.5, -1.2}});
    const auto prior = fit(support::gaussian(5000, 2, 66), seeded(5));
    const auto r = denoise(prior, noisy, NoiseModel::isotropic(2, 1e-6), 1000, 7);
    CHECK((r.values - noisy).cwiseAbs().maxCoeff() <= 1e-3);
    CHECK(std::count(r.fallback.begin(), r.fallback.end(), std::uint8_t{1}) == 0);
}

TEST_CASE("Gaussian prior gives the closed-form shrinkage") {
    // Prior N(0, 4), noise N(0, 1): posterior mean is 4 / (4 + 1) x_n.
    Matrix noisy(13, 1);
    for (int k = 0; k < 13; ++k) noisy(k, 0) = -3.0 + 0.5 * k;
    const auto r = denoise(gaussian_prior_1d(), noisy, NoiseModel::isotropic(1, 1.0), kDefaultPosteriorSamples, 8);
    double xy = 0.0, xx = 0.0;
    for (int k = 0; k < 13; ++k) {
        const double x = noisy(k, 0), expected = 0.8 * x;
        // Relative error is meaningless at the origin, so inside |x_n| < 1 the bound is 5% of 0.8.
        CHECK(std::abs(r.values(k, 0) - expected) <= 0.05 * 0.8 * std::max(std::abs(x), 1.0));
        xy += x * r.values(k, 0);
        xx += x * x;
    }
    CHECK(std::abs(xy / xx - 0.8) <= 0.05 * 0.8);
}

TEST_CASE("denoising beats the noisy observation under a Gaussian prior") {
    const double sigma_x = 2.0;
    Matrix clean = support::gaussian(500, 1, 71);
    clean *= sigma_x;
    for (double f : {0.25, 0.5, 1.0}) {
        const Matrix noisy = add_noise(clean, f * sigma_x, 72);
        const auto r = denoise(gaussian_prior_1d(), noisy, NoiseModel::isotropic(1, f * sigma_x), 2000, 9);
        CHECK(mse(r.values, clean) <= mse(noisy, clean));
    }
}

TEST_CASE("ring prior removes at least 30 percent of the squared error") {
    const double radius = 2.0;
    const auto prior = fit(support::ring(10000, radius, 0.15, 73), seeded(6));
    const Matrix clean = support::ring(500, radius, 0.15, 74);
    const Matrix noisy = add_noise(clean, 0.3 * radius, 75);
    const auto r = denoise(prior, noisy, NoiseModel::isotropic(2, 0.3 * radius), kDefaultPosteriorSamples, 10);
    CHECK(mse(r.values, clean) <= 0.7 * mse(noisy, clean));
}

TEST_CASE("denoising is deterministic for a fixed seed") {
    const Matrix noisy = add_noise(support::gaussian(40, 1, 76), 1.0, 77);
    const auto a = denoise(gaussian_prior_1d(), noisy, NoiseModel::isotropic(1, 1.0), 500, 11);
    const auto b = denoise(gaussian_prior_1d(), noisy, NoiseModel::isotropic(1, 1.0), 500, 11);
    CHECK(a.values == b.values);
    const auto c = denoise(gaussian_prior_1d(), noisy, NoiseModel::isotropic(1, 1.0), 500, 12);
    CHECK(c.values != a.values);
}

TEST_CASE("denoise preconditions") {
    const Matrix noisy = support::gaussian(5, 1, 78);
    const auto& prior = gaussian_prior_1d();
    CHECK(code_of([&] { denoise(prior, noisy, NoiseModel::isotropic(1, 1.0), 99, 1); }) == ErrorCode::Config);
    CHECK(code_of([&] { denoise(prior, noisy, NoiseModel::isotropic(1, 0.0), 500, 1); }) == ErrorCode::Config);
    CHECK(code_of([&] { denoise(prior, noisy, NoiseModel::isotropic(1, -1.0), 500, 1); }) == ErrorCode::Config);
    CHECK(code_of([&] { denoise(prior, noisy, NoiseModel::isotropic(2, 1.0), 500, 1); }) == ErrorCode::Shape);
    CHECK(code_of([&] { denoise(prior, support::gaussian(5, 2, 1), NoiseModel::isotropic(2, 1.0), 500, 1); }) ==
          ErrorCode::Shape);
}
