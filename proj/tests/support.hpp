#pragma once

#include "random.hpp"
#include "types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

namespace support {

using rbig::Matrix;

inline Matrix uniform_cube(std::size_t n, std::size_t d, std::uint64_t seed) {
    rbig::Rng rng(seed);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rbig::uniform01(rng);
    return x;
}

inline Matrix gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
    rbig::Rng rng(seed);
    rbig::StandardNormal normal;
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
    return x;
}

inline Matrix rotate2d(const Matrix& x, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Matrix y(x.rows(), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        y(i, 0) = c * x(i, 0) - s * x(i, 1);
        y(i, 1) = s * x(i, 0) + c * x(i, 1);
    }
    return y;
}

/// Rows of N(0, cov) via the Cholesky factor.
inline Matrix correlated_gaussian(std::size_t n, const Eigen::MatrixXd& cov, std::uint64_t seed) {
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
    const Matrix z = gaussian(n, static_cast<std::size_t>(cov.rows()), seed);
    return z * l.transpose();
}

inline Eigen::MatrixXd correlation_2d(double rho) {
    Eigen::MatrixXd c(2, 2);
    c << 1.0, rho, rho, 1.0;
    return c;
}

/// Random correlation matrix: normalized A Aᵀ + 0.5 I with Gaussian A.
inline Eigen::MatrixXd random_correlation(std::size_t d, std::uint64_t seed) {
    const Matrix a = gaussian(d, d, seed);
    Eigen::MatrixXd cov = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const Eigen::VectorXd s = cov.diagonal().cwiseSqrt().cwiseInverse();
    return s.asDiagonal() * cov * s.asDiagonal();
}

/// Closed-form multi-information of a Gaussian with correlation matrix c, in bits.
inline double gaussian_mi_bits(const Eigen::MatrixXd& c) { return -0.5 * std::log2(c.determinant()); }

inline Matrix ring(std::size_t n, double radius, double width, std::uint64_t seed) {
    rbig::Rng rng(seed);
    rbig::StandardNormal normal;
    Matrix x(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double t = 2.0 * std::numbers::pi * rbig::uniform01(rng);
        const double r = radius + width * normal(rng);
        x(i, 0) = r * std::cos(t);
        x(i, 1) = r * std::sin(t);
    }
    return x;
}

/// Upper moon: unit half circle at the origin; lower moon: shifted to (1, 0.5) and flipped.
inline Matrix two_moons(std::size_t n, double noise, std::uint64_t seed) {
    rbig::Rng rng(seed);
    rbig::StandardNormal normal;
    Matrix x(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double t = std::numbers::pi * rbig::uniform01(rng);
        if (i % 2 == 0) {
            x(i, 0) = std::cos(t);
            x(i, 1) = std::sin(t);
        } else {
            x(i, 0) = 1.0 - std::cos(t);
            x(i, 1) = 0.5 - std::sin(t);
        }
        x(i, 0) += noise * normal(rng);
        x(i, 1) += noise * normal(rng);
    }
    return x;
}

inline std::vector<double> column(const Matrix& x, Eigen::Index j) {
    std::vector<double> c(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) c[static_cast<std::size_t>(i)] = x(i, j);
    return c;
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Standard normal CDF by composite Simpson integration of the density.
inline double simpson_normal_cdf(double x) {
    const double a = 0.0, b = std::abs(x);
    if (b == 0.0) return 0.5;
    const int m = 2 * static_cast<int>(std::ceil(b * 2000.0));
    const double h = (b - a) / m;
    double s = normal_pdf(a) + normal_pdf(b);
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * normal_pdf(a + i * h);
    const double half = s * h / 3.0;
    return x > 0 ? 0.5 + half : 0.5 - half;
}

/// Root of simpson_normal_cdf(x) = u by bisection.
inline double bisect_probit(double u) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
        const double mid = 0.5 * (lo + hi);
        (simpson_normal_cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Sample mean and population covariance.
inline void moments(const Matrix& x, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
    mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd c = x.rowwise() - mean.transpose();
    cov = c.transpose() * c / static_cast<double>(x.rows());
}

}  // namespace support
