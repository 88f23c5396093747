#include "marginal.hpp"

#include <cmath>

namespace rbig {

MarginalGaussianizer MarginalGaussianizer::fit(std::span<const double> samples, const CdfOptions& options) {
    return MarginalGaussianizer(EmpiricalCdf::fit(samples, options));
}

double MarginalGaussianizer::forward(double x) const {
    double unused;
    return forward_with_log_derivative(x, unused);
}

double MarginalGaussianizer::forward_with_log_derivative(double x, double& log_derivative) const {
    const auto& kx = cdf_.knots_x();
    const auto& ku = cdf_.knots_u();
    const double s = cdf_.tail_scale();
    if (x < kx.front()) {
        log_derivative = -std::log(s);
        return cdf_.y_lo() + (x - kx.front()) / s;
    }
    if (x > kx.back()) {
        log_derivative = -std::log(s);
        return cdf_.y_hi() + (x - kx.back()) / s;
    }
    const std::size_t i = cdf_.segment(x);
    const double slope = cdf_.segment_slope(i);
    double u = ku[i] + slope * (x - kx[i]);
    // Rounding can push u a hair past the bracketing knots; knots are already clamped.
    u = std::fmin(std::fmax(u, ku[i]), ku[i + 1]);
    const double y = probit(u);
    log_derivative = std::log(slope) - gaussian_log_pdf(y);
    return y;
}

double MarginalGaussianizer::log_derivative(double x) const {
    double ld;
    forward_with_log_derivative(x, ld);
    return ld;
}

double MarginalGaussianizer::inverse(double y) const {
    const auto& kx = cdf_.knots_x();
    const double s = cdf_.tail_scale();
    if (y <= cdf_.y_lo()) return kx.front() + (y - cdf_.y_lo()) * s;
    if (y >= cdf_.y_hi()) return kx.back() + (y - cdf_.y_hi()) * s;
    return cdf_.quantile(gaussian_cdf(y));
}

}  // namespace rbig
