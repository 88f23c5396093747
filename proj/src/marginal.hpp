#pragma once

#include "numcore.hpp"

#include <span>

namespace rbig {

/// Per-dimension Gaussianization y = probit(U(x)) built on an EmpiricalCdf.
///
/// Inside the knot range the map is probit of the piecewise-linear CDF. Past
/// the extreme knots it continues linearly in the Gaussian domain with slope
/// 1 / tail_scale, which is the same thing as the CDF's Gaussian tail but
/// never saturates, so the map stays strictly increasing and invertible on
/// the whole real line.
class MarginalGaussianizer {
public:
    static MarginalGaussianizer fit(std::span<const double> samples, const CdfOptions& options = {});
    explicit MarginalGaussianizer(EmpiricalCdf cdf) : cdf_(std::move(cdf)) {}

    double forward(double x) const;
    double inverse(double y) const;

    /// log dPsi/dx = log p(x) - log g(Psi(x)), with p the CDF's density.
    double log_derivative(double x) const;

    /// forward and log_derivative in one lookup.
    double forward_with_log_derivative(double x, double& log_derivative) const;

    const EmpiricalCdf& cdf() const { return cdf_; }

private:
    EmpiricalCdf cdf_;
};

}  // namespace rbig
