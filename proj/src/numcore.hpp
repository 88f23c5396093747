#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rbig {

inline constexpr double kDefaultClamp = 1e-7;
inline constexpr double kDensityFloorRatio = 1e-12;

/// Standard normal CDF. Throws ErrorCode::Domain on non-finite input.
double gaussian_cdf(double x);

/// Inverse of gaussian_cdf on (0, 1) (Wichura's AS241, ~1e-16 relative).
/// Throws ErrorCode::Domain outside the open interval; callers clamp first.
double probit(double u);

double gaussian_log_pdf(double x);
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

/// Bin count used by the empirical CDF and the pdf histogram:
/// ceil(sqrt(n)) clamped to [32, 1024].
std::size_t default_bins(std::size_t n);

struct CdfOptions {
    std::size_t bins = 0;  ///< 0 selects default_bins(n)
    double clamp = kDefaultClamp;
};

/// Piecewise-linear empirical CDF with knots at sample quantiles.
///
/// Interior knots are equal-count quantiles; the two outermost quantile bins
/// carry a knot every ceil(sqrt(n / bins)) order statistics, always including
/// the sample minimum and maximum. Knot probabilities are Hazen plotting positions (r + 0.5) / n,
/// floored at the clamp. Beyond the extreme knots the CDF continues as a
/// Gaussian tail, u(x) = Phi(probit(u_end) + (x - x_end) / tail_scale).
class EmpiricalCdf {
public:
    static EmpiricalCdf fit(std::span<const double> samples, const CdfOptions& options = {});

    /// Rebuilds from stored tables; validates every invariant.
    static EmpiricalCdf from_tables(std::vector<double> knots_x, std::vector<double> knots_u,
                                    double tail_scale, double clamp);

    /// CDF value clamped into [clamp, 1 - clamp].
    double evaluate(double x) const;

    /// Probability density: the segment slope inside the knots, the Gaussian
    /// tail density outside.
    double density(double x) const;

    /// Exact inverse of the piecewise-linear part, u in [u_front, u_back].
    double quantile(double u) const;

    /// Index of the segment [x_i, x_{i+1}) containing x; ties at an interior
    /// knot go to the lower segment. Only meaningful for lo <= x <= hi.
    std::size_t segment(double x) const;
    double segment_slope(std::size_t i) const { return slopes_[i]; }

    const std::vector<double>& knots_x() const { return knots_x_; }
    const std::vector<double>& knots_u() const { return knots_u_; }
    double support_lo() const { return knots_x_.front(); }
    double support_hi() const { return knots_x_.back(); }
    double tail_scale() const { return tail_scale_; }
    double clamp() const { return clamp_; }

    /// Gaussian-domain values of the extreme knots.
    double y_lo() const { return y_lo_; }
    double y_hi() const { return y_hi_; }

private:
    EmpiricalCdf() = default;
    void finish();

    std::vector<double> knots_x_;
    std::vector<double> knots_u_;
    std::vector<double> slopes_;
    double tail_scale_ = 1.0;
    double clamp_ = kDefaultClamp;
    double y_lo_ = 0.0;
    double y_hi_ = 0.0;
};

/// Histogram density with a floor outside (and inside) the support. The floor
/// is kDensityFloorRatio times the peak bin density.
class Histogram1D {
public:
    static Histogram1D fit(std::span<const double> samples, std::size_t bins = 0);
    /// Arbitrary strictly increasing edges; counts.size() == edges.size() - 1.
    static Histogram1D from_counts(std::vector<double> edges, std::vector<std::size_t> counts);

    double density(double x) const;
    double floor_density() const { return floor_; }

    const std::vector<double>& bin_edges() const { return edges_; }
    const std::vector<std::size_t>& counts() const { return counts_; }
    std::size_t total() const { return total_; }

private:
    std::vector<double> edges_;
    std::vector<std::size_t> counts_;
    std::size_t total_ = 0;
    double floor_ = 0.0;
};

/// Density of `hist` at x; never below the histogram's floor.
inline double evaluate_pdf(const Histogram1D& hist, double x) { return hist.density(x); }

}  // namespace rbig
