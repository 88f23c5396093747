#include "numcore.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <sstream>

namespace rbig {

double gaussian_cdf(double x) {
    if (!std::isfinite(x)) fail(ErrorCode::Domain, "gaussian_cdf: non-finite argument");
    // Kept inside the open interval where double rounding would reach 0 or 1.
    const double p = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    return std::clamp(p, std::numeric_limits<double>::denorm_min(), 1.0 - 0x1.0p-53);
}

double gaussian_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double probit(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        std::ostringstream os;
        os << "probit: argument " << u << " outside (0, 1)";
        fail(ErrorCode::Domain, os.str());
    }
    const double q = u - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                    4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                    2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = q < 0.0 ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                   1.27045825245236838258e0) * r + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                   1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                   2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                   7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

std::size_t default_bins(std::size_t n) {
    const auto b = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    return std::clamp<std::size_t>(b, 32, 1024);
}

namespace {

double population_sd(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

// Linear interpolation between adjacent order statistics at a fractional rank.
double order_statistic(const std::vector<double>& sorted, double rank) {
    const auto lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return frac == 0.0 ? sorted[lo] : sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

EmpiricalCdf EmpiricalCdf::fit(std::span<const double> samples, const CdfOptions& options) {
    if (!(options.clamp > 0.0 && options.clamp < 0.5)) fail(ErrorCode::Config, "cdf clamp must lie in (0, 0.5)");
    if (options.bins != 0 && options.bins < 8) fail(ErrorCode::Config, "cdf needs at least 8 bins");
    for (double x : samples)
        if (!std::isfinite(x)) fail(ErrorCode::Domain, "empirical cdf: non-finite sample");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() < 2 || sorted.front() == sorted.back())
        fail(ErrorCode::DegenerateMarginal, "empirical cdf: fewer than two distinct sample values");

    const std::size_t n = sorted.size();
    const std::size_t bins = options.bins ? options.bins : default_bins(n);
    const double step = static_cast<double>(n - 1) / static_cast<double>(bins);

    // Rank positions: equal-count ranks, plus a finer stride of ranks inside the
    // first and last quantile bin so the tails are resolved. A stride of one
    // sample would turn every small gap between order statistics into a spike.
    std::vector<double> ranks;
    const auto edge = static_cast<std::size_t>(std::ceil(step));
    const auto stride = static_cast<std::size_t>(std::ceil(std::sqrt(step)));
    for (std::size_t r = 0; r < std::min(edge, n); r += stride) ranks.push_back(static_cast<double>(r));
    for (std::size_t j = 1; j < bins; ++j) ranks.push_back(static_cast<double>(j) * step);
    for (std::size_t r = 0; r < std::min(edge, n); r += stride) ranks.push_back(static_cast<double>(n - 1 - r));
    std::sort(ranks.begin(), ranks.end());
    ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());

    const double lo_u = options.clamp;
    const double hi_u = 1.0 - options.clamp;
    EmpiricalCdf cdf;
    cdf.clamp_ = options.clamp;
    cdf.tail_scale_ = population_sd(sorted);
    for (std::size_t i = 0; i < ranks.size();) {
        const double x = order_statistic(sorted, ranks[i]);
        const double u_first = std::clamp((ranks[i] + 0.5) / static_cast<double>(n), lo_u, hi_u);
        double u_last = u_first;
        // Tied abscissae collapse into one knot at the group's midpoint probability.
        std::size_t j = i + 1;
        for (; j < ranks.size() && order_statistic(sorted, ranks[j]) == x; ++j)
            u_last = std::clamp((ranks[j] + 0.5) / static_cast<double>(n), lo_u, hi_u);
        const double u = 0.5 * (u_first + u_last);
        if (cdf.knots_u_.empty() || u > cdf.knots_u_.back()) {
            cdf.knots_x_.push_back(x);
            cdf.knots_u_.push_back(u);
        }
        i = j;
    }
    if (cdf.knots_x_.size() < 2) fail(ErrorCode::DegenerateMarginal, "empirical cdf: fewer than two distinct knots");
    cdf.finish();
    return cdf;
}

EmpiricalCdf EmpiricalCdf::from_tables(std::vector<double> knots_x, std::vector<double> knots_u, double tail_scale,
                                       double clamp) {
    if (knots_x.size() != knots_u.size() || knots_x.size() < 2)
        fail(ErrorCode::Corrupt, "cdf tables: mismatched or too short knot arrays");
    if (!(clamp > 0.0 && clamp < 0.5) || !(tail_scale > 0.0) || !std::isfinite(tail_scale))
        fail(ErrorCode::Corrupt, "cdf tables: invalid clamp or tail scale");
    for (std::size_t i = 0; i < knots_x.size(); ++i) {
        if (!std::isfinite(knots_x[i]) || !(knots_u[i] >= clamp && knots_u[i] <= 1.0 - clamp))
            fail(ErrorCode::Corrupt, "cdf tables: knot outside valid range");
        if (i > 0 && !(knots_x[i] > knots_x[i - 1] && knots_u[i] > knots_u[i - 1]))
            fail(ErrorCode::Corrupt, "cdf tables: knots not strictly increasing");
    }
    EmpiricalCdf cdf;
    cdf.knots_x_ = std::move(knots_x);
    cdf.knots_u_ = std::move(knots_u);
    cdf.tail_scale_ = tail_scale;
    cdf.clamp_ = clamp;
    cdf.finish();
    return cdf;
}

void EmpiricalCdf::finish() {
    slopes_.resize(knots_x_.size() - 1);
    for (std::size_t i = 0; i + 1 < knots_x_.size(); ++i)
        slopes_[i] = (knots_u_[i + 1] - knots_u_[i]) / (knots_x_[i + 1] - knots_x_[i]);
    y_lo_ = probit(knots_u_.front());
    y_hi_ = probit(knots_u_.back());
}

std::size_t EmpiricalCdf::segment(double x) const {
    // First knot >= x, then step back so x in (x_i, x_{i+1}].
    auto it = std::lower_bound(knots_x_.begin(), knots_x_.end(), x);
    std::size_t k = static_cast<std::size_t>(it - knots_x_.begin());
    if (k == 0) return 0;
    return std::min(k - 1, slopes_.size() - 1);
}

double EmpiricalCdf::evaluate(double x) const {
    double u;
    if (x <= knots_x_.front()) {
        u = x == knots_x_.front() ? knots_u_.front() : gaussian_cdf(y_lo_ + (x - knots_x_.front()) / tail_scale_);
    } else if (x >= knots_x_.back()) {
        u = x == knots_x_.back() ? knots_u_.back() : gaussian_cdf(y_hi_ + (x - knots_x_.back()) / tail_scale_);
    } else {
        const std::size_t i = segment(x);
        u = knots_u_[i] + slopes_[i] * (x - knots_x_[i]);
    }
    return std::clamp(u, clamp_, 1.0 - clamp_);
}

double EmpiricalCdf::density(double x) const {
    if (x < knots_x_.front())
        return std::exp(gaussian_log_pdf(y_lo_ + (x - knots_x_.front()) / tail_scale_)) / tail_scale_;
    if (x > knots_x_.back())
        return std::exp(gaussian_log_pdf(y_hi_ + (x - knots_x_.back()) / tail_scale_)) / tail_scale_;
    return slopes_[segment(x)];
}

double EmpiricalCdf::quantile(double u) const {
    if (u <= knots_u_.front()) return knots_x_.front();
    if (u >= knots_u_.back()) return knots_x_.back();
    auto it = std::lower_bound(knots_u_.begin(), knots_u_.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - knots_u_.begin());
    const std::size_t i = k == 0 ? 0 : k - 1;
    return knots_x_[i] + (u - knots_u_[i]) / slopes_[i];
}

Histogram1D Histogram1D::fit(std::span<const double> samples, std::size_t bins) {
    if (samples.empty()) fail(ErrorCode::InsufficientData, "histogram: no samples");
    double lo = samples[0], hi = samples[0];
    for (double x : samples) {
        if (!std::isfinite(x)) fail(ErrorCode::Domain, "histogram: non-finite sample");
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (!(hi > lo)) fail(ErrorCode::DegenerateMarginal, "histogram: all samples identical");
    if (bins == 0) bins = default_bins(samples.size());

    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    edges.back() = hi;
    std::vector<std::size_t> counts(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double x : samples) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        ++counts[std::min(b, bins - 1)];
    }
    return from_counts(std::move(edges), std::move(counts));
}

Histogram1D Histogram1D::from_counts(std::vector<double> edges, std::vector<std::size_t> counts) {
    if (edges.size() < 2 || counts.size() + 1 != edges.size()) fail(ErrorCode::Shape, "histogram: need bins + 1 edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!std::isfinite(edges[i])) fail(ErrorCode::Domain, "histogram: non-finite edge");
        if (i > 0 && !(edges[i] > edges[i - 1])) fail(ErrorCode::Domain, "histogram: edges not strictly increasing");
    }
    Histogram1D h;
    h.total_ = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (h.total_ == 0) fail(ErrorCode::InsufficientData, "histogram: no samples");
    h.edges_ = std::move(edges);
    h.counts_ = std::move(counts);
    double peak = 0.0;
    for (std::size_t b = 0; b < h.counts_.size(); ++b)
        peak = std::max(peak, static_cast<double>(h.counts_[b]) / (h.edges_[b + 1] - h.edges_[b]));
    h.floor_ = kDensityFloorRatio * peak / static_cast<double>(h.total_);
    return h;
}

double Histogram1D::density(double x) const {
    if (!(x >= edges_.front() && x <= edges_.back())) return floor_;
    // Bin [e_b, e_{b+1}); the last bin is closed.
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    std::size_t b = static_cast<std::size_t>(it - edges_.begin());
    b = std::min(b == 0 ? 0 : b - 1, counts_.size() - 1);
    const double d = static_cast<double>(counts_[b]) / (static_cast<double>(total_) * (edges_[b + 1] - edges_[b]));
    return std::max(d, floor_);
}

}  // namespace rbig
