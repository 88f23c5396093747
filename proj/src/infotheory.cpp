#include "infotheory.hpp"

#include "errors.hpp"
#include "flow.hpp"
#include "numcore.hpp"
#include "parallel.hpp"
#include "random.hpp"

#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

namespace rbig {

std::size_t negentropy_bins(std::size_t n) {
    const auto b = static_cast<std::size_t>(std::ceil(3.0 * std::cbrt(static_cast<double>(n))));
    return std::clamp<std::size_t>(b, 32, 1024);
}

namespace {

// Phi(b) - Phi(a) for a < b without cancellation in the upper tail.
double gaussian_mass(double a, double b) {
    if (a >= 0.0) return 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
    return 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments moments(std::span<const double> v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(v.size());
    return m;
}

double shape_negentropy_nats(std::span<const double> samples, const Moments& m, std::size_t bins, bool miller_madow = false) {
    const double sd = std::sqrt(m.var);
    double lo = (samples[0] - m.mean) / sd;
    double hi = lo;
    for (double x : samples) {
        const double z = (x - m.mean) / sd;
        lo = std::min(lo, z);
        hi = std::max(hi, z);
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double x : samples) {
        const double z = (x - m.mean) / sd;
        auto b = static_cast<std::size_t>((z - lo) / width);
        ++counts[std::min(b, bins - 1)];
    }
    const double n = static_cast<double>(samples.size());
    double kl = 0.0;
    std::size_t occupied = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        if (counts[b] == 0) continue;
        ++occupied;
        const double p = static_cast<double>(counts[b]) / n;
        const double a = lo + width * static_cast<double>(b);
        const double q = gaussian_mass(a, b + 1 == bins ? hi : a + width);
        kl += p * std::log(p / q);
    }
    if (miller_madow) kl -= static_cast<double>(occupied - 1) / (2.0 * n);
    return kl;
}

void check_samples(std::span<const double> samples) {
    if (samples.size() < 2) fail(ErrorCode::InsufficientData, "negentropy: needs at least two samples");
    for (double x : samples)
        if (!std::isfinite(x)) fail(ErrorCode::Domain, "negentropy: non-finite sample");
}

}  // namespace

NegentropyEstimate marginal_negentropy(std::span<const double> samples, std::size_t bins) {
    check_samples(samples);
    const Moments m = moments(samples);
    if (!(m.var > 0.0)) fail(ErrorCode::DegenerateMarginal, "negentropy: constant input");
    if (bins == 0) bins = negentropy_bins(samples.size());
    NegentropyEstimate est;
    est.bits = shape_negentropy_nats(samples, m, bins) / std::numbers::ln2;
    est.n_samples = samples.size();
    est.bins = bins;
    est.low_confidence = samples.size() < kNegentropyMinSamples;
    return est;
}

double marginal_negentropy_unit(std::span<const double> samples, std::size_t bins, bool miller_madow) {
    check_samples(samples);
    const Moments m = moments(samples);
    if (!(m.var > 0.0)) fail(ErrorCode::DegenerateMarginal, "negentropy: constant input");
    if (bins == 0) bins = negentropy_bins(samples.size());
    const double moment_term = 0.5 * (m.mean * m.mean + m.var - 1.0 - std::log(m.var));
    return (shape_negentropy_nats(samples, m, bins, miller_madow) + moment_term) / std::numbers::ln2;
}

namespace {

template <class F>
double sum_over_columns(const Matrix& data, F&& f) {
    std::vector<double> col(static_cast<std::size_t>(data.rows()));
    double total = 0.0;
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        for (Eigen::Index i = 0; i < data.rows(); ++i) col[static_cast<std::size_t>(i)] = data(i, j);
        total += f(std::span<const double>(col));
    }
    return total;
}

}  // namespace

double total_marginal_negentropy(const Matrix& data, std::size_t bins) {
    return sum_over_columns(data, [&](std::span<const double> c) { return marginal_negentropy(c, bins).bits; });
}

double total_marginal_negentropy_unit(const Matrix& data, std::size_t bins) {
    return sum_over_columns(data, [&](std::span<const double> c) { return marginal_negentropy_unit(c, bins); });
}

double multi_information(const Matrix& data, const FitConfig& config) {
    return fit(data, config).multi_information_bits();
}

// ---------------------------------------------------------------------------
// Energy test

namespace {

// Gamma((d+1)/2) / Gamma(d/2)
double half_gamma_ratio(std::size_t d) {
    const double h = static_cast<double>(d) / 2.0;
    return std::exp(std::lgamma(h + 0.5) - std::lgamma(h));
}

// E|a - Z| for Z ~ N(0, I_d), as a function of |a|^2.
double expected_distance_to_normal(double norm2, std::size_t d, double ratio) {
    const double b = static_cast<double>(d) / 2.0;
    const double z = norm2 / 2.0;
    if (z > 500.0) {
        // Large-argument expansion of 1F1(-1/2; b; -z) * Gamma(b+1/2)/Gamma(b):
        // sqrt(z) * (1 + (2b - 1) / (8z) + O(z^-2)); the outlier already dominates.
        return std::sqrt(2.0) * std::sqrt(z) * (1.0 + (2.0 * b - 1.0) / (8.0 * z));
    }
    return std::numbers::sqrt2 * ratio * boost::math::hypergeometric_1F1(-0.5, b, -z);
}

constexpr std::size_t kPairBlock = 64;

}  // namespace

double energy_statistic(const Matrix& data) {
    const auto n = static_cast<std::size_t>(data.rows());
    const auto d = static_cast<std::size_t>(data.cols());
    if (n == 0 || d == 0) fail(ErrorCode::Shape, "energy statistic: empty data");
    const double ratio = half_gamma_ratio(d);

    // Column-major copy keeps the inner pair loop contiguous.
    std::vector<double> cols(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) cols[k * n + i] = data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));

    const std::size_t blocks = (n + kPairBlock - 1) / kPairBlock;
    std::vector<double> pair_sums(blocks, 0.0);
    std::vector<double> point_sums(blocks, 0.0);
    parallel_for(
        blocks,
        [&](std::size_t b0, std::size_t b1) {
            std::vector<double> acc(n);
            for (std::size_t blk = b0; blk < b1; ++blk) {
                const std::size_t i0 = blk * kPairBlock;
                const std::size_t i1 = std::min(n, i0 + kPairBlock);
                double pairs = 0.0;
                double points = 0.0;
                for (std::size_t i = i0; i < i1; ++i) {
                    const std::size_t m = n - i - 1;
                    double* a = acc.data();
                    std::fill(a, a + m, 0.0);
                    double norm2 = 0.0;
                    for (std::size_t k = 0; k < d; ++k) {
                        const double* c = cols.data() + k * n;
                        const double xi = c[i];
                        norm2 += xi * xi;
                        const double* cj = c + i + 1;
                        for (std::size_t j = 0; j < m; ++j) {
                            const double diff = cj[j] - xi;
                            a[j] += diff * diff;
                        }
                    }
                    double row = 0.0;
                    for (std::size_t j = 0; j < m; ++j) row += std::sqrt(a[j]);
                    pairs += row;
                    points += expected_distance_to_normal(norm2, d, ratio);
                }
                pair_sums[blk] = pairs;
                point_sums[blk] = points;
            }
        },
        1);

    double pair_total = 0.0;
    double point_total = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        pair_total += pair_sums[b];
        point_total += point_sums[b];
    }
    const double nn = static_cast<double>(n);
    const double between = 2.0 * point_total / nn;
    const double reference = 2.0 * ratio;  // E|Z - Z'|
    const double within = 2.0 * pair_total / (nn * nn);
    return nn * (between - reference - within);
}

namespace {

using CalibrationKey = std::tuple<std::size_t, std::size_t, std::size_t, std::uint64_t>;

std::mutex g_calibration_mutex;
std::map<CalibrationKey, std::vector<double>> g_calibration_cache;

std::vector<double> null_statistics(std::size_t n, std::size_t d, std::size_t resamples, std::uint64_t seed) {
    const CalibrationKey key{n, d, resamples, seed};
    {
        std::lock_guard lock(g_calibration_mutex);
        if (auto it = g_calibration_cache.find(key); it != g_calibration_cache.end()) return it->second;
    }
    std::vector<double> stats(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        Rng rng = make_rng(seed, stream::calibration, b);
        StandardNormal normal;
        Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < z.rows(); ++i)
            for (Eigen::Index k = 0; k < z.cols(); ++k) z(i, k) = normal(rng);
        stats[b] = energy_statistic(z);
    }
    std::sort(stats.begin(), stats.end());
    std::lock_guard lock(g_calibration_mutex);
    g_calibration_cache.emplace(key, stats);
    return stats;
}

}  // namespace

GaussianityVerdict gaussianity_test(const Matrix& data, double alpha, const GaussianityOptions& options) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::Config, "gaussianity test: alpha must lie in (0, 1)");
    if (data.rows() < 100) fail(ErrorCode::InsufficientData, "gaussianity test: needs at least 100 rows");
    if (options.null_resamples < 10) fail(ErrorCode::Config, "gaussianity test: needs at least 10 null resamples");
    if (!data.allFinite()) fail(ErrorCode::Domain, "gaussianity test: non-finite data");

    const auto n = static_cast<std::size_t>(data.rows());
    const std::size_t cal_n = options.calibration_rows == 0 ? n : std::min(n, std::max<std::size_t>(100, options.calibration_rows));
    const auto null = null_statistics(cal_n, static_cast<std::size_t>(data.cols()), options.null_resamples, options.seed);

    const double pos = std::ceil((1.0 - alpha) * static_cast<double>(null.size()));
    const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(null.size()))) - 1;

    GaussianityVerdict v;
    v.statistic = energy_statistic(data);
    v.threshold = null[idx];
    v.accept = v.statistic <= v.threshold;
    v.alpha = alpha;
    return v;
}

}  // namespace rbig
