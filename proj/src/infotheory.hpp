#pragma once

#include "types.hpp"

#include <cstdint>
#include <span>

namespace rbig {

struct FitConfig;

inline constexpr double kNegentropyNoiseFloorBits = 0.01;
inline constexpr std::size_t kNegentropyMinSamples = 500;

/// Bin count for the negentropy plug-in: ceil(3 * cbrt(n)) clamped to [32, 1024].
std::size_t negentropy_bins(std::size_t n);

struct NegentropyEstimate {
    double bits = 0.0;
    std::size_t n_samples = 0;
    std::size_t bins = 0;
    bool low_confidence = false;  ///< fewer than kNegentropyMinSamples samples
};

/// Plug-in histogram estimate of D_KL(p || N(0,1)) in bits after standardizing
/// the samples to zero mean and unit variance (shape non-Gaussianity only).
/// Empty bins contribute zero; no bias correction.
NegentropyEstimate marginal_negentropy(std::span<const double> samples, std::size_t bins = 0);

/// D_KL(p || N(0,1)) in bits without standardizing: the shape term above plus
/// the exact Gaussian moment term 0.5 * (mu^2 + s^2 - 1 - ln s^2) / ln 2.
/// With miller_madow the shape term drops (occupied bins - 1) / 2n nats.
double marginal_negentropy_unit(std::span<const double> samples, std::size_t bins = 0, bool miller_madow = false);

/// Sum of marginal_negentropy over columns.
double total_marginal_negentropy(const Matrix& data, std::size_t bins = 0);

/// Sum of marginal_negentropy_unit over columns.
double total_marginal_negentropy_unit(const Matrix& data, std::size_t bins = 0);

/// Multi-information in bits: fits a model and returns the redundancy removed
/// by its layers (cumulative delta J after the first marginal step).
double multi_information(const Matrix& data, const FitConfig& config);

struct GaussianityOptions {
    std::size_t null_resamples = 200;
    std::uint64_t seed = 0;
    /// Rows per null resample; 0 means the same n as the data. The statistic
    /// is n-scaled, so its null law is nearly n-free and a smaller calibration
    /// size is a cheap approximation for large n.
    std::size_t calibration_rows = 0;
};

struct GaussianityVerdict {
    double statistic = 0.0;
    double threshold = 0.0;
    bool accept = false;
    double alpha = 0.05;
};

/// Energy statistic of the sample against N(0, I):
/// n * (2/n sum E|x_i - Z| - E|Z - Z'| - 1/n^2 sum |x_i - x_j|).
double energy_statistic(const Matrix& data);

/// Energy test of standard multivariate normality, Monte-Carlo calibrated.
/// accept means normality cannot be rejected at alpha. Needs n >= 100.
GaussianityVerdict gaussianity_test(const Matrix& data, double alpha, const GaussianityOptions& options = {});

}  // namespace rbig
