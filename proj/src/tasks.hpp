#pragma once

#include "flow.hpp"

#include <cstdint>
#include <vector>

namespace rbig {

class OneClassModel {
public:
    OneClassModel(RbigModel density_model, double log_threshold, double nu);

    const RbigModel& density_model() const { return model_; }
    double log_threshold() const { return log_threshold_; }
    double nu() const { return nu_; }

private:
    RbigModel model_;
    double log_threshold_;
    double nu_;
};

/// Fits a density model and sets the threshold to the nu-quantile of the
/// training log-densities (the floor(nu * n)-th smallest value).
OneClassModel fit_one_class(const Matrix& target, double nu, const FitConfig& config);

struct OneClassScores {
    Vector log_density;
    std::vector<std::uint8_t> accept;  ///< 1 iff log_density >= threshold
};

OneClassScores score(const OneClassModel& model, const Matrix& x);

struct NoiseModel {
    std::vector<double> sigma;  ///< per-dimension standard deviation, all > 0

    static NoiseModel isotropic(std::size_t dim, double sigma);
    void validate(std::size_t dim) const;
};

inline constexpr std::size_t kDefaultPosteriorSamples = 8000;

struct DenoiseResult {
    Matrix values;
    std::vector<std::uint8_t> fallback;  ///< 1 where all weights underflowed and the input was returned
};

/// Posterior mean under the prior by self-normalized importance sampling:
/// candidates x* ~ N(x_n, diag(sigma^2)) weighted by the prior density.
/// Row r draws from its own seeded stream, so results do not depend on the
/// thread schedule.
DenoiseResult denoise(const RbigModel& prior, const Matrix& noisy, const NoiseModel& noise,
                      std::size_t n_posterior, std::uint64_t seed);

}  // namespace rbig
