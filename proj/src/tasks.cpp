#include "tasks.hpp"

#include "errors.hpp"
#include "numcore.hpp"
#include "parallel.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rbig {

OneClassModel::OneClassModel(RbigModel density_model, double log_threshold, double nu)
    : model_(std::move(density_model)), log_threshold_(log_threshold), nu_(nu) {
    if (!(nu > 0.0 && nu < 1.0)) fail(ErrorCode::Config, "one-class: nu must lie in (0, 1)");
    if (!std::isfinite(log_threshold)) fail(ErrorCode::Domain, "one-class: threshold is not finite");
}

OneClassModel fit_one_class(const Matrix& target, double nu, const FitConfig& config) {
    if (!(nu > 0.0 && nu < 1.0)) fail(ErrorCode::Config, "one-class: nu must lie in (0, 1)");
    RbigModel model = fit(target, config);
    Vector ld = model.log_density(target);
    std::vector<double> sorted(ld.data(), ld.data() + ld.size());
    std::sort(sorted.begin(), sorted.end());
    const auto idx = std::min(sorted.size() - 1, static_cast<std::size_t>(std::floor(nu * static_cast<double>(sorted.size()))));
    return OneClassModel(std::move(model), sorted[idx], nu);
}

OneClassScores score(const OneClassModel& model, const Matrix& x) {
    OneClassScores s;
    s.log_density = model.density_model().log_density(x);
    s.accept.resize(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) s.accept[static_cast<std::size_t>(i)] = s.log_density[i] >= model.log_threshold();
    return s;
}

NoiseModel NoiseModel::isotropic(std::size_t dim, double sigma) { return NoiseModel{std::vector<double>(dim, sigma)}; }

void NoiseModel::validate(std::size_t dim) const {
    if (sigma.size() != dim) fail(ErrorCode::Shape, "noise model: expected " + std::to_string(dim) + " sigmas");
    for (double s : sigma)
        if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::Config, "noise model: sigma must be positive and finite");
}

DenoiseResult denoise(const RbigModel& prior, const Matrix& noisy, const NoiseModel& noise,
                      std::size_t n_posterior, std::uint64_t seed) {
    const std::size_t d = prior.dim();
    if (static_cast<std::size_t>(noisy.cols()) != d) fail(ErrorCode::Shape, "denoise: column count does not match the prior");
    noise.validate(d);
    if (n_posterior < 100) fail(ErrorCode::Config, "denoise: n_posterior must be at least 100");
    if (!noisy.allFinite()) fail(ErrorCode::Domain, "denoise: non-finite input");

    DenoiseResult result;
    result.values.resize(noisy.rows(), noisy.cols());
    result.fallback.assign(static_cast<std::size_t>(noisy.rows()), 0);

    parallel_for(
        static_cast<std::size_t>(noisy.rows()),
        [&](std::size_t begin, std::size_t end) {
            std::vector<double> candidates(n_posterior * d);
            std::vector<double> logw(n_posterior);
            std::vector<double> y(d);
            for (std::size_t r = begin; r < end; ++r) {
                const auto row = static_cast<Eigen::Index>(r);
                Rng rng = make_rng(seed, stream::posterior, r);
                StandardNormal normal;
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < n_posterior; ++c) {
                    double* xc = candidates.data() + c * d;
                    for (std::size_t j = 0; j < d; ++j) xc[j] = noisy(row, static_cast<Eigen::Index>(j)) + noise.sigma[j] * normal(rng);
                    double ld;
                    prior.transform_row(xc, y.data(), &ld);
                    for (double v : y) ld += gaussian_log_pdf(v);
                    logw[c] = ld;
                    if (ld > best) best = ld;
                }
                double total = 0.0;
                std::vector<double> mean(d, 0.0);
                if (std::isfinite(best)) {
                    for (std::size_t c = 0; c < n_posterior; ++c) {
                        const double w = std::exp(logw[c] - best);
                        total += w;
                        for (std::size_t j = 0; j < d; ++j) mean[j] += w * candidates[c * d + j];
                    }
                }
                if (!(total > 0.0) || !std::isfinite(total)) {
                    result.fallback[r] = 1;
                    for (std::size_t j = 0; j < d; ++j) result.values(row, static_cast<Eigen::Index>(j)) = noisy(row, static_cast<Eigen::Index>(j));
                    continue;
                }
                for (std::size_t j = 0; j < d; ++j) result.values(row, static_cast<Eigen::Index>(j)) = mean[j] / total;
            }
        },
        1);
    const auto fallbacks = std::count(result.fallback.begin(), result.fallback.end(), std::uint8_t{1});
    if (fallbacks > 0) warn("denoise: " + std::to_string(fallbacks) + " rows fell back to the noisy input");
    return result;
}

}  // namespace rbig
