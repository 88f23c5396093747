#include "flow.hpp"

#include "errors.hpp"
#include "infotheory.hpp"
#include "numcore.hpp"
#include "parallel.hpp"
#include "random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace rbig {

void FitConfig::validate() const {
    if (max_iterations < 1) fail(ErrorCode::Config, "max_iterations must be at least 1");
    if (!(gaussianity_alpha > 0.0 && gaussianity_alpha < 1.0)) fail(ErrorCode::Config, "gaussianity_alpha must lie in (0, 1)");
    if (std::isnan(stop_tolerance_bits)) fail(ErrorCode::Config, "stop_tolerance_bits is NaN");
    if (bins != 0 && bins < 8) fail(ErrorCode::Config, "bins must be 0 or at least 8");
    if (negentropy_bins != 0 && negentropy_bins < 2) fail(ErrorCode::Config, "negentropy_bins must be 0 or at least 2");
    if (!(clamp > 0.0 && clamp < 0.01)) fail(ErrorCode::Config, "clamp must lie in (0, 0.01)");
    if (null_resamples < 10) fail(ErrorCode::Config, "null_resamples must be at least 10");
    if (rotation == RotationKind::Ica) make_rotation(rotation, Matrix(), 0);
}

double FitConfig::tolerance_for(std::size_t dim, std::size_t n) const {
    if (stop_tolerance_bits >= 0.0) return stop_tolerance_bits;
    const double bins = static_cast<double>(negentropy_bins ? negentropy_bins : rbig::negentropy_bins(n));
    const double floor = (bins - 1.0) / (2.0 * static_cast<double>(n) * std::numbers::ln2);
    return static_cast<double>(dim) * std::max(0.005, floor);
}

Standardizer Standardizer::fit(const Matrix& data) {
    Standardizer s;
    const auto n = static_cast<double>(data.rows());
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        double mean = 0.0;
        for (Eigen::Index i = 0; i < data.rows(); ++i) mean += data(i, j);
        mean /= n;
        double var = 0.0;
        for (Eigen::Index i = 0; i < data.rows(); ++i) var += (data(i, j) - mean) * (data(i, j) - mean);
        var /= n;
        if (!(var > 0.0)) fail(ErrorCode::DegenerateMarginal, "column " + std::to_string(j) + " is constant");
        s.mean.push_back(mean);
        s.scale.push_back(std::sqrt(var));
    }
    return s;
}

double Standardizer::log_abs_det() const {
    double v = 0.0;
    for (double s : scale) v -= std::log(s);
    return v;
}

RbigModel::RbigModel(Standardizer standardizer, std::vector<RbigLayer> layers, FitConfig config, FitTrace trace)
    : standardizer_(std::move(standardizer)), layers_(std::move(layers)), config_(config), trace_(std::move(trace)) {
    const std::size_t d = dim();
    if (d == 0 || standardizer_.scale.size() != d) fail(ErrorCode::Shape, "model: standardizer size mismatch");
    for (const auto& layer : layers_)
        if (layer.marginals.size() != d || layer.rotation.dim() != d) fail(ErrorCode::Shape, "model: layer dimension mismatch");
}

void RbigModel::transform_row(const double* in, double* out, double* log_det) const {
    const std::size_t d = dim();
    std::vector<double> tmp(d);
    double ld = standardizer_.log_abs_det();
    for (std::size_t i = 0; i < d; ++i) out[i] = (in[i] - standardizer_.mean[i]) / standardizer_.scale[i];
    for (const auto& layer : layers_) {
        for (std::size_t i = 0; i < d; ++i) {
            double g;
            tmp[i] = layer.marginals[i].forward_with_log_derivative(out[i], g);
            ld += g;
        }
        layer.rotation.apply_row(tmp.data(), out);
    }
    if (log_det) *log_det = ld;
}

void RbigModel::inverse_row(const double* in, double* out) const {
    const std::size_t d = dim();
    std::vector<double> tmp(in, in + d);
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        it->rotation.apply_transpose_row(tmp.data(), out);
        for (std::size_t i = 0; i < d; ++i) tmp[i] = it->marginals[i].inverse(out[i]);
    }
    for (std::size_t i = 0; i < d; ++i) out[i] = tmp[i] * standardizer_.scale[i] + standardizer_.mean[i];
}

namespace {

void check_input(const Matrix& x, std::size_t d, const char* what) {
    if (static_cast<std::size_t>(x.cols()) != d)
        fail(ErrorCode::Shape, std::string(what) + ": expected " + std::to_string(d) + " columns, got " + std::to_string(x.cols()));
}

template <class Row>
void for_rows(Eigen::Index n, Row&& row) {
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) row(static_cast<Eigen::Index>(i));
    });
}

}  // namespace

Matrix RbigModel::transform(const Matrix& x) const {
    check_input(x, dim(), "transform");
    Matrix y(x.rows(), x.cols());
    for_rows(x.rows(), [&](Eigen::Index i) { transform_row(x.row(i).data(), y.row(i).data(), nullptr); });
    return y;
}

Matrix RbigModel::inverse_transform(const Matrix& y) const {
    check_input(y, dim(), "inverse_transform");
    Matrix x(y.rows(), y.cols());
    for_rows(y.rows(), [&](Eigen::Index i) { inverse_row(y.row(i).data(), x.row(i).data()); });
    return x;
}

Vector RbigModel::log_abs_det_jacobian(const Matrix& x) const {
    check_input(x, dim(), "log_abs_det_jacobian");
    Vector out(x.rows());
    for_rows(x.rows(), [&](Eigen::Index i) {
        std::vector<double> y(dim());
        transform_row(x.row(i).data(), y.data(), &out[i]);
    });
    return out;
}

Vector RbigModel::log_density(const Matrix& x) const {
    check_input(x, dim(), "log_density");
    Vector out(x.rows());
    for_rows(x.rows(), [&](Eigen::Index i) {
        std::vector<double> y(dim());
        double ld;
        transform_row(x.row(i).data(), y.data(), &ld);
        for (double v : y) ld += gaussian_log_pdf(v);
        out[i] = ld;
    });
    return out;
}

Matrix RbigModel::sample(std::size_t n, std::uint64_t seed) const {
    Rng rng = make_rng(seed, stream::sampling);
    StandardNormal normal;
    Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim()));
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = normal(rng);
    return inverse_transform(z);
}

double RbigModel::total_delta_j_bits() const {
    double v = 0.0;
    for (const auto& layer : layers_) v += layer.delta_j;
    return v;
}

double RbigModel::multi_information_bits() const {
    double v = 0.0;
    for (std::size_t k = 1; k < layers_.size(); ++k) v += layers_[k].delta_j;
    return v;
}

RbigModel fit(const Matrix& data, const FitConfig& config) {
    config.validate();
    const auto n = static_cast<std::size_t>(data.rows());
    const auto d = static_cast<std::size_t>(data.cols());
    if (d == 0) fail(ErrorCode::Shape, "fit: data has no columns");
    if (n < 10 * d) fail(ErrorCode::InsufficientData, "fit: needs at least 10 * d rows, got " + std::to_string(n));
    if (!data.allFinite()) fail(ErrorCode::Domain, "fit: data contains non-finite values");

    const auto start = std::chrono::steady_clock::now();
    Standardizer standardizer = Standardizer::fit(data);
    Matrix x(data.rows(), data.cols());
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j)
            x(i, static_cast<Eigen::Index>(j)) = (data(i, static_cast<Eigen::Index>(j)) - standardizer.mean[j]) / standardizer.scale[j];

    const double tol = config.tolerance_for(d, n);
    const CdfOptions cdf_options{config.bins, config.clamp};
    GaussianityOptions test_options;
    test_options.null_resamples = config.null_resamples;
    test_options.seed = config.seed;
    test_options.calibration_rows = config.calibration_rows;
    const bool can_test = n >= 100;

    std::vector<RbigLayer> layers;
    FitTrace trace;
    std::vector<double> col(n), mapped(n);
    Matrix px(x.rows(), x.cols());
    bool checking = false;  // inside the random-rotation safety check
    std::size_t checks = 0;
    double cumulative = 0.0;

    for (std::size_t k = 0;; ++k) {
        std::vector<MarginalGaussianizer> marginals;
        marginals.reserve(d);
        double jm = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            for (std::size_t i = 0; i < n; ++i) col[i] = x(static_cast<Eigen::Index>(i), jj);
            try {
                marginals.push_back(MarginalGaussianizer::fit(col, cdf_options));
            } catch (const Error& e) {
                if (e.code() == ErrorCode::DegenerateMarginal)
                    fail(ErrorCode::DegenerateMarginal, "fit: column " + std::to_string(j) + " is degenerate at iteration " + std::to_string(k));
                throw;
            }
            for (std::size_t i = 0; i < n; ++i) px(static_cast<Eigen::Index>(i), jj) = marginals.back().forward(col[i]);
            for (std::size_t i = 0; i < n; ++i) mapped[i] = px(static_cast<Eigen::Index>(i), jj);
            // Bias-corrected negentropy of the input minus the (nearly bias-free,
            // since Psi x is regular by construction) residual left by Psi.
            jm += marginal_negentropy_unit(col, config.negentropy_bins) - marginal_negentropy_unit(mapped, config.negentropy_bins);
        }
        cumulative += jm;

        TraceRecord rec;
        rec.iteration = k;
        rec.jm_bits = jm;
        rec.cumulative_dj_bits = cumulative;
        if (can_test) {
            const auto verdict = gaussianity_test(x, config.gaussianity_alpha, test_options);
            rec.gauss_stat = verdict.statistic;
            rec.gauss_threshold = verdict.threshold;
            rec.gauss_accept = verdict.accept;
        } else {
            rec.gauss_threshold = std::numeric_limits<double>::infinity();
            rec.gauss_accept = true;
        }
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        trace.records.push_back(rec);

        const bool below = jm < tol;
        if (checking) {
            checking = below;
            if (below && ++checks >= config.safety_iterations) {
                trace.converged = true;
                break;
            }
        } else if (below && rec.gauss_accept) {
            if (config.safety_iterations == 0) {
                trace.converged = true;
                break;
            }
            checking = true;
            checks = 0;
        }
        if (layers.size() >= config.max_iterations) break;

        // A below-tolerance step right after a PCA rotation means PCA has run out
        // of second-order structure; a random rotation keeps the fit from stalling.
        const bool stalled = below && !layers.empty() && layers.back().rotation.provenance() == RotationKind::Pca;
        const bool random = config.rotation == RotationKind::Random || checking || stalled;
        OrthonormalRotation rotation = random ? random_rotation(d, derive_seed(config.seed, stream::rotation, k))
                                              : pca_rotation(px);
        for (Eigen::Index i = 0; i < x.rows(); ++i) rotation.apply_row(px.row(i).data(), x.row(i).data());
        layers.push_back(RbigLayer{std::move(marginals), std::move(rotation), jm});
    }
    if (!trace.converged) warn("fit: reached max_iterations without meeting the stopping rule");
    return RbigModel(std::move(standardizer), std::move(layers), config, std::move(trace));
}

}  // namespace rbig
