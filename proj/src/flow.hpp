#pragma once

#include "marginal.hpp"
#include "rotation.hpp"
#include "types.hpp"

#include <cstdint>
#include <vector>

namespace rbig {

struct FitConfig {
    RotationKind rotation = RotationKind::Pca;
    std::size_t max_iterations = 100;
    /// Negative selects d * max(0.005, (bins - 1) / (2 n ln 2)) bits, the
    /// larger of the fixed default and the null level of the delta J estimate.
    double stop_tolerance_bits = -1.0;
    double gaussianity_alpha = 0.05;
    std::uint64_t seed = 0;
    std::size_t bins = 0;             ///< CDF knot bins; 0 selects default_bins(n)
    std::size_t negentropy_bins = 0;  ///< 0 selects negentropy_bins(n)
    double clamp = kDefaultClamp;
    std::size_t null_resamples = 200;
    std::size_t calibration_rows = 2000;  ///< 0 calibrates at the full n
    /// Random-rotation iterations that must also stay below the tolerance
    /// after the stopping condition is first met.
    std::size_t safety_iterations = 2;

    void validate() const;
    double tolerance_for(std::size_t dim, std::size_t n) const;
};

struct TraceRecord {
    std::size_t iteration = 0;
    double jm_bits = 0.0;
    double cumulative_dj_bits = 0.0;
    double gauss_stat = 0.0;
    double gauss_threshold = 0.0;
    bool gauss_accept = false;
    double wall_seconds = 0.0;  ///< not persisted
};

struct FitTrace {
    std::vector<TraceRecord> records;
    bool converged = false;
};

/// Per-dimension affine map z = (x - mean) / scale applied before layer 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& data);
    double log_abs_det() const;
};

struct RbigLayer {
    std::vector<MarginalGaussianizer> marginals;
    OrthonormalRotation rotation;
    double delta_j = 0.0;  ///< bits
};

class RbigModel {
public:
    RbigModel(Standardizer standardizer, std::vector<RbigLayer> layers, FitConfig config, FitTrace trace);

    std::size_t dim() const { return standardizer_.mean.size(); }
    const Standardizer& standardizer() const { return standardizer_; }
    const std::vector<RbigLayer>& layers() const { return layers_; }
    const FitConfig& config() const { return config_; }
    const FitTrace& trace() const { return trace_; }

    Matrix transform(const Matrix& x) const;
    Matrix inverse_transform(const Matrix& y) const;
    /// Natural-log densities, one per row.
    Vector log_density(const Matrix& x) const;
    /// Per-row log|det| of the forward Jacobian.
    Vector log_abs_det_jacobian(const Matrix& x) const;
    Matrix sample(std::size_t n, std::uint64_t seed) const;

    /// Single-row kernels; `log_det` may be null.
    void transform_row(const double* in, double* out, double* log_det) const;
    void inverse_row(const double* in, double* out) const;

    /// Sum of delta_j over all layers (bits).
    double total_delta_j_bits() const;
    /// Sum of delta_j over layers after the first (bits).
    double multi_information_bits() const;

private:
    Standardizer standardizer_;
    std::vector<RbigLayer> layers_;
    FitConfig config_;
    FitTrace trace_;
};

/// Fits the layer stack. Needs n >= 10 d, finite data, no constant column.
RbigModel fit(const Matrix& data, const FitConfig& config);

}  // namespace rbig
