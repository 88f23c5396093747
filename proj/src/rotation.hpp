#pragma once

#include "types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace rbig {

enum class RotationKind { Pca, Random, Ica };

std::string_view rotation_kind_name(RotationKind kind);
/// Parses "pca" | "random" | "rnd" | "ica". Unknown names are a config error.
RotationKind parse_rotation_kind(std::string_view name);

/// Orthonormal d x d matrix with det +1. Rows are the new axes: y = R x.
class OrthonormalRotation {
public:
    static OrthonormalRotation identity(std::size_t d);

    /// Validates RᵀR = I (1e-10) and det R = +1 (1e-8); throws ErrorCode::Corrupt otherwise.
    static OrthonormalRotation from_matrix(Matrix m, RotationKind provenance, std::optional<std::uint64_t> seed);

    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    const Matrix& matrix() const { return matrix_; }
    RotationKind provenance() const { return provenance_; }
    std::optional<std::uint64_t> seed() const { return seed_; }

    /// out = R * in for one row. Fixed summation order, so batch and single-row
    /// results are bitwise equal.
    void apply_row(const double* in, double* out) const;
    /// out = Rᵀ * in for one row.
    void apply_transpose_row(const double* in, double* out) const;

    Matrix apply(const Matrix& x) const;
    Matrix apply_transpose(const Matrix& x) const;
    OrthonormalRotation transpose() const;

private:
    OrthonormalRotation(Matrix m, RotationKind provenance, std::optional<std::uint64_t> seed)
        : matrix_(std::move(m)), provenance_(provenance), seed_(seed) {}

    Matrix matrix_;
    RotationKind provenance_ = RotationKind::Pca;
    std::optional<std::uint64_t> seed_;
};

/// Rows are covariance eigenvectors in descending eigenvalue order. A ridge of
/// 1e-10 * trace / d is added before decomposition; rank deficiency triggers a
/// warning. Needs n > d.
OrthonormalRotation pca_rotation(const Matrix& data);

/// Haar-distributed rotation: QR of an i.i.d. Gaussian matrix with the
/// positive-diagonal sign convention, then a column flip to force det = +1.
OrthonormalRotation random_rotation(std::size_t d, std::uint64_t seed);

/// Provider entry point used by the flow. RotationKind::Ica is reserved and
/// rejected with a config error.
OrthonormalRotation make_rotation(RotationKind kind, const Matrix& data, std::uint64_t seed);

/// Largest |(RᵀR - I)_ij|.
double orthonormality_error(const Matrix& r);

}  // namespace rbig
