#include "rotation.hpp"

#include "errors.hpp"
#include "random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rbig {

std::string_view rotation_kind_name(RotationKind kind) {
    switch (kind) {
        case RotationKind::Pca: return "pca";
        case RotationKind::Random: return "random";
        case RotationKind::Ica: return "ica";
    }
    return "unknown";
}

RotationKind parse_rotation_kind(std::string_view name) {
    if (name == "pca") return RotationKind::Pca;
    if (name == "random" || name == "rnd") return RotationKind::Random;
    if (name == "ica") return RotationKind::Ica;
    fail(ErrorCode::Config, "unknown rotation '" + std::string(name) + "' (expected pca or random)");
}

double orthonormality_error(const Matrix& r) {
    const Eigen::MatrixXd g = r.transpose() * r;
    return (g - Eigen::MatrixXd::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff();
}

OrthonormalRotation OrthonormalRotation::identity(std::size_t d) {
    return OrthonormalRotation(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)),
                               RotationKind::Pca, std::nullopt);
}

OrthonormalRotation OrthonormalRotation::from_matrix(Matrix m, RotationKind provenance,
                                                     std::optional<std::uint64_t> seed) {
    if (m.rows() != m.cols() || m.rows() == 0) fail(ErrorCode::Shape, "rotation must be a non-empty square matrix");
    if (!m.allFinite()) fail(ErrorCode::Corrupt, "rotation has non-finite entries");
    if (orthonormality_error(m) > 1e-10) fail(ErrorCode::Corrupt, "rotation is not orthonormal");
    if (std::fabs(Eigen::MatrixXd(m).determinant() - 1.0) > 1e-8) fail(ErrorCode::Corrupt, "rotation has det != +1");
    return OrthonormalRotation(std::move(m), provenance, seed);
}

void OrthonormalRotation::apply_row(const double* in, double* out) const {
    const Eigen::Index d = matrix_.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        const double* r = matrix_.data() + i * d;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) acc += r[j] * in[j];
        out[i] = acc;
    }
}

void OrthonormalRotation::apply_transpose_row(const double* in, double* out) const {
    const Eigen::Index d = matrix_.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) acc += matrix_(i, j) * in[i];
        out[j] = acc;
    }
}

Matrix OrthonormalRotation::apply(const Matrix& x) const {
    if (x.cols() != matrix_.rows()) fail(ErrorCode::Shape, "rotation: dimension mismatch");
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) apply_row(x.row(r).data(), out.row(r).data());
    return out;
}

Matrix OrthonormalRotation::apply_transpose(const Matrix& x) const {
    if (x.cols() != matrix_.rows()) fail(ErrorCode::Shape, "rotation: dimension mismatch");
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) apply_transpose_row(x.row(r).data(), out.row(r).data());
    return out;
}

OrthonormalRotation OrthonormalRotation::transpose() const {
    return OrthonormalRotation(matrix_.transpose(), provenance_, seed_);
}

OrthonormalRotation pca_rotation(const Matrix& data) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (d == 0) fail(ErrorCode::Shape, "pca: zero-dimensional data");
    if (n <= d) fail(ErrorCode::InsufficientData, "pca: needs more rows than dimensions");
    if (!data.allFinite()) fail(ErrorCode::Domain, "pca: non-finite data");

    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    const double trace = cov.trace();
    const double ridge = 1e-10 * trace / static_cast<double>(d);
    cov.diagonal().array() += ridge;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
    const Eigen::MatrixXd& vectors = eig.eigenvectors();

    if (values.minCoeff() <= 10.0 * ridge) {
        std::ostringstream os;
        os << "pca: covariance is rank deficient (smallest eigenvalue " << values.minCoeff()
           << "); using the ridge-regularized eigenvectors";
        warn(os.str());
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });

    Matrix r(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        Eigen::VectorXd v = vectors.col(order[static_cast<std::size_t>(k)]);
        Eigen::Index arg;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        r.row(k) = v.transpose();
    }
    if (Eigen::MatrixXd(r).determinant() < 0) r.row(d - 1) *= -1.0;
    return OrthonormalRotation::from_matrix(std::move(r), RotationKind::Pca, std::nullopt);
}

OrthonormalRotation random_rotation(std::size_t d, std::uint64_t seed) {
    if (d == 0) fail(ErrorCode::Shape, "random rotation: zero dimension");
    const auto dd = static_cast<Eigen::Index>(d);
    Rng rng(seed);
    StandardNormal normal;
    Eigen::MatrixXd a(dd, dd);
    for (Eigen::Index i = 0; i < dd; ++i)
        for (Eigen::Index j = 0; j < dd; ++j) a(i, j) = normal(rng);

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dd, dd);
    const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dd; ++j)
        if (rr(j, j) < 0) q.col(j) *= -1.0;
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return OrthonormalRotation::from_matrix(Matrix(q), RotationKind::Random, seed);
}

OrthonormalRotation make_rotation(RotationKind kind, const Matrix& data, std::uint64_t seed) {
    switch (kind) {
        case RotationKind::Pca: return pca_rotation(data);
        case RotationKind::Random: return random_rotation(static_cast<std::size_t>(data.cols()), seed);
        case RotationKind::Ica: break;
    }
    fail(ErrorCode::Config,
         "rotation 'ica' is a reserved provider slot and is not implemented; use 'pca' or 'random'");
}

}  // namespace rbig
