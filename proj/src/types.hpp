#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <string_view>

namespace rbig {

// Samples are rows, dimensions are columns. Row-major so a single row is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Receives non-fatal diagnostics (rank-deficient covariance, underflow fallbacks).
// Defaults to stderr; pass an empty function to silence.
void set_warning_handler(std::function<void(std::string_view)> handler);
void warn(std::string_view message);

}  // namespace rbig
