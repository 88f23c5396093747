#pragma once

#include "flow.hpp"
#include "types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rbig {

struct Dataset {
    Matrix values;
    std::vector<std::string> columns;  ///< empty without a header
    std::size_t rejected_rows = 0;     ///< rows dropped for non-finite entries
};

/// Comma-separated numeric rows. Blank lines are skipped; rows holding NaN or
/// infinite cells are dropped and counted. Ragged rows and unparsable cells are
/// parse errors carrying the 1-based line number.
Dataset load_csv(const std::string& path, bool has_header);
Dataset read_csv(std::istream& in, bool has_header);

/// Shortest round-trip formatting, one row per line.
void write_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& header = {});
void write_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& header = {});
std::string format_double(double v);

inline constexpr int kModelFormatVersion = 1;

struct OneClassParams {
    double nu = 0.0;
    double log_threshold = 0.0;
};

/// Model file: a magic/version line, a one-line JSON header, then a
/// little-endian binary payload whose FNV-1a 64 checksum is in the header.
void save_model(std::ostream& out, const RbigModel& model, const std::optional<OneClassParams>& one_class = {});
void save_model(const std::string& path, const RbigModel& model, const std::optional<OneClassParams>& one_class = {});

struct LoadedModel {
    RbigModel model;
    std::optional<OneClassParams> one_class;
};

LoadedModel load_model_file(std::istream& in);
LoadedModel load_model_file(const std::string& path);
RbigModel load_model(const std::string& path);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t hash = 0xcbf29ce484222325ULL);

}  // namespace rbig
