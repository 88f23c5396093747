#include "errors.hpp"
#include "types.hpp"

#include <iostream>
#include <mutex>

namespace rbig {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Domain: return "domain";
        case ErrorCode::DegenerateMarginal: return "degenerate_marginal";
        case ErrorCode::InsufficientData: return "insufficient_data";
        case ErrorCode::Shape: return "shape";
        case ErrorCode::Config: return "config";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Io: return "io";
        case ErrorCode::Corrupt: return "corrupt";
        case ErrorCode::Version: return "version";
    }
    return "unknown";
}

namespace {

std::mutex g_warning_mutex;
std::function<void(std::string_view)> g_warning_handler = [](std::string_view msg) {
    std::cerr << "rbig: warning: " << msg << '\n';
};

}  // namespace

void set_warning_handler(std::function<void(std::string_view)> handler) {
    std::lock_guard lock(g_warning_mutex);
    g_warning_handler = std::move(handler);
}

void warn(std::string_view message) {
    std::lock_guard lock(g_warning_mutex);
    if (g_warning_handler) g_warning_handler(message);
}

}  // namespace rbig
