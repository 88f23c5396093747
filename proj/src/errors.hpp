#pragma once

#include <stdexcept>
#include <string>

namespace rbig {

enum class ErrorCode {
    Domain = 1,
    DegenerateMarginal,
    InsufficientData,
    Shape,
    Config,
    Parse,
    Io,
    Corrupt,
    Version,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rbig
