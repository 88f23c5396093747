#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rbig {

using Rng = std::mt19937_64;

// Every consumer of randomness draws from its own named sub-stream of the
// user seed, so adding a consumer never perturbs the others.
namespace stream {
inline constexpr std::string_view rotation = "rotation";
inline constexpr std::string_view sampling = "sampling";
inline constexpr std::string_view calibration = "calibration";
inline constexpr std::string_view subsample = "subsample";
inline constexpr std::string_view posterior = "posterior";
}  // namespace stream

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
    return Rng(derive_seed(seed, stream, index));
}

// Box-Muller over the raw engine output. std::normal_distribution is not
// specified bit-for-bit across standard libraries; this is.
class StandardNormal {
public:
    double operator()(Rng& rng);

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

double uniform01(Rng& rng);

}  // namespace rbig
