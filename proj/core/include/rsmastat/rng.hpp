#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace rsmastat {

/// Counter-based generator: output i of a stream with key k is
/// splitmix64(k + (i + 1) * golden). Streams are addressed by hashing a
/// 64-bit seed together with integer coordinates (sample index, user, ...),
/// so any sub-stream can be regenerated without touching the others.
class CounterRng {
public:
    static constexpr std::string_view kGeneratorName = "splitmix64-counter-v1";

    explicit CounterRng(std::uint64_t key) : key_(key) {}

    /// Stream for `seed` at the given coordinates.
    static CounterRng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

    std::uint64_t next_u64();
    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi].
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (pairs are cached).
    double normal();
    /// Circularly-symmetric complex Gaussian with unit total variance
    /// (real and imaginary parts each N(0, 1/2)).
    std::complex<double> complex_normal();

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic derivation of child seeds from a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

}  // namespace rsmastat
