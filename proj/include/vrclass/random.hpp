#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace vrclass {

/// SplitMix64 finalizer; maps (seed, stream) to an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator with platform-independent draws.
///
/// The standard distributions are implementation-defined, so uniform, normal
/// and bounded-integer draws are derived here from the raw mt19937_64 stream.
/// Same seed, same sequence, on every conforming toolchain.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform();

    /// Standard normal via Box-Muller.
    double normal();

    /// Uniform integer in [0, bound). bound must be > 0.
    std::size_t below(std::size_t bound);

    /// Fisher-Yates shuffle of [0, n).
    std::vector<std::size_t> permutation(std::size_t n);

    /// m distinct indices from [0, n), returned in ascending order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m);

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace vrclass
