#pragma once

#include <cstdint>
#include <random>

namespace fieldscope {

/// Deterministic random source. Equal seeds give equal draw sequences on
/// every platform; all randomness in the toolkit flows through handles
/// derived from one root seed, never from ambient entropy.
///
/// std::mt19937_64 raw output is fully specified by the standard, and the
/// uniform/normal transforms below are implemented here rather than with
/// std::*_distribution (whose sequences are implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform draw in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Gaussian draw via Box-Muller. Two uniforms are consumed per call so
    /// the stream position is a pure function of the call count.
    double normal(double mean, double stddev);

    /// Independent child stream. Depends only on the handle's seed and the
    /// stream id, not on how much of the parent stream has been consumed,
    /// so per-agent children can be created in any order (or in parallel).
    Rng child(std::uint64_t stream) const;

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace fieldscope
