#pragma once

#include <cstdint>
#include <random>

namespace defcast {

/// Seedable, replayable random stream.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms are built from the top 53 bits of one engine output and
/// normals by Box-Muller, so draw sequences are identical across platforms
/// and standard libraries.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  /// Independent stream for (master seed, stream index), e.g. one per chain
  /// window or Monte Carlo run.
  static RandomSource derive(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1). Consumes one engine output.
  double uniform();

  /// Standard normal. Consumes two engine outputs.
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace defcast
