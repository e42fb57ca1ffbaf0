#pragma once

#include <cstdint>
#include <random>

namespace mfd {

/// Reproducible random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard leaves those algorithms to the vendor:
///   - uniform01: top 53 bits of one engine draw, scaled by 2^-53
///   - normal:    Box-Muller on two uniform01 draws, both outputs used
///   - below(n):  rejection sampling on the largest multiple of n
/// Streams are derived with SplitMix64(seed ^ stream-tag mix), so two streams
/// of one root seed never share an engine state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream tags used across the library; each consumer of randomness has its
/// own so adding draws in one place never perturbs another.
namespace stream {
inline constexpr std::uint64_t kClassMeans = 0x6d65616e73ULL;
inline constexpr std::uint64_t kTrainSamples = 0x747261696eULL;
inline constexpr std::uint64_t kTestSamples = 0x74657374ULL;
inline constexpr std::uint64_t kInit = 0x696e6974ULL;
inline constexpr std::uint64_t kSampler = 0x73616d70ULL;
inline constexpr std::uint64_t kVerify = 0x766572ULL;
}  // namespace stream

}  // namespace mfd
