// Seeded random streams.
//
// Every stochastic routine takes an explicit RngStream. Independent streams
// are derived from (master seed, tag, index) so that Monte Carlo trials can
// run in parallel yet produce results independent of the thread count: trial
// t always draws from stream (seed, tag, t), never from a shared engine.

#pragma once

#include <cstdint>
#include <random>

namespace qdl {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream tags; arbitrary distinct constants mixed into derived seeds.
namespace stream_tag {
inline constexpr std::uint64_t kCodebook = 0x01;
inline constexpr std::uint64_t kLockingSet = 0x02;
inline constexpr std::uint64_t kTrial = 0x03;
inline constexpr std::uint64_t kMinimizer = 0x04;
inline constexpr std::uint64_t kEve = 0x05;
inline constexpr std::uint64_t kPhi = 0x06;
}  // namespace stream_tag

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : base_(seed), engine_(splitmix64(splitmix64(seed))) {}

  static RngStream derive(std::uint64_t seed, std::uint64_t tag,
                          std::uint64_t index = 0) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(tag * 0x9e3779b97f4a7c15ULL));
    s = splitmix64(s ^ splitmix64(index + 0x2545f4914f6cdd1dULL));
    return RngStream(s);
  }

  RngStream child(std::uint64_t tag, std::uint64_t index = 0) const {
    return derive(base_, tag, index);
  }

  std::uint64_t base_seed() const { return base_; }

  double uniform() { return unif_(engine_); }

  double gaussian() { return gauss_(engine_); }

  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t base_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace qdl
