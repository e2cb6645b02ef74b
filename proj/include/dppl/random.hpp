#pragma once

#include <cstdint>
#include <span>

namespace dppl {

// Splittable deterministic pseudo-random stream built on the splitmix64
// finalizer. Identical keys produce bit-identical streams, and split()
// derives statistically independent child streams; both properties are load
// bearing for replaying HMC momenta during the backward pass.
class RandomKey {
public:
  RandomKey() : RandomKey(0) {}
  explicit RandomKey(std::uint64_t seed) : state_(mix(seed + kGamma)) {}

  // Independent child stream; does not disturb this key's own sequence.
  RandomKey split(std::uint64_t stream) const {
    RandomKey k;
    k.state_ = mix(state_ ^ mix((stream + 1) * kGamma2));
    return k;
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform on the open interval (0, 1).
  double uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double low, double high) { return low + (high - low) * uniform(); }

  // Standard normal via Box-Muller; consumes two uniforms per draw so the
  // stream position is a pure function of the draw count.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  void fill_normal(std::span<double> out);

  std::uint64_t state() const { return state_; }
  bool operator==(const RandomKey& o) const { return state_ == o.state_; }

private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kGamma2 = 0xBF58476D1CE4E5B9ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace dppl
