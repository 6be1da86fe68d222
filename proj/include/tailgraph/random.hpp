#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace tailgraph {

// Philox4x32-10 counter-based generator.  A stream is fully determined by
// (seed, stream id, substream); draw k of the stream is the k-th output word of
// block k/4, so state advance is a pure function of the counter and any row of
// a simulation can be regenerated in isolation.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * counter[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * counter[2];
      counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0],
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1],
                 static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return counter;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

double normal_quantile(double p);

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        substream_(substream) {}

  std::uint64_t next_u64() {
    if (cursor_ == 2) refill();
    return words_[cursor_++];
  }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_quantile(uniform()); }
  double exponential() { return -std::log(uniform()); }

 private:
  void refill() {
    Philox4x32::Block counter{static_cast<std::uint32_t>(block_),
                              static_cast<std::uint32_t>(block_ >> 32) ^ substream_,
                              static_cast<std::uint32_t>(stream_),
                              static_cast<std::uint32_t>(stream_ >> 32)};
    auto out = Philox4x32::generate(counter, key_);
    words_[0] = (std::uint64_t{out[0]} << 32) | out[1];
    words_[1] = (std::uint64_t{out[2]} << 32) | out[3];
    ++block_;
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint32_t substream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> words_{};
  int cursor_ = 2;
};

// Mixes a seed with a small tag so that independent sampling stages of one run
// (e.g. one per t-level) draw from unrelated key schedules.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace tailgraph
