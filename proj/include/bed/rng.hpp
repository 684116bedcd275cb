#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bed {

/// Philox4x64-10 block function (Salmon et al., SC'11).
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// A stream of Philox output keyed by (seed, stream id); the counter runs
/// 0, 1, 2, ... Satisfies UniformRandomBitGenerator.
///
/// Draws are bit-exact per (seed, stream): uniform() takes the top 53 bits of
/// one word, normal() uses the Marsaglia polar method and keeps the second
/// variate, poisson() is inversion by sequential search.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent stream with the index XORed into the stream key.
  RngStream substream(std::uint64_t index) const;

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on [0, 1).
  double uniform();
  double normal();
  double normal(double mu, double sigma) { return mu + sigma * normal(); }
  /// Requires 0 ≤ λ ≤ 30.
  long poisson(double lambda);

 private:
  Philox4x64::Key key_;
  std::uint64_t counter_ = 0;
  Philox4x64::Counter buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bed
