#pragma once

#include <array>
#include <cstdint>

namespace bellsim {

// Philox4x32-10 (Salmon et al., SC'11). Stateless bijection of a 128-bit
// counter under a 64-bit key.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

// Independent stream per (seed, stream id): the stream id fills the high
// counter words, draws advance the low words. Results depend only on
// (seed, stream, draw index), never on scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t next_u64();

 private:
  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
};

}  // namespace bellsim
