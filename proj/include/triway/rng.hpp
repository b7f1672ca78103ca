#pragma once

#include <cstdint>
#include <random>

namespace triway {

/// Independent random streams. Each (seed, stream, index) triple maps to its
/// own engine, so results never depend on the order streams are consumed in.
enum class Stream : std::uint32_t {
  noise_user1 = 1,
  noise_user2 = 2,
  noise_user3 = 3,
  messages = 10,
  encoders = 11,
  mutual_information = 20,
  pnc_symbols = 30,
  pnc_noise = 31,
  gain_ensemble = 40,
  perturbation = 50,
};

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace triway
