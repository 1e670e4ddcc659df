#pragma once

#include <cstdint>

namespace stackelq {

// Counter-based normal variates: each draw is a pure function of
// (seed, stream, path, index), so any partition of paths across workers
// sees the same numbers.
enum class NoiseStream : std::uint64_t {
  kBrownian = 0,
  kPerturbation = 1,
};

double StandardNormal(std::uint64_t seed, NoiseStream stream,
                      std::uint64_t path, std::uint64_t index);

}  // namespace stackelq
