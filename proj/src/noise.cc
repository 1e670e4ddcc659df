#include "stackelq/noise.h"

#include <cmath>
#include <numbers>

namespace stackelq {
namespace {

// splitmix64 finalizer.
std::uint64_t Mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform on (0, 1], 53 bits.
double ToUnit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double StandardNormal(std::uint64_t seed, NoiseStream stream,
                      std::uint64_t path, std::uint64_t index) {
  std::uint64_t key = Mix(seed);
  key = Mix(key ^ static_cast<std::uint64_t>(stream));
  key = Mix(key ^ path);
  key = Mix(key ^ index);
  const double u1 = ToUnit(Mix(key));
  const double u2 = ToUnit(Mix(key ^ 0xd1b54a32d192ed03ULL));
  // Box-Muller, cosine branch.
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace stackelq
