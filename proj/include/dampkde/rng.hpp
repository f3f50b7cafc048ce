#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace dampkde {

using Rng = std::mt19937_64;

//! One step of the splitmix64 finalizer.
constexpr std::uint64_t
splitmix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Seed of replication `index` in an ensemble rooted at `seed_base`:
//! splitmix64(seed_base XOR splitmix64(index)). Distinct indices give
//! decorrelated Mersenne-Twister streams; the map is fixed forever since
//! manifests rely on it.
constexpr std::uint64_t
derive_seed(std::uint64_t seed_base, std::uint64_t index)
{
  return splitmix64(seed_base ^ splitmix64(index));
}

//! Number of workers to use when the caller passes 0.
unsigned default_threads();

//! Runs `body(i)` for i in [0, n) on up to `threads` workers. Work items are
//! handed out dynamically; callers write results into slot i so the output
//! order never depends on scheduling. The first exception thrown by any
//! worker is rethrown after all workers stop.
void parallel_for(std::size_t n,
                  unsigned threads,
                  const std::function<void(std::size_t)>& body);

} // namespace dampkde
