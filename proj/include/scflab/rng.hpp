#pragma once

#include "scflab/core.hpp"

#include <cstdint>
#include <string_view>

namespace scflab {

// FNV-1a over raw bytes; also used for trace fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view s);

// Named xorshift64* stream. Sub-streams are split off a single run seed via
// splitmix64 over seed ^ fnv1a(name), so every stochastic consumer draws
// from its own reproducible sequence.
class Rng {
public:
  Rng(std::uint64_t seed, std::string_view stream_name);

  std::uint64_t next_u64();
  // uniform in [0, 1)
  double uniform();
  // integer in [lo, hi] inclusive
  long uniform_int(long lo, long hi);
  // standard normal (Box-Muller)
  double normal();
  // matrix with orthonormal columns, rows >= cols
  Mat orthonormal(Index rows, Index cols);

private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace scflab
