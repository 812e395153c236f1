#include "scflab/rng.hpp"

#include <cmath>

namespace scflab {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::string_view stream_name) {
  std::uint64_t mix = seed ^ fnv1a64(stream_name);
  state_ = splitmix64(mix);
  if (state_ == 0) state_ = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t Rng::next_u64() {
  // xorshift64*
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545f4914f6cdd1dULL;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

long Rng::uniform_int(long lo, long hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<long>(next_u64() % span);
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phase = 2.0 * M_PI * u2;
  cached_ = r * std::sin(phase);
  has_cached_ = true;
  return r * std::cos(phase);
}

Mat Rng::orthonormal(Index rows, Index cols) {
  if (cols > rows)
    throw std::invalid_argument("Rng::orthonormal: cols > rows");
  Mat m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = normal();
  for (Index c = 0; c < cols; ++c) {
    for (int attempt = 0;; ++attempt) {
      Vec v = m.col(c);
      for (Index j = 0; j < c; ++j) v -= m.col(j).dot(v) * m.col(j);
      // second pass keeps the columns orthonormal to machine precision
      for (Index j = 0; j < c; ++j) v -= m.col(j).dot(v) * m.col(j);
      const double nv = v.norm();
      if (nv > 1e-8) {
        m.col(c) = v / nv;
        break;
      }
      if (attempt > 64)
        throw NumericFailure("Rng::orthonormal: degenerate draw", nv);
      for (Index r = 0; r < rows; ++r) m(r, c) = normal();
    }
  }
  return m;
}

}  // namespace scflab
