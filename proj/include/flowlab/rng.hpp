// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "flowlab/common.hpp"

namespace flowlab {

// Identifies a reproducible random stream.  The same (seed, stream_id) pair
// must yield the same draws on every run and for every worker count, so all
// samplers below are counter-based rather than stateful-engine based.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// SplitMix64 finalizer; full-period 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream for work item `item`.  Parallel kernels hand
// each item its own substream, which makes draws independent of scheduling.
inline RngSpec substream(const RngSpec& spec, std::uint64_t item) {
  return RngSpec{spec.seed, mix64(spec.stream_id ^ mix64(item))};
}

// Counter-based generator: draw k of stream (seed, stream_id) is a pure
// function of (seed, stream_id, k).  Box-Muller normals cache the second
// branch, so the normal sequence is still a pure function of the draw index.
class CounterRng {
 public:
  explicit CounterRng(const RngSpec& spec)
      : key_(mix64(spec.seed) ^ mix64(mix64(spec.stream_id))), counter_(0) {}

  std::uint64_t next_u64() { return mix64(key_ ^ (0x9e3779b97f4a7c15ull * ++counter_)); }

  // Uniform on the open interval (0, 1); never returns an exact endpoint.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// d x count matrix of standard normals; column j comes from substream j so the
// result is identical no matter how columns are distributed over workers.
Mat sample_standard_gaussian(const RngSpec& spec, Index d, Index count);

}  // namespace flowlab
