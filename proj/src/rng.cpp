// SPDX-License-Identifier: Apache-2.0
#include "flowlab/rng.hpp"

#include <cmath>

namespace flowlab {

std::uint64_t CounterRng::uniform_index(std::uint64_t n) {
  require(n > 0, "uniform_index: n must be positive");
  // Rejection on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

double CounterRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

Mat sample_standard_gaussian(const RngSpec& spec, Index d, Index count) {
  require(d > 0 && count > 0, "sample_standard_gaussian: dimensions must be positive");
  Mat out(d, count);
  for (Index j = 0; j < count; ++j) {
    CounterRng rng(substream(spec, static_cast<std::uint64_t>(j)));
    for (Index i = 0; i < d; ++i) out(i, j) = rng.normal();
  }
  return out;
}

}  // namespace flowlab
