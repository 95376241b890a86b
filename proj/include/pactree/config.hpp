// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pactree {

// Tuning parameters shared by every tree produced through one ops object.
// kappa and grain of zero mean "derive from block" (8B and 4B).
struct Config {
  double alpha = 0.29;
  std::size_t block = 128;
  std::size_t kappa = 0;
  std::size_t grain = 0;

  std::size_t base_case() const { return kappa ? kappa : 8 * block; }
  std::size_t granularity() const { return grain ? grain : 4 * block; }
};

inline void validate(const Config& c) {
  const double alpha_max = 1.0 - 1.0 / std::sqrt(2.0);
  if (!(c.alpha > 0.0) || c.alpha > alpha_max + 1e-12)
    throw std::invalid_argument("alpha must lie in (0, 1 - 1/sqrt(2)], got " +
                                std::to_string(c.alpha));
  if (c.block < 1) throw std::invalid_argument("block size must be >= 1");
  if (c.block > (std::size_t{1} << 28))
    throw std::invalid_argument("block size too large");
  if (c.base_case() < 2 * c.block)
    throw std::invalid_argument("kappa must be >= 2 * block");
}

}  // namespace pactree
