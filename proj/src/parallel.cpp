// SPDX-License-Identifier: Apache-2.0
#include "pactree/parallel.hpp"

#include <memory>
#include <mutex>

#include <tbb/global_control.h>
#include <tbb/info.h>

namespace pactree {

namespace {
std::mutex g_mu;
std::unique_ptr<tbb::global_control> g_limit;
std::size_t g_threads = 0;
}  // namespace

void set_num_threads(std::size_t n) {
  std::lock_guard<std::mutex> lock(g_mu);
  g_limit.reset();
  g_threads = n;
  if (n > 0)
    g_limit = std::make_unique<tbb::global_control>(
        tbb::global_control::max_allowed_parallelism, n);
}

std::size_t num_threads() {
  std::lock_guard<std::mutex> lock(g_mu);
  if (g_threads) return g_threads;
  return static_cast<std::size_t>(tbb::info::default_concurrency());
}

}  // namespace pactree
