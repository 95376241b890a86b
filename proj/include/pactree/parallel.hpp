// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <utility>

#include <tbb/parallel_invoke.h>

#include "pactree/export.h"

namespace pactree {

// Runs f and g, in parallel when `fork` is set. Exceptions propagate.
template <class F, class G>
void par_do(bool fork, F&& f, G&& g) {
  if (fork) {
    tbb::parallel_invoke(std::forward<F>(f), std::forward<G>(g));
  } else {
    f();
    g();
  }
}

// Caps the worker count used by all subsequent bulk operations in this
// process. 0 restores the default (hardware concurrency).
PACTREE_API void set_num_threads(std::size_t n);
PACTREE_API std::size_t num_threads();

}  // namespace pactree
