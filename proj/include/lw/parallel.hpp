#pragma once

#include <functional>

namespace lw {

// Runs fn(row_begin, row_end) over disjoint row bands. Each band owns its
// rows exclusively, so results are bit-identical to the sequential run for
// any thread count. threads <= 1 runs inline.
void parallel_rows(int height, int threads,
                   const std::function<void(int, int)>& fn);

// Resolves a requested thread count: 0 means "use LIQUIDWARP_THREADS env
// var, else 1".
int resolve_threads(int requested);

}  // namespace lw
