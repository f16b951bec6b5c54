// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace consnet {

/// Worker count: CONSNET_THREADS when set (min 1), hardware concurrency
/// otherwise.
int worker_count();

/// Runs fn(0..n-1) across workers and joins. Items must be independent;
/// callers keep output deterministic by writing to index-addressed slots.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace consnet
