#pragma once

#include <functional>

namespace zeropi {

// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is handled once;
// results must be written to per-index slots. The first exception is rethrown.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

int default_workers();

}  // namespace zeropi
