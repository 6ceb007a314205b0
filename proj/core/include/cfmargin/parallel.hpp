#pragma once

#include <functional>
#include <vector>

namespace cfmargin {

/// Worker count from a request; <= 0 picks the hardware concurrency.
int resolve_workers(int requested);

/// Runs fn(i) for every i in [0, n). Work items must be independent; each
/// writes only state owned by its index, so the overall result is identical
/// for any worker count and any scheduling order. The first exception thrown
/// by an item is rethrown after all workers stop picking up new work.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

/// parallel_for that collects fn(i) into slot i of the returned vector.
template <typename T, typename Fn>
std::vector<T> parallel_map(int n, int workers, Fn&& fn) {
  std::vector<T> out(static_cast<std::size_t>(n > 0 ? n : 0));
  parallel_for(n, workers, [&](int i) { out[static_cast<std::size_t>(i)] = fn(i); });
  return out;
}

}  // namespace cfmargin
