#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace nlsgibbs {

/// Worker count: NLSGIBBS_THREADS if set and positive, else hardware concurrency.
int thread_budget();
/// Overrides the budget for this process (0 restores the environment default).
void set_thread_budget(int n);

/// Runs body(i) for i in [0, n) on up to thread_budget() threads.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

/// Fixed-size chunks of [0, n); the partition depends only on n and `chunk`,
/// never on the thread count, so chunk-ordered reductions are bit-reproducible.
struct Chunk {
  std::int64_t begin;
  std::int64_t end;
};
std::vector<Chunk> chunks(std::int64_t n, std::int64_t chunk = 1024);

/// Evaluates map(chunk) in parallel and folds the results in chunk order.
template <class T, class Map, class Fold>
T chunked_reduce(std::int64_t n, T init, Map map, Fold fold, std::int64_t chunk = 1024) {
  const auto parts = chunks(n, chunk);
  std::vector<T> partial(parts.size(), init);
  parallel_for(static_cast<std::int64_t>(parts.size()),
               [&](std::int64_t c) { partial[c] = map(parts[c]); });
  T acc = init;
  for (auto& v : partial) acc = fold(acc, v);
  return acc;
}

}  // namespace nlsgibbs
