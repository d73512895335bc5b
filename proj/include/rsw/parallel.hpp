#ifndef RSW_PARALLEL_HPP
#define RSW_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace rsw {

/// Trajectories per work block. Block boundaries depend only on the item
/// count, never on the worker count, so block-wise reductions are reproducible.
inline constexpr std::size_t kBlockSize = 256;

/// Worker count from RSW_WORKERS, else hardware concurrency.
unsigned default_workers();

/// Evaluates fn(begin, end) for each block of [0, n) on up to `workers`
/// threads and returns the per-block results in block order. If several
/// blocks throw, the exception of the lowest block index is rethrown.
template <typename Fn>
auto map_blocks(std::size_t n, unsigned workers, Fn&& fn, std::size_t block_size = kBlockSize)
    -> std::vector<decltype(fn(std::size_t{}, std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}, std::size_t{}));
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  std::vector<std::optional<Result>> slots(n_blocks);
  std::vector<std::exception_ptr> errors(n_blocks);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t b = next++; b < n_blocks; b = next++) {
      const std::size_t begin = b * block_size;
      const std::size_t end = std::min(n, begin + block_size);
      try {
        slots[b].emplace(fn(begin, end));
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(1, n_blocks)));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<Result> out;
  out.reserve(n_blocks);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace rsw

#endif  // RSW_PARALLEL_HPP
