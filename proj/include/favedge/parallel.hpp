#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace favedge {

/// Thrown when a replica fails; carries the replica's stream index.
class ReplicaError : public std::runtime_error {
 public:
  ReplicaError(std::uint64_t master_seed, std::uint64_t stream,
               const std::string& what)
      : std::runtime_error("replica failed (seed " +
                           std::to_string(master_seed) + ", stream " +
                           std::to_string(stream) + "): " + what),
        stream_(stream) {}
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t stream_;
};

inline unsigned default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates fn(r) for r in [0, count) on up to `workers` threads and
/// returns the results in replica order, so any reduction over the result
/// is independent of the thread layout.
template <class Fn>
auto map_replicas(std::uint64_t master_seed, std::int64_t count,
                  unsigned workers, Fn&& fn)
    -> std::vector<decltype(fn(std::int64_t{}))> {
  using R = decltype(fn(std::int64_t{}));
  std::vector<R> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  if (count <= 0) return out;
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, count));

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::int64_t r = next.fetch_add(1);
      if (r >= count) return;
      try {
        out[static_cast<std::size_t>(r)] = fn(r);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::make_exception_ptr(
              ReplicaError(master_seed, static_cast<std::uint64_t>(r), e.what()));
        }
        next.store(count);
        return;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace favedge
