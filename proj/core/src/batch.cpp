#include "sieve/batch.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace sieve::batch {

void parallel_for(int n, int max_parallel, const std::function<void(int)>& fn) {
  if (max_parallel < 1) throw std::invalid_argument("parallel_for: max_parallel must be at least 1");
  if (n <= 0) return;

  const int workers = std::min(max_parallel, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;  // stop picking up new work after a failure
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<BatchOutcome> execute_batch(backend::Backend& backend,
                                        const std::vector<Conversation>& requests,
                                        int max_parallel) {
  std::vector<BatchOutcome> results(requests.size());
  parallel_for(static_cast<int>(requests.size()), max_parallel, [&](int i) {
    auto& slot = results[static_cast<std::size_t>(i)];
    try {
      slot.completion = backend.complete(requests[static_cast<std::size_t>(i)]);
    } catch (const backend::BackendError& e) {
      slot.error = e.what();
      slot.error_kind = e.kind;
    } catch (const std::exception& e) {
      slot.error = e.what();
      slot.error_kind = backend::ErrorKind::fatal;
    }
  });
  return results;
}

}  // namespace sieve::batch
