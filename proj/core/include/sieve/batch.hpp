#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sieve/backend.hpp"

// Bounded-parallel execution. parallel_for drives any indexed workload with
// at most `max_parallel` workers; execute_batch specializes it for backend
// calls with per-slot error isolation.

namespace sieve::batch {

// Runs fn(0..n-1) across at most max_parallel worker threads. Blocks until
// all items finish. An exception escaping fn stops new work and is rethrown
// (first one wins); item workloads that need isolation must catch their own.
void parallel_for(int n, int max_parallel, const std::function<void(int)>& fn);

struct BatchOutcome {
  std::optional<backend::Completion> completion;
  std::string error;  // empty on success
  backend::ErrorKind error_kind = backend::ErrorKind::fatal;

  bool ok() const { return completion.has_value(); }
};

// Completes every conversation with at most max_parallel requests in flight.
// Results are in input order; a failing request records its error in its own
// slot and never disturbs the others.
std::vector<BatchOutcome> execute_batch(backend::Backend& backend,
                                        const std::vector<Conversation>& requests,
                                        int max_parallel);

}  // namespace sieve::batch
