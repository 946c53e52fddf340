#include <benchmark/benchmark.h>

#include <optional>
#include <string>
#include <vector>

#include "sieve/rng.hpp"
#include "sieve/select.hpp"

namespace {

using namespace sieve;

// A realistic pool: n candidates, 50 attempts each, scores spread by a
// seeded stream, ~12 distinct answers.
struct Pool {
  std::vector<select::CandidateScore> scores;
  std::vector<std::optional<std::string>> answers;
};

Pool make_pool(int n) {
  Pool pool;
  rng::Stream stream(rng::mix({7, static_cast<std::uint64_t>(n)}));
  for (int i = 0; i < n; ++i) {
    double rate = stream.next_double();
    std::vector<select::VerificationAttempt> attempts(50);
    for (int a = 0; a < 50; ++a) {
      attempts[a].attempt_index = a;
      attempts[a].verdict = stream.next_double() < rate ? select::Verdict::correct
                                                        : select::Verdict::error_found;
    }
    pool.scores.push_back(select::average_score(i, attempts));
    pool.answers.emplace_back(std::to_string(stream.below(12)));
  }
  return pool;
}

void BM_AverageScore(benchmark::State& state) {
  std::vector<select::VerificationAttempt> attempts(50);
  for (int a = 0; a < 50; ++a) {
    attempts[a].attempt_index = a;
    attempts[a].verdict = a % 3 ? select::Verdict::correct : select::Verdict::error_found;
  }
  for (auto _ : state) benchmark::DoNotOptimize(select::average_score(0, attempts));
}
BENCHMARK(BM_AverageScore);

void BM_ComputeSBest(benchmark::State& state) {
  Pool pool = make_pool(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(select::compute_s_best(pool.scores, 0.05, 3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ComputeSBest)->Range(200, 20000)->Complexity();

void BM_SelectByVerification(benchmark::State& state) {
  Pool pool = make_pool(static_cast<int>(state.range(0)));
  select::SearchConfig config;
  select::MatchupProvider provider = [](int, int) {
    return std::vector<select::MatchupSample>{};
  };
  for (auto _ : state)
    benchmark::DoNotOptimize(
        select::select_by_verification(pool.scores, pool.answers, provider, config,
                                       /*run_tiebreak=*/false));
}
BENCHMARK(BM_SelectByVerification)->Range(200, 20000);

void BM_SelectByConsistency(benchmark::State& state) {
  Pool pool = make_pool(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(select::select_by_consistency(pool.answers));
}
BENCHMARK(BM_SelectByConsistency)->Range(200, 20000);

}  // namespace
