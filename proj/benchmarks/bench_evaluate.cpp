#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "sieve/evaluate.hpp"
#include "sieve/rng.hpp"
#include "sieve/run_store.hpp"
#include "sieve/synth.hpp"

namespace {

using namespace sieve;

run_store::Run fixture_run() {
  synth::SynthConfig config;
  config.search.k_inf = 200;
  config.search.k_verif = 50;
  for (int i = 1; i <= 10; ++i) {
    synth::SynthQuestion q;
    q.id = "b-" + std::to_string(i);
    q.correct_answer = "42";
    q.p_correct = 0.3;
    q.wrong_answers.push_back({"7", 2.0, std::nullopt});
    q.wrong_answers.push_back({"13", 1.0, std::nullopt});
    config.questions.push_back(q);
  }
  return synth::generate_synthetic_run(config, 5);
}

void BM_PassAtK(benchmark::State& state) {
  for (auto _ : state)
    for (int k = 1; k <= 200; ++k) benchmark::DoNotOptimize(evaluate::pass_at_k(200, 17, k));
}
BENCHMARK(BM_PassAtK);

void BM_Subsample(benchmark::State& state) {
  static const run_store::Run run = fixture_run();
  const run_store::QuestionRun& question = run.question("b-1");
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(evaluate::subsample(question, 50, 10, ++seed));
}
BENCHMARK(BM_Subsample);

void BM_VerificationCurveCell(benchmark::State& state) {
  static const run_store::Run run = fixture_run();
  evaluate::GradeLookup grades = evaluate::grades_from_run(run);
  evaluate::CurveOptions options;
  options.k_inf_grid = {50};
  options.k_verif_grid = {10};
  options.seeds = {1};
  for (auto _ : state)
    benchmark::DoNotOptimize(evaluate::verification_curve(run, grades, options));
}
BENCHMARK(BM_VerificationCurveCell);

void BM_SpearmanTrend(benchmark::State& state) {
  rng::Stream stream(11);
  std::vector<double> xs, ys;
  for (int i = 0; i < 100; ++i) {
    xs.push_back(i % 5);
    ys.push_back(i % 5 + stream.next_double());
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(evaluate::spearman_trend_pvalue(xs, ys, 999, 3));
}
BENCHMARK(BM_SpearmanTrend);

}  // namespace
