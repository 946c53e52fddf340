#include <benchmark/benchmark.h>

#include <string>

#include "sieve/parse.hpp"

namespace {

std::string long_reply(const std::string& tail) {
  std::string body;
  for (int i = 0; i < 200; ++i)
    body += "Step " + std::to_string(i) + ": the bound holds by the triangle inequality.\n";
  return body + tail;
}

void BM_ParseVerdictEndorse(benchmark::State& state) {
  std::string reply = long_reply("Checked once more. No, final answer is correct.");
  for (auto _ : state) benchmark::DoNotOptimize(sieve::parse::parse_verdict(reply));
}
BENCHMARK(BM_ParseVerdictEndorse);

void BM_ParseVerdictFlag(benchmark::State& state) {
  std::string reply = long_reply("The substitution is invalid.\n\n**Yes**");
  for (auto _ : state) benchmark::DoNotOptimize(sieve::parse::parse_verdict(reply));
}
BENCHMARK(BM_ParseVerdictFlag);

void BM_ParseVerdictUnparseable(benchmark::State& state) {
  std::string reply = long_reply("The chain of reasoning trails off here.");
  for (auto _ : state) benchmark::DoNotOptimize(sieve::parse::parse_verdict(reply));
}
BENCHMARK(BM_ParseVerdictUnparseable);

void BM_ParseGradeBool(benchmark::State& state) {
  std::string reply = long_reply(
      "{\n\"answer_key_final_answer\": \"42\",\n"
      "\"student_final_answer\": \"42\",\n"
      "\"student_final_answer_is_correct\": true,\n}");
  for (auto _ : state) benchmark::DoNotOptimize(sieve::parse::parse_grade_bool(reply));
}
BENCHMARK(BM_ParseGradeBool);

void BM_ParseMatchupChoice(benchmark::State& state) {
  std::string reply = long_reply("```json\n{\"correct_solution\": 2}\n```");
  for (auto _ : state) benchmark::DoNotOptimize(sieve::parse::parse_matchup_choice(reply));
}
BENCHMARK(BM_ParseMatchupChoice);

}  // namespace

BENCHMARK_MAIN();
