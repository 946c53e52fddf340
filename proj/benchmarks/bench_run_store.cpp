#include <benchmark/benchmark.h>

#include <chrono>
#include <filesystem>
#include <string>

#include "sieve/run_store.hpp"
#include "sieve/synth.hpp"

namespace {

using namespace sieve;
namespace fs = std::filesystem;

// One persisted run shared by all iterations; ~13k index lines.
const std::string& fixture_dir() {
  static const std::string dir = [] {
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    fs::path path = fs::temp_directory_path() / ("sieve-bench-run-" + std::to_string(stamp));
    synth::SynthConfig config;
    config.search.k_inf = 100;
    config.search.k_verif = 10;
    for (int i = 1; i <= 10; ++i) {
      synth::SynthQuestion q;
      q.id = "b-" + std::to_string(i);
      q.correct_answer = "42";
      q.p_correct = 0.3;
      q.wrong_answers.push_back({"7", 1.0, std::nullopt});
      config.questions.push_back(q);
    }
    synth::write_synthetic_run(config, 5, path.string());
    return path.string();
  }();
  return dir;
}

void BM_LoadRun(benchmark::State& state) {
  const std::string& dir = fixture_dir();
  for (auto _ : state) benchmark::DoNotOptimize(run_store::load_run(dir));
}
BENCHMARK(BM_LoadRun);

void BM_WriteRun(benchmark::State& state) {
  synth::SynthConfig config;
  config.search.k_inf = 50;
  config.search.k_verif = 5;
  synth::SynthQuestion q;
  q.id = "w";
  q.correct_answer = "42";
  q.p_correct = 0.3;
  q.wrong_answers.push_back({"7", 1.0, std::nullopt});
  config.questions.push_back(q);
  auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  fs::path base = fs::temp_directory_path() / ("sieve-bench-write-" + std::to_string(stamp));
  int iteration = 0;
  for (auto _ : state) {
    fs::path dir = base / std::to_string(iteration++);
    synth::write_synthetic_run(config, 5, dir.string());
  }
  std::error_code ec;
  fs::remove_all(base, ec);
}
BENCHMARK(BM_WriteRun);

void BM_Sha256Transcript(benchmark::State& state) {
  std::string content(16384, 'x');
  for (auto _ : state) benchmark::DoNotOptimize(run_store::sha256_hex(content));
}
BENCHMARK(BM_Sha256Transcript);

}  // namespace
