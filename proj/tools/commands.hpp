#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Command implementations behind the `sieve` CLI. Each returns a process
// exit code: 0 on success, 1 on error, 3 when a configured append limit
// halted the run mid-flight.

namespace sieve::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitHalted = 3;

struct CommonRunOptions {
  std::string run_dir;
  std::string backend_file;
  std::string templates_dir;
  int parallel = 1;
  std::optional<std::uint64_t> halt_after;  // throw after this many appends
};

struct GenerateOptions : CommonRunOptions {
  std::string questions_file;  // JSONL, one question per line
  std::string config_file;     // search config JSON; defaults when empty
  std::uint64_t seed = 0;
  bool no_extract_backend = false;  // boxed extraction only
};

struct VerifyOptions : CommonRunOptions {
  bool rewrite = false;  // append the rewrite tail to each verification chain
};

struct SelectOptions : CommonRunOptions {
  std::string method = "verification";  // or "consistency"
};

struct GradeOptions : CommonRunOptions {
  std::string mode = "exact";  // or "lm"
};

struct CurveFlags {
  std::string metric = "both";  // "verification", "consistency", or "both"
  std::vector<int> k_inf_grid;
  std::vector<int> k_verif_grid;
  std::vector<std::uint64_t> seeds = {1};
  bool ambiguous = false;
  double p_same = 0.95;
  int draw = 50;
  bool keep_consistency_correct = false;
  std::string table_file;   // empty writes to stdout
  std::string matrix_file;  // empty skips the matrix
};

struct ScaleOptions {
  std::string run_dir;
  CurveFlags curve;
};

struct SimulateOptions {
  std::string config_file;
  std::uint64_t seed = 0;
  std::string emit_run_dir;  // persist the drawn run here when set
  CurveFlags curve;          // curves run only when k_inf_grid is non-empty
  bool trend = false;
  int permutations = 10000;
  std::uint64_t trend_seed = 0;
};

struct BenchOptions {
  std::string entries_file;  // JSONL of comparison or scoring rows
  std::string backend_file;
  std::string templates_dir;
  std::string out_file;  // empty writes to stdout
};

struct CostOptions {
  int k_inf = 200;
  int k_verif = 50;
  long tokens_per_attempt = 13000;
  double price_per_million = 5.0;
  double reduction = 0.0;
};

int cmd_generate(const GenerateOptions& options);
int cmd_verify(const VerifyOptions& options);
int cmd_select(const SelectOptions& options);
int cmd_grade(const GradeOptions& options);
int cmd_scale(const ScaleOptions& options);
int cmd_simulate(const SimulateOptions& options);
int cmd_bench(const BenchOptions& options);
int cmd_cost(const CostOptions& options);

}  // namespace sieve::cli
