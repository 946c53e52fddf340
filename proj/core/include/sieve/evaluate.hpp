#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sieve/run_store.hpp"

// Evaluation harness.
//
// Works entirely on persisted (or synthetic in-memory) runs: seeded
// subsampling of responses and verification attempts, accuracy curves for
// the verification-selection and consistency baselines across a grid of
// budgets, the ambiguous-question filter, pass@k, the error-threshold
// ablation, query cost estimates, and a permutation test for monotone
// scaling trends. Everything is deterministic given the same run and seeds;
// table writers format numbers with fixed precision so reruns are
// byte-identical.

namespace sieve::evaluate {

// Probability that at least one of k uniformly drawn (without replacement)
// responses out of n is one of the c correct ones. Exact, computed as a
// cancellation-safe product.
double pass_at_k(long n, long c, long k);

// ---------------------------------------------------------------------------
// Subsampling

// A simulated smaller run: k_inf responses drawn from the question's pool,
// and for each drawn response k_verif of its full verification attempts.
// Positions are draw order; values are original indices.
struct SubsampleView {
  std::vector<int> response_indices;
  std::vector<std::vector<int>> verification_indices;  // aligned with response_indices
};

// Draw streams are derived from (seed, question id) for responses and
// (seed, question id, original response index) for attempts, so growing
// k_inf extends a draw without reshuffling it and every response keeps its
// attempt draw regardless of which responses were drawn alongside it.
// Throws when the run holds fewer responses or attempts than requested,
// naming the deficit.
SubsampleView subsample(const run_store::QuestionRun& question, int k_inf, int k_verif,
                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Grades

// True when the response is graded correct. Implementations throw when no
// grade is recorded for the response.
using GradeLookup = std::function<bool(const std::string& question_id, int response_index)>;

// Lookup over the grade records of a loaded run. The run must outlive the
// returned function.
GradeLookup grades_from_run(const run_store::Run& run);

// ---------------------------------------------------------------------------
// Ambiguous-question filter

struct OmissionConfig {
  // Questions whose response pool is this one-sided get dropped: the
  // probability that `draw` without-replacement draws land all in one
  // correctness class must stay at or below p_same.
  double p_same = 0.95;
  int draw = 50;
  // Drop questions the consistency baseline already answers correctly on the
  // full pool.
  bool drop_consistency_correct = true;
};

// Probability that `draw` without-replacement draws from a pool of n
// responses, c of them correct, are all correct or all incorrect.
double prob_all_same(long n, long c, int draw);

// Question ids (in run order) that remain interesting at subsample size k:
// the seeded k-draw must contain at least one correct response, the full
// pool must not already be solved by consistency voting (when enabled), and
// the pool must not be so one-sided that draws are foregone conclusions.
std::vector<std::string> ambiguous_subset(const run_store::Run& run, const GradeLookup& grades,
                                          int k, std::uint64_t seed,
                                          const OmissionConfig& omission);

// ---------------------------------------------------------------------------
// Scaling curves

struct ScalingCell {
  std::string metric;  // "verification" or "consistency"
  int k_inf = 0;
  int k_verif = 0;  // 0 for consistency cells
  std::uint64_t seed = 0;
  int n_questions = 0;
  int n_correct = 0;
  double accuracy = 0.0;
};

struct CurveOptions {
  std::vector<int> k_inf_grid;
  std::vector<int> k_verif_grid;  // ignored by the consistency curve
  std::vector<std::uint64_t> seeds;
  bool ambiguous_only = false;
  OmissionConfig omission;
};

// Accuracy of verification selection (best average, no tie-break) on every
// (k_inf, k_verif, seed) cell of the grid.
std::vector<ScalingCell> verification_curve(const run_store::Run& run,
                                            const GradeLookup& grades,
                                            const CurveOptions& options);

// Accuracy of plurality voting on every (k_inf, seed) cell. A question where
// no drawn response has a parseable answer counts as incorrect.
std::vector<ScalingCell> consistency_curve(const run_store::Run& run,
                                           const GradeLookup& grades,
                                           const CurveOptions& options);

// ---------------------------------------------------------------------------
// Error-threshold ablation

// Rates for classifying a solution as incorrect when more than `threshold`
// of its verification attempts flag an error. Inputs are per-solution
// error-flag counts, split by ground truth.
struct AblationReport {
  int threshold = 0;  // equal-error threshold: minimizes |fpr - fnr|, ties low
  double fpr = 0.0;   // correct solutions flagged at the chosen threshold
  double fnr = 0.0;   // incorrect solutions passed at the chosen threshold
  std::vector<double> fpr_by_threshold;  // indexed by threshold 0..attempts
  std::vector<double> fnr_by_threshold;
};

AblationReport ablation_rates(const std::vector<int>& correct_counts,
                              const std::vector<int>& incorrect_counts, int attempts);

// ---------------------------------------------------------------------------
// Cost model

struct CostAssumptions {
  long tokens_per_attempt = 13000;
  double price_per_million_tokens = 5.0;
  double cost_reduction = 0.0;  // fraction shaved off, e.g. 0.7 for 70%
};

struct CostEstimate {
  long long total_tokens = 0;
  double dollars = 0.0;
};

// Verification cost of one question: k_inf * k_verif attempts, a flat token
// budget per attempt, linear pricing per million tokens.
CostEstimate estimate_cost(int k_inf, int k_verif, const CostAssumptions& assumptions);

// ---------------------------------------------------------------------------
// Trend statistics

// Spearman rank correlation with average ranks for ties; 0 when either side
// is constant.
double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys);

// One-sided permutation p-value for rho > 0, from `permutations` seeded
// shuffles of ys; includes the identity, so the smallest possible value is
// 1 / (permutations + 1).
double spearman_trend_pvalue(const std::vector<double>& xs, const std::vector<double>& ys,
                             int permutations, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Table writers

// One TSV row per cell, sorted by (metric, k_verif, k_inf, seed); accuracy
// printed with six decimals.
std::string cells_to_table(const std::vector<ScalingCell>& cells);

// Seed-averaged accuracy grid for one metric: columns are k_inf, rows are
// k_verif. Combinations absent from `cells` print "-".
std::string cells_to_matrix(const std::vector<ScalingCell>& cells, const std::string& metric);

}  // namespace sieve::evaluate
