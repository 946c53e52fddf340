#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Candidate selection.
//
// A search run produces k_inf candidate solutions per question. Each
// candidate is scored by averaging the verdicts of repeated self-verification
// attempts; the best-scoring candidates within a fixed window are then, if
// they disagree on the final answer, sent through a round-robin tournament of
// pairwise comparisons. This header holds the scoring and selection rules;
// it knows nothing about prompts or backends, so every rule is testable with
// plain data.

namespace sieve::select {

// ---------------------------------------------------------------------------
// Configuration

struct SearchConfig {
  int k_inf = 200;            // candidate responses per question
  int k_verif = 50;           // full verification attempts per candidate
  int k_tie = 100;            // comparison samples per tie-break matchup
  double tie_window = 0.05;   // absolute score window below the best average
  int tie_cap = 3;            // at most this many candidates enter the tie-break
  double sigma_inf = 1.5;     // sampling temperature for candidate generation
  double sigma_verif = 1.0;   // sampling temperature for verification
  int max_output_tokens = 8192;

  // Optional cheap first pass that discards low-scoring candidates before
  // full verification.
  bool use_preliminary = false;
  int prelim_k = 10;
  double prelim_threshold = 0.2;
  int prelim_cap_per_answer = 15;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

SearchConfig search_config_from_json(std::string_view text);
std::string search_config_to_json(const SearchConfig& config);

// ---------------------------------------------------------------------------
// Verification attempts and scores

enum class Verdict {
  correct,      // the verifier endorsed the candidate's final answer
  error_found,  // the verifier flagged a fatal error
  unparseable,  // no verdict marker could be read from the reply
};

enum class Stage { preliminary, full };

struct VerificationAttempt {
  Verdict verdict = Verdict::unparseable;
  Stage stage = Stage::full;
  int attempt_index = 0;
  std::string transcript_ref;  // content hash of the stored transcript, may be empty
};

struct CandidateScore {
  int candidate_index = 0;
  double average = 0.0;  // fraction of parseable attempts that endorsed
  int n_parseable = 0;
  int n_attempts = 0;
  // True when no attempt produced a verdict. The average is pinned to 0 and
  // selection never prefers such a candidate over a non-degenerate one.
  bool degenerate = false;
};

// Average of parseable verdicts (correct = 1, error_found = 0); unparseable
// attempts are excluded from the denominator.
CandidateScore average_score(int candidate_index,
                             const std::vector<VerificationAttempt>& attempts);

// ---------------------------------------------------------------------------
// Tie-break tournament

enum class PresentedOrder { ab, ba };

enum class MatchupVerdict { a_wins, b_wins, unparseable };

// One pairwise comparison sample. Indices and the verdict are in original
// candidate terms regardless of the order the pair was presented in.
struct MatchupSample {
  int a_index = 0;  // always the lower candidate index
  int b_index = 0;
  PresentedOrder order = PresentedOrder::ab;
  MatchupVerdict verdict = MatchupVerdict::unparseable;
  int attempt_index = 0;
  std::string transcript_ref;
};

// Supplies the comparison samples for one unordered pair (a < b), typically
// by running k_tie model comparisons.
using MatchupProvider =
    std::function<std::vector<MatchupSample>(int a_index, int b_index)>;

struct PairCell {
  int a_index = 0;
  int b_index = 0;
  int a_sample_wins = 0;
  int b_sample_wins = 0;
  int unparseable = 0;
};

struct Tournament {
  std::vector<int> members;             // the tie set, best average first
  std::vector<PairCell> pairs;          // one cell per unordered pair
  std::vector<int> match_wins;          // aligned with members
  std::vector<std::pair<int, int>> drawn_pairs;
};

// ---------------------------------------------------------------------------
// Selection results

enum class SelectionMethod { verification, verification_no_tiebreak, consistency };

struct PluralityEntry {
  std::string answer;  // canonical form
  int count = 0;
  int first_index = 0;  // lowest candidate index reaching this answer
};

struct SelectionResult {
  SelectionMethod method = SelectionMethod::verification;
  int chosen_index = -1;
  bool degenerate = false;
  std::vector<int> s_best;                 // verification methods only
  std::optional<Tournament> tournament;    // present when a tie-break ran
  std::vector<PluralityEntry> plurality;   // consistency method only
  std::string response_text;               // synthetic consistency response
};

// ---------------------------------------------------------------------------
// Operations

// Candidates whose average lies within tie_window of the best average,
// ordered by (average desc, index asc) and truncated to tie_cap entries.
// Degenerate candidates are excluded whenever any non-degenerate candidate
// exists. The best-average candidate is always the first member.
std::vector<int> compute_s_best(const std::vector<CandidateScore>& scores,
                                double tie_window, int tie_cap);

// True when the tie set has at least two members that do not all share one
// canonical final answer. A candidate with no parseable final answer counts
// as distinct from every other candidate, including other answerless ones.
bool needs_tiebreak(const std::vector<int>& s_best,
                    const std::vector<std::optional<std::string>>& final_answers);

// Round-robin winner: each pair's sample-majority winner takes the matchup;
// most matchups won takes the tournament, ties broken by higher average and
// then lower index. Every unordered member pair must have at least one
// sample; a pair whose samples split evenly (or are all unparseable) is
// recorded as drawn and awards no win.
std::pair<int, Tournament> tournament_winner(
    const std::vector<int>& members, const std::vector<CandidateScore>& scores,
    const std::vector<MatchupSample>& samples);

// Full selection rule. With run_tiebreak false (or when the tie set agrees
// on one answer) the result is simply the best average, lowest index first;
// otherwise the matchup provider is consulted once per unordered pair in
// the tie set and the tournament decides.
SelectionResult select_by_verification(
    const std::vector<CandidateScore>& scores,
    const std::vector<std::optional<std::string>>& final_answers,
    const MatchupProvider& provider, const SearchConfig& config,
    bool run_tiebreak = true);

// Plurality vote over canonical final answers; candidates without a
// parseable answer do not vote. Ties go to the answer whose first occurrence
// has the lowest candidate index. Throws std::runtime_error when no
// candidate has a parseable answer.
SelectionResult select_by_consistency(
    const std::vector<std::optional<std::string>>& final_answers);

// Survivors of the preliminary stage: candidates scoring at or above
// prelim_threshold, then at most prelim_cap_per_answer per canonical answer
// (kept uniformly at random, seeded; answerless candidates are their own
// group of one). Returns candidate indices in ascending order.
std::vector<int> preliminary_filter(const std::vector<CandidateScore>& prelim_scores,
                                    const std::vector<std::optional<std::string>>& final_answers,
                                    const SearchConfig& config, std::uint64_t seed);

}  // namespace sieve::select
