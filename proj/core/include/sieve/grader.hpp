#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sieve/backend.hpp"
#include "sieve/run_store.hpp"
#include "sieve/templates.hpp"

// Ground-truth grading of candidate responses.
//
// Two modes: exact string match of extracted final answers against the
// reference answer, and model-based grading of the full response against a
// reference solution. Model grading runs the two-prompt grading chain five
// times at temperature zero and takes the majority of the runs that produced
// a parseable boolean; if none did, the response is marked incorrect and the
// grade is flagged degenerate.

namespace sieve::grader {

struct GradeOutcome {
  bool correct = false;
  bool degenerate = false;  // no grading run produced a parseable verdict
  int votes_true = 0;
  int votes_valid = 0;
  std::vector<std::string> transcript_refs;
};

// Whitespace-insensitive literal match. A response without a final answer is
// incorrect.
bool grade_exact(const std::optional<std::string>& final_answer,
                 const std::string& reference_answer);

// Majority over `runs` independent grading chains. Requires the question to
// carry a reference solution. Runs whose reply lacks the boolean field, or
// that fail at the backend, contribute no vote.
GradeOutcome grade_with_lm(backend::Backend& backend, const run_store::Question& question,
                           const std::string& candidate_text,
                           const templates::TemplateSet& templates,
                           run_store::TranscriptStore* transcripts, int runs = 5);

}  // namespace sieve::grader
