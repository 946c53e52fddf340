#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sieve/backend.hpp"
#include "sieve/run_store.hpp"
#include "sieve/select.hpp"
#include "sieve/templates.hpp"

// Prompt chains.
//
// This module turns questions and candidates into conversations and runs
// them: candidate generation, the nine-prompt verification chain, the
// six-turn pairwise comparison chain, and final-answer extraction. Each
// routine renders templates, drives the backend turn by turn, parses the
// decision out of the reply, and stores the full transcript content-addressed.

namespace sieve::pipeline {

// One user turn built from the question's inference template ("boxed" wraps
// the question in the step-by-step instruction; "verbatim" submits the
// question text unchanged), carrying the generation temperature sigma_inf.
Conversation render_inference_prompt(const run_store::Question& question,
                                     const templates::TemplateSet& templates,
                                     const select::SearchConfig& config);

// Final answer of a response: the last complete \boxed{...} group when one
// exists, otherwise one zero-temperature extraction call when a backend is
// given (a reply of NONE, or an empty reply, means no final answer).
// Backend failures propagate.
std::optional<std::string> extract_final_answer(const std::string& response_text,
                                                backend::Backend* extraction_backend,
                                                const templates::TemplateSet& templates,
                                                const select::SearchConfig& config);

struct GeneratedResponse {
  std::string text;
  std::optional<std::string> final_answer;
  long prompt_tokens = 0;
  long output_tokens = 0;
  std::string transcript_ref;
};

// One candidate: render, complete, extract, persist transcript.
GeneratedResponse generate_response(backend::Backend& backend,
                                    const run_store::Question& question,
                                    const templates::TemplateSet& templates,
                                    const select::SearchConfig& config,
                                    run_store::TranscriptStore* transcripts,
                                    backend::Backend* extraction_backend);

struct VerificationOutcome {
  select::VerificationAttempt attempt;
  std::optional<std::string> rewrite;  // reply to the second rewrite prompt
  std::string note;                    // failure context, empty when clean
};

// One self-verification attempt: the seven scoring prompts in order, then
// optionally the two rewrite prompts. The verdict comes from the reply to
// prompt 7, falling back to the reply to prompt 4 when unparseable; the
// rewrite tail never affects the verdict. A backend failure mid-chain yields
// an unparseable attempt with the error recorded in `note`.
VerificationOutcome run_verification_attempt(backend::Backend& backend,
                                             const run_store::Question& question,
                                             const std::string& candidate_text,
                                             const templates::TemplateSet& templates,
                                             const select::SearchConfig& config,
                                             select::Stage stage, int attempt_index,
                                             bool include_rewrite_tail,
                                             run_store::TranscriptStore* transcripts);

// One comparison sample for the pair (a < b). Even attempts present (a, b),
// odd attempts (b, a), so presentation order balances over any contiguous
// attempt range. The chain is the five comparison prompts plus the JSON
// summarizer as a sixth turn; the parsed choice is mapped back to original
// candidate indices.
select::MatchupSample run_matchup_sample(backend::Backend& backend,
                                         const run_store::Question& question,
                                         const std::string& a_text, const std::string& b_text,
                                         int a_index, int b_index, int attempt_index,
                                         const templates::TemplateSet& templates,
                                         const select::SearchConfig& config,
                                         run_store::TranscriptStore* transcripts);

}  // namespace sieve::pipeline
