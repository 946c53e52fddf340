#include "sieve/grader.hpp"

#include <stdexcept>

#include "sieve/answers.hpp"
#include "sieve/conversation.hpp"
#include "sieve/parse.hpp"

namespace sieve::grader {

bool grade_exact(const std::optional<std::string>& final_answer,
                 const std::string& reference_answer) {
  if (!final_answer) return false;
  return answers::same_answer(*final_answer, reference_answer);
}

GradeOutcome grade_with_lm(backend::Backend& backend, const run_store::Question& question,
                           const std::string& candidate_text,
                           const templates::TemplateSet& templates,
                           run_store::TranscriptStore* transcripts, int runs) {
  if (runs < 1) throw std::invalid_argument("grader: runs must be at least 1");
  if (!question.reference_solution || question.reference_solution->empty())
    throw std::invalid_argument("grader: question " + question.id +
                                " has no reference solution");

  GradeOutcome outcome;
  for (int r = 0; r < runs; ++r) {
    Conversation conv;
    conv.params.temperature = 0.0;
    conv.add_user(templates::render(
        templates.get("grading_1"),
        {question.text, *question.reference_solution, candidate_text}));
    std::optional<bool> vote;
    try {
      backend::Completion first = backend.complete(conv);
      conv.add_model(std::move(first.text));
      conv.add_user(templates.get("grading_2").text);
      backend::Completion second = backend.complete(conv);
      conv.add_model(std::move(second.text));
      vote = parse::parse_grade_bool(conv.turns.back().text);
    } catch (const backend::BackendError&) {
      // A failed run simply casts no vote.
    }
    if (transcripts != nullptr && !conv.turns.empty())
      outcome.transcript_refs.push_back(transcripts->put(serialize_transcript(conv)));
    if (vote) {
      ++outcome.votes_valid;
      if (*vote) ++outcome.votes_true;
    }
  }

  outcome.degenerate = outcome.votes_valid == 0;
  outcome.correct = !outcome.degenerate && 2 * outcome.votes_true > outcome.votes_valid;
  return outcome;
}

}  // namespace sieve::grader
