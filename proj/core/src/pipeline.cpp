#include "sieve/pipeline.hpp"

#include <stdexcept>
#include <utility>

#include "sieve/answers.hpp"
#include "sieve/parse.hpp"

namespace sieve::pipeline {

namespace {

std::string store_transcript(run_store::TranscriptStore* transcripts, const Conversation& conv) {
  if (transcripts == nullptr) return "";
  return transcripts->put(serialize_transcript(conv));
}

// Runs one more turn: append the user prompt, complete, append the reply.
// Returns the reply text.
const std::string& advance(backend::Backend& backend, Conversation& conv, std::string prompt) {
  conv.add_user(std::move(prompt));
  backend::Completion completion = backend.complete(conv);
  conv.add_model(std::move(completion.text));
  return conv.turns.back().text;
}

}  // namespace

Conversation render_inference_prompt(const run_store::Question& question,
                                     const templates::TemplateSet& templates,
                                     const select::SearchConfig& config) {
  const char* name = question.style == "verbatim" ? "inference_verbatim" : "inference_boxed";
  Conversation conv;
  conv.params.temperature = config.sigma_inf;
  conv.params.max_output_tokens = config.max_output_tokens;
  conv.add_user(templates::render(templates.get(name), {question.text}));
  return conv;
}

std::optional<std::string> extract_final_answer(const std::string& response_text,
                                                backend::Backend* extraction_backend,
                                                const templates::TemplateSet& templates,
                                                const select::SearchConfig& config) {
  if (std::optional<std::string> boxed = answers::extract_boxed(response_text)) return boxed;
  if (extraction_backend == nullptr) return std::nullopt;
  Conversation conv;
  conv.params.temperature = 0.0;
  conv.params.max_output_tokens = config.max_output_tokens;
  conv.add_user(templates::render(templates.get("extraction"), {response_text}));
  backend::Completion completion = extraction_backend->complete(conv);
  std::string answer = answers::canonical_answer(completion.text);
  if (answer.empty() || answer == "NONE") return std::nullopt;
  return answer;
}

GeneratedResponse generate_response(backend::Backend& backend,
                                    const run_store::Question& question,
                                    const templates::TemplateSet& templates,
                                    const select::SearchConfig& config,
                                    run_store::TranscriptStore* transcripts,
                                    backend::Backend* extraction_backend) {
  Conversation conv = render_inference_prompt(question, templates, config);
  backend::Completion completion = backend.complete(conv);
  conv.add_model(completion.text);

  GeneratedResponse response;
  response.text = std::move(completion.text);
  response.prompt_tokens = completion.prompt_tokens;
  response.output_tokens = completion.output_tokens;
  response.final_answer =
      extract_final_answer(response.text, extraction_backend, templates, config);
  response.transcript_ref = store_transcript(transcripts, conv);
  return response;
}

VerificationOutcome run_verification_attempt(backend::Backend& backend,
                                             const run_store::Question& question,
                                             const std::string& candidate_text,
                                             const templates::TemplateSet& templates,
                                             const select::SearchConfig& config,
                                             select::Stage stage, int attempt_index,
                                             bool include_rewrite_tail,
                                             run_store::TranscriptStore* transcripts) {
  VerificationOutcome outcome;
  outcome.attempt.stage = stage;
  outcome.attempt.attempt_index = attempt_index;
  outcome.attempt.verdict = select::Verdict::unparseable;

  Conversation conv;
  conv.params.temperature = config.sigma_verif;
  conv.params.max_output_tokens = config.max_output_tokens;

  std::string reply4;
  std::string reply7;
  try {
    for (int i = 1; i <= 7; ++i) {
      std::string name = "verification_" + std::to_string(i);
      std::string prompt = i == 1
                               ? templates::render(templates.get(name),
                                                   {question.text, candidate_text})
                               : templates.get(name).text;
      const std::string& reply = advance(backend, conv, std::move(prompt));
      if (i == 4) reply4 = reply;
      if (i == 7) reply7 = reply;
    }
    outcome.attempt.verdict = parse::parse_verdict(reply7);
    if (outcome.attempt.verdict == select::Verdict::unparseable)
      outcome.attempt.verdict = parse::parse_verdict(reply4);
  } catch (const backend::BackendError& e) {
    outcome.note = e.what();
    outcome.attempt.transcript_ref = store_transcript(transcripts, conv);
    return outcome;
  }

  if (include_rewrite_tail) {
    // The rewrite tail may fail without touching the verdict above.
    try {
      advance(backend, conv,
              templates::render(templates.get("verification_8"),
                                {question.text, candidate_text}));
      outcome.rewrite = advance(backend, conv, templates.get("verification_9").text);
    } catch (const backend::BackendError& e) {
      outcome.note = e.what();
      outcome.rewrite = std::nullopt;
    }
  }

  outcome.attempt.transcript_ref = store_transcript(transcripts, conv);
  return outcome;
}

select::MatchupSample run_matchup_sample(backend::Backend& backend,
                                         const run_store::Question& question,
                                         const std::string& a_text, const std::string& b_text,
                                         int a_index, int b_index, int attempt_index,
                                         const templates::TemplateSet& templates,
                                         const select::SearchConfig& config,
                                         run_store::TranscriptStore* transcripts) {
  if (a_index >= b_index) throw std::invalid_argument("matchup: need a_index < b_index");

  select::MatchupSample sample;
  sample.a_index = a_index;
  sample.b_index = b_index;
  sample.attempt_index = attempt_index;
  sample.order = attempt_index % 2 == 0 ? select::PresentedOrder::ab : select::PresentedOrder::ba;
  sample.verdict = select::MatchupVerdict::unparseable;

  const std::string& first = sample.order == select::PresentedOrder::ab ? a_text : b_text;
  const std::string& second = sample.order == select::PresentedOrder::ab ? b_text : a_text;

  Conversation conv;
  conv.params.temperature = config.sigma_verif;
  conv.params.max_output_tokens = config.max_output_tokens;

  try {
    advance(backend, conv,
            templates::render(templates.get("comparison_1"), {question.text, first, second}));
    advance(backend, conv, templates.get("comparison_2").text);
    advance(backend, conv,
            templates::render(templates.get("comparison_3"), {question.text}));
    advance(backend, conv,
            templates::render(templates.get("comparison_4"), {question.text}));
    advance(backend, conv, templates.get("comparison_5").text);
    const std::string& summary =
        advance(backend, conv, templates.get("comparison_summary").text);
    if (std::optional<int> choice = parse::parse_matchup_choice(summary)) {
      bool first_wins = *choice == 1;
      bool a_presented_first = sample.order == select::PresentedOrder::ab;
      sample.verdict = first_wins == a_presented_first ? select::MatchupVerdict::a_wins
                                                       : select::MatchupVerdict::b_wins;
    }
  } catch (const backend::BackendError&) {
    // Failed chains count as unparseable samples; the transcript keeps the
    // turns that did complete.
  }

  sample.transcript_ref = store_transcript(transcripts, conv);
  return sample;
}

}  // namespace sieve::pipeline
