#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sieve/select.hpp"

// Persistent runs.
//
// A run directory holds two things:
//   run.jsonl      one JSON object per line, each tagged with "type", "seq"
//                  (strictly increasing from 0) and "ts" (milliseconds; zero
//                  for scripted runs so artifacts are byte-stable)
//   transcripts/   content-addressed text files, one per distinct rendered
//                  conversation, named by their SHA-256 hex digest
//
// The index file is the system of record: every response, verification
// attempt, matchup sample, grade, and selection appears there, while bulky
// conversation text lives behind transcript references. One writer owns a
// run at a time (appends are serialized internally); readers load the whole
// file into a Run value.
//
// Crash behavior: each record is written as one line and flushed. A process
// killed mid-write leaves an unterminated tail, which opening for append
// silently truncates. A newline-terminated line that does not parse, or any
// record that breaks referential integrity, is corruption and loading fails
// with the 1-based line number.

namespace sieve::run_store {

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Records

struct Question {
  std::string id;
  std::string text;
  std::string style = "boxed";  // "boxed" or "verbatim" inference prompt
  std::optional<std::string> reference_answer;
  std::optional<std::string> reference_solution;
};

struct ResponseRecord {
  std::string question_id;
  int index = 0;
  std::optional<std::string> final_answer;  // canonical; nullopt when unextractable
  std::string text;            // inline response text; may be empty for large runs
  std::string transcript_ref;  // generation transcript hash; may be empty
  long prompt_tokens = 0;
  long output_tokens = 0;
};

struct VerificationRecord {
  std::string question_id;
  int response_index = 0;
  int attempt_index = 0;
  select::Stage stage = select::Stage::full;
  select::Verdict verdict = select::Verdict::unparseable;
  std::string transcript_ref;
};

struct MatchupRecord {
  std::string question_id;
  int a_index = 0;  // a < b always
  int b_index = 0;
  int attempt_index = 0;
  select::PresentedOrder order = select::PresentedOrder::ab;
  select::MatchupVerdict verdict = select::MatchupVerdict::unparseable;
  std::string transcript_ref;
};

struct GradeRecord {
  std::string question_id;
  int response_index = 0;
  bool correct = false;
  std::string mode = "exact";  // "exact", "lm", or "synthetic"
  bool degenerate = false;     // no grading run produced a valid ruling
  int votes_true = 0;
  int votes_valid = 0;
};

struct SelectionRecord {
  std::string question_id;
  std::string method;  // "verification", "verification_no_tiebreak", "consistency"
  int chosen_index = -1;
  std::optional<std::string> final_answer;
  std::string response_text;
  std::vector<int> s_best;
  bool degenerate = false;
};

struct RunMeta {
  int version = kFormatVersion;
  select::SearchConfig config;
  std::string backend_kind = "mock";
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Loaded view

struct ResponseEntry {
  ResponseRecord record;
  // Verdicts indexed by attempt; holes are attempts not yet persisted.
  std::vector<std::optional<select::Verdict>> preliminary;
  std::vector<std::optional<select::Verdict>> full;
  std::optional<GradeRecord> grade;

  // Dense verdict list for attempts [0, k); throws when any is missing.
  std::vector<select::Verdict> full_verdicts(int k) const;
  std::vector<select::Verdict> preliminary_verdicts(int k) const;
};

struct QuestionRun {
  Question question;
  std::map<int, ResponseEntry> responses;  // keyed by response index
  std::vector<MatchupRecord> matchups;
  std::vector<SelectionRecord> selections;
};

struct Run {
  bool has_meta = false;
  RunMeta meta;
  std::vector<std::string> question_order;
  std::map<std::string, QuestionRun> questions;
  std::uint64_t next_seq = 0;

  const QuestionRun& question(const std::string& id) const;
};

// Parses run.jsonl in `dir`. Throws std::runtime_error with a line number on
// corruption; an unterminated trailing line is reported via
// *truncated_tail_bytes (when non-null) and otherwise ignored.
Run load_run(const std::string& dir, std::size_t* truncated_tail_bytes = nullptr);

// ---------------------------------------------------------------------------
// Transcript storage

std::string sha256_hex(std::string_view bytes);

class TranscriptStore {
public:
  explicit TranscriptStore(std::string dir);  // creates the directory

  // Stores content, returns its hash. Idempotent; safe from many threads.
  std::string put(std::string_view content);
  bool contains(const std::string& ref) const;
  std::string get(const std::string& ref) const;  // throws when missing
  const std::string& dir() const { return dir_; }

private:
  std::string dir_;
  std::mutex mutex_;
  std::uint64_t temp_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Writer

// Thrown when the configured append limit is reached; used to force a
// deterministic mid-run death in recovery tests.
struct HaltRequested : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class RunWriter {
public:
  enum class Mode { create, append };

  // `clock` supplies record timestamps in milliseconds; pass a zero clock
  // for scripted runs. Mode::create requires that no run.jsonl exists yet
  // and that the first record appended is the meta record. Mode::append
  // recovers from a torn tail and continues the sequence.
  RunWriter(std::string dir, Mode mode, std::function<std::int64_t()> clock = {});

  void put_meta(const RunMeta& meta);
  void add_question(const Question& question);
  void add_response(const ResponseRecord& record);
  void add_verification(const VerificationRecord& record);
  void add_matchup(const MatchupRecord& record);
  void add_grade(const GradeRecord& record);
  void add_selection(const SelectionRecord& record);

  // Every append after the next `n` throws HaltRequested.
  void set_append_limit(std::uint64_t n);

  TranscriptStore& transcripts() { return *transcripts_; }
  const Run& state() const { return run_; }
  const std::string& dir() const { return dir_; }
  std::size_t recovered_tail_bytes() const { return recovered_tail_bytes_; }

private:
  void append_line(const std::string& type, std::string payload_json);

  std::string dir_;
  std::function<std::int64_t()> clock_;
  std::unique_ptr<TranscriptStore> transcripts_;
  Run run_;
  std::mutex mutex_;
  std::size_t recovered_tail_bytes_ = 0;
  std::optional<std::uint64_t> append_limit_;
  std::uint64_t appends_done_ = 0;
};

// ---------------------------------------------------------------------------
// Resume

struct GenerationUnit {
  std::string question_id;
  std::vector<int> missing_indices;
};

struct VerificationUnit {
  std::string question_id;
  int response_index = 0;
  select::Stage stage = select::Stage::full;
  std::vector<int> missing_attempts;
};

struct MatchupUnit {
  std::string question_id;
  int a_index = 0;
  int b_index = 0;
  std::vector<int> missing_attempts;
};

struct ResumeManifest {
  std::vector<GenerationUnit> generation;
  std::vector<VerificationUnit> preliminary;
  std::vector<VerificationUnit> verification;
  std::vector<MatchupUnit> matchups;

  bool complete() const {
    return generation.empty() && preliminary.empty() && verification.empty() &&
           matchups.empty();
  }
};

// What remains to bring the run up to the configured sizes. Verification
// units appear only for responses that exist (and, under the preliminary
// filter, only for survivors once the preliminary stage is complete);
// matchup units appear only for questions whose scores are complete and
// whose tie set disagrees on the final answer.
ResumeManifest resume_manifest(const Run& run, const select::SearchConfig& config);

}  // namespace sieve::run_store
