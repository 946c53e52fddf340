#include "sieve/run_store.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "sieve/answers.hpp"
#include "sieve/rng.hpp"

namespace sieve::run_store {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Enum encodings

namespace {

std::string stage_to_string(select::Stage s) {
  return s == select::Stage::full ? "full" : "preliminary";
}

select::Stage stage_from_string(const std::string& s) {
  if (s == "full") return select::Stage::full;
  if (s == "preliminary") return select::Stage::preliminary;
  throw std::runtime_error("unknown stage \"" + s + "\"");
}

std::string verdict_to_string(select::Verdict v) {
  switch (v) {
    case select::Verdict::correct: return "correct";
    case select::Verdict::error_found: return "error_found";
    default: return "unparseable";
  }
}

select::Verdict verdict_from_string(const std::string& s) {
  if (s == "correct") return select::Verdict::correct;
  if (s == "error_found") return select::Verdict::error_found;
  if (s == "unparseable") return select::Verdict::unparseable;
  throw std::runtime_error("unknown verdict \"" + s + "\"");
}

std::string order_to_string(select::PresentedOrder o) {
  return o == select::PresentedOrder::ab ? "ab" : "ba";
}

select::PresentedOrder order_from_string(const std::string& s) {
  if (s == "ab") return select::PresentedOrder::ab;
  if (s == "ba") return select::PresentedOrder::ba;
  throw std::runtime_error("unknown presentation order \"" + s + "\"");
}

std::string matchup_verdict_to_string(select::MatchupVerdict v) {
  switch (v) {
    case select::MatchupVerdict::a_wins: return "a";
    case select::MatchupVerdict::b_wins: return "b";
    default: return "unparseable";
  }
}

select::MatchupVerdict matchup_verdict_from_string(const std::string& s) {
  if (s == "a") return select::MatchupVerdict::a_wins;
  if (s == "b") return select::MatchupVerdict::b_wins;
  if (s == "unparseable") return select::MatchupVerdict::unparseable;
  throw std::runtime_error("unknown matchup verdict \"" + s + "\"");
}

json optional_to_json(const std::optional<std::string>& v) {
  if (v.has_value()) return *v;
  return nullptr;
}

std::optional<std::string> optional_from_json(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<std::string>();
}

void set_slot(std::vector<std::optional<select::Verdict>>& slots, int attempt,
              select::Verdict verdict) {
  if (static_cast<std::size_t>(attempt) >= slots.size())
    slots.resize(static_cast<std::size_t>(attempt) + 1);
  if (slots[static_cast<std::size_t>(attempt)].has_value())
    throw std::runtime_error("duplicate verification attempt " + std::to_string(attempt));
  slots[static_cast<std::size_t>(attempt)] = verdict;
}

// Applies one parsed record to the in-memory run, enforcing referential
// integrity. Throws std::runtime_error; callers add location context.
void apply_record(Run& run, const std::string& type, const json& j) {
  if (!run.has_meta && type != "meta")
    throw std::runtime_error("first record must be the meta record");

  if (type == "meta") {
    if (run.has_meta) throw std::runtime_error("duplicate meta record");
    RunMeta meta;
    meta.version = j.at("version").get<int>();
    if (meta.version > kFormatVersion)
      throw std::runtime_error("run format version " + std::to_string(meta.version) +
                               " is newer than supported version " +
                               std::to_string(kFormatVersion));
    meta.config = select::search_config_from_json(j.at("config").dump());
    meta.backend_kind = j.value("backend", "mock");
    meta.seed = j.value("seed", std::uint64_t{0});
    run.meta = std::move(meta);
    run.has_meta = true;
    return;
  }

  if (type == "question") {
    Question q;
    q.id = j.at("id").get<std::string>();
    if (q.id.empty()) throw std::runtime_error("question with empty id");
    if (run.questions.count(q.id)) throw std::runtime_error("duplicate question \"" + q.id + "\"");
    q.text = j.at("text").get<std::string>();
    q.style = j.value("style", "boxed");
    if (q.style != "boxed" && q.style != "verbatim")
      throw std::runtime_error("question \"" + q.id + "\" has unknown style \"" + q.style + "\"");
    q.reference_answer = optional_from_json(j.value("reference_answer", json()));
    q.reference_solution = optional_from_json(j.value("reference_solution", json()));
    run.question_order.push_back(q.id);
    run.questions[q.id].question = std::move(q);
    return;
  }

  const std::string qid = j.at("question").get<std::string>();
  auto qit = run.questions.find(qid);
  if (qit == run.questions.end())
    throw std::runtime_error(type + " record references unknown question \"" + qid + "\"");
  QuestionRun& qrun = qit->second;

  if (type == "response") {
    ResponseRecord r;
    r.question_id = qid;
    r.index = j.at("index").get<int>();
    if (r.index < 0) throw std::runtime_error("negative response index");
    if (qrun.responses.count(r.index))
      throw std::runtime_error("duplicate response " + std::to_string(r.index) +
                               " for question \"" + qid + "\"");
    r.final_answer = optional_from_json(j.at("final_answer"));
    r.text = j.value("text", "");
    r.transcript_ref = j.value("transcript_ref", "");
    r.prompt_tokens = j.value("prompt_tokens", 0L);
    r.output_tokens = j.value("output_tokens", 0L);
    qrun.responses[r.index].record = std::move(r);
    return;
  }

  if (type == "verification") {
    const int response = j.at("response").get<int>();
    auto rit = qrun.responses.find(response);
    if (rit == qrun.responses.end())
      throw std::runtime_error("verification references missing response " +
                               std::to_string(response) + " of question \"" + qid + "\"");
    const int attempt = j.at("attempt").get<int>();
    if (attempt < 0) throw std::runtime_error("negative attempt index");
    const auto stage = stage_from_string(j.at("stage").get<std::string>());
    const auto verdict = verdict_from_string(j.at("verdict").get<std::string>());
    auto& slots = stage == select::Stage::full ? rit->second.full : rit->second.preliminary;
    set_slot(slots, attempt, verdict);
    return;
  }

  if (type == "matchup") {
    MatchupRecord m;
    m.question_id = qid;
    m.a_index = j.at("a").get<int>();
    m.b_index = j.at("b").get<int>();
    if (m.a_index >= m.b_index)
      throw std::runtime_error("matchup indices must satisfy a < b");
    if (!qrun.responses.count(m.a_index) || !qrun.responses.count(m.b_index))
      throw std::runtime_error("matchup references missing responses of question \"" + qid + "\"");
    m.attempt_index = j.at("attempt").get<int>();
    for (const auto& existing : qrun.matchups) {
      if (existing.a_index == m.a_index && existing.b_index == m.b_index &&
          existing.attempt_index == m.attempt_index)
        throw std::runtime_error("duplicate matchup sample for question \"" + qid + "\"");
    }
    m.order = order_from_string(j.at("order").get<std::string>());
    m.verdict = matchup_verdict_from_string(j.at("verdict").get<std::string>());
    m.transcript_ref = j.value("transcript_ref", "");
    qrun.matchups.push_back(std::move(m));
    return;
  }

  if (type == "grade") {
    const int response = j.at("response").get<int>();
    auto rit = qrun.responses.find(response);
    if (rit == qrun.responses.end())
      throw std::runtime_error("grade references missing response " + std::to_string(response) +
                               " of question \"" + qid + "\"");
    if (rit->second.grade.has_value())
      throw std::runtime_error("duplicate grade for response " + std::to_string(response) +
                               " of question \"" + qid + "\"");
    GradeRecord g;
    g.question_id = qid;
    g.response_index = response;
    g.correct = j.at("correct").get<bool>();
    g.mode = j.value("mode", "exact");
    g.degenerate = j.value("degenerate", false);
    g.votes_true = j.value("votes_true", 0);
    g.votes_valid = j.value("votes_valid", 0);
    rit->second.grade = std::move(g);
    return;
  }

  if (type == "selection") {
    SelectionRecord s;
    s.question_id = qid;
    s.method = j.at("method").get<std::string>();
    s.chosen_index = j.at("chosen").get<int>();
    if (!qrun.responses.count(s.chosen_index))
      throw std::runtime_error("selection references missing response " +
                               std::to_string(s.chosen_index) + " of question \"" + qid + "\"");
    for (const auto& existing : qrun.selections) {
      if (existing.method == s.method)
        throw std::runtime_error("duplicate " + s.method + " selection for question \"" + qid +
                                 "\"");
    }
    s.final_answer = optional_from_json(j.value("final_answer", json()));
    s.response_text = j.value("response_text", "");
    if (j.contains("s_best")) s.s_best = j["s_best"].get<std::vector<int>>();
    s.degenerate = j.value("degenerate", false);
    qrun.selections.push_back(std::move(s));
    return;
  }

  throw std::runtime_error("unknown record type \"" + type + "\"");
}

struct ParsedFile {
  Run run;
  std::size_t tail_bytes = 0;      // unterminated trailing bytes
  std::uintmax_t keep_bytes = 0;   // file size after dropping the tail
};

ParsedFile parse_run_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("run store: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = std::move(buffer).str();

  ParsedFile parsed;
  std::size_t consumed = 0;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) {
      // Torn tail from an interrupted write; recoverable.
      parsed.tail_bytes = content.size() - pos;
      break;
    }
    ++line_number;
    const std::string_view line(content.data() + pos, nl - pos);
    if (!line.empty()) {
      json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (j.is_discarded() || !j.is_object())
        throw std::runtime_error("run store: " + path.string() + " line " +
                                 std::to_string(line_number) + ": not a JSON object");
      try {
        const auto seq = j.at("seq").get<std::uint64_t>();
        if (seq != parsed.run.next_seq)
          throw std::runtime_error("sequence number " + std::to_string(seq) + ", expected " +
                                   std::to_string(parsed.run.next_seq));
        apply_record(parsed.run, j.at("type").get<std::string>(), j);
        ++parsed.run.next_seq;
      } catch (const std::exception& e) {
        throw std::runtime_error("run store: " + path.string() + " line " +
                                 std::to_string(line_number) + ": " + e.what());
      }
    }
    pos = nl + 1;
    consumed = pos;
  }
  parsed.keep_bytes = consumed;
  return parsed;
}

}  // namespace

// ---------------------------------------------------------------------------
// Loaded view helpers

namespace {

std::vector<select::Verdict> dense_verdicts(
    const std::vector<std::optional<select::Verdict>>& slots, int k, const char* what) {
  if (k < 0) throw std::invalid_argument("verdict count must be non-negative");
  std::vector<select::Verdict> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    if (static_cast<std::size_t>(i) >= slots.size() || !slots[static_cast<std::size_t>(i)])
      throw std::runtime_error(std::string(what) + " attempt " + std::to_string(i) +
                               " is missing");
    out.push_back(*slots[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

std::vector<select::Verdict> ResponseEntry::full_verdicts(int k) const {
  return dense_verdicts(full, k, "full verification");
}

std::vector<select::Verdict> ResponseEntry::preliminary_verdicts(int k) const {
  return dense_verdicts(preliminary, k, "preliminary verification");
}

const QuestionRun& Run::question(const std::string& id) const {
  auto it = questions.find(id);
  if (it == questions.end())
    throw std::invalid_argument("run: unknown question \"" + id + "\"");
  return it->second;
}

Run load_run(const std::string& dir, std::size_t* truncated_tail_bytes) {
  ParsedFile parsed = parse_run_file(fs::path(dir) / "run.jsonl");
  if (truncated_tail_bytes) *truncated_tail_bytes = parsed.tail_bytes;
  return std::move(parsed.run);
}

// ---------------------------------------------------------------------------
// Transcripts

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("run store: SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

TranscriptStore::TranscriptStore(std::string dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

std::string TranscriptStore::put(std::string_view content) {
  const std::string ref = sha256_hex(content);
  const fs::path target = fs::path(dir_) / (ref + ".txt");
  if (fs::exists(target)) return ref;

  std::uint64_t nonce;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    nonce = ++temp_counter_;
  }
  const fs::path temp = fs::path(dir_) / (".tmp-" + std::to_string(nonce) + "-" + ref);
  {
    std::ofstream out(temp, std::ios::binary);
    if (!out) throw std::runtime_error("run store: cannot write " + temp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  // Atomic publish; a concurrent identical put simply wins the race first.
  fs::rename(temp, target);
  return ref;
}

bool TranscriptStore::contains(const std::string& ref) const {
  return fs::exists(fs::path(dir_) / (ref + ".txt"));
}

std::string TranscriptStore::get(const std::string& ref) const {
  const fs::path path = fs::path(dir_) / (ref + ".txt");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("run store: missing transcript " + ref);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

// ---------------------------------------------------------------------------
// Writer

RunWriter::RunWriter(std::string dir, Mode mode, std::function<std::int64_t()> clock)
    : dir_(std::move(dir)), clock_(std::move(clock)) {
  if (!clock_) {
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  const fs::path index = fs::path(dir_) / "run.jsonl";
  if (mode == Mode::create) {
    if (fs::exists(index))
      throw std::runtime_error("run store: " + index.string() + " already exists");
    fs::create_directories(dir_);
    std::ofstream touch(index, std::ios::binary);
    if (!touch) throw std::runtime_error("run store: cannot create " + index.string());
  } else {
    ParsedFile parsed = parse_run_file(index);
    if (parsed.tail_bytes > 0) {
      fs::resize_file(index, parsed.keep_bytes);
      recovered_tail_bytes_ = parsed.tail_bytes;
    }
    run_ = std::move(parsed.run);
  }
  transcripts_ = std::make_unique<TranscriptStore>((fs::path(dir_) / "transcripts").string());
}

void RunWriter::append_line(const std::string& type, std::string payload_json) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (append_limit_ && appends_done_ >= *append_limit_)
    throw HaltRequested("run store: append limit reached");

  // Rebuild the line with bookkeeping fields, then apply to the in-memory
  // view first; a record that fails integrity checks is never written.
  json j = json::parse(payload_json);
  j["type"] = type;
  j["seq"] = run_.next_seq;
  j["ts"] = clock_();
  apply_record(run_, type, j);
  ++run_.next_seq;

  std::ofstream out(fs::path(dir_) / "run.jsonl", std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("run store: cannot append to run.jsonl");
  out << j.dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("run store: write failed");
  ++appends_done_;
}

void RunWriter::put_meta(const RunMeta& meta) {
  json j{{"version", meta.version},
         {"config", json::parse(select::search_config_to_json(meta.config))},
         {"backend", meta.backend_kind},
         {"seed", meta.seed}};
  append_line("meta", j.dump());
}

void RunWriter::add_question(const Question& q) {
  json j{{"id", q.id},
         {"text", q.text},
         {"style", q.style},
         {"reference_answer", optional_to_json(q.reference_answer)},
         {"reference_solution", optional_to_json(q.reference_solution)}};
  append_line("question", j.dump());
}

void RunWriter::add_response(const ResponseRecord& r) {
  json j{{"question", r.question_id},
         {"index", r.index},
         {"final_answer", optional_to_json(r.final_answer)},
         {"text", r.text},
         {"transcript_ref", r.transcript_ref},
         {"prompt_tokens", r.prompt_tokens},
         {"output_tokens", r.output_tokens}};
  append_line("response", j.dump());
}

void RunWriter::add_verification(const VerificationRecord& v) {
  json j{{"question", v.question_id},
         {"response", v.response_index},
         {"attempt", v.attempt_index},
         {"stage", stage_to_string(v.stage)},
         {"verdict", verdict_to_string(v.verdict)},
         {"transcript_ref", v.transcript_ref}};
  append_line("verification", j.dump());
}

void RunWriter::add_matchup(const MatchupRecord& m) {
  json j{{"question", m.question_id},
         {"a", m.a_index},
         {"b", m.b_index},
         {"attempt", m.attempt_index},
         {"order", order_to_string(m.order)},
         {"verdict", matchup_verdict_to_string(m.verdict)},
         {"transcript_ref", m.transcript_ref}};
  append_line("matchup", j.dump());
}

void RunWriter::add_grade(const GradeRecord& g) {
  json j{{"question", g.question_id},
         {"response", g.response_index},
         {"correct", g.correct},
         {"mode", g.mode},
         {"degenerate", g.degenerate},
         {"votes_true", g.votes_true},
         {"votes_valid", g.votes_valid}};
  append_line("grade", j.dump());
}

void RunWriter::add_selection(const SelectionRecord& s) {
  json j{{"question", s.question_id},
         {"method", s.method},
         {"chosen", s.chosen_index},
         {"final_answer", optional_to_json(s.final_answer)},
         {"response_text", s.response_text},
         {"s_best", s.s_best},
         {"degenerate", s.degenerate}};
  append_line("selection", j.dump());
}

void RunWriter::set_append_limit(std::uint64_t n) {
  std::lock_guard<std::mutex> lock(mutex_);
  append_limit_ = n;
}

// ---------------------------------------------------------------------------
// Resume

namespace {

std::vector<int> missing_in_range(int k, const std::set<int>& present) {
  std::vector<int> missing;
  for (int i = 0; i < k; ++i) {
    if (!present.count(i)) missing.push_back(i);
  }
  return missing;
}

std::vector<int> missing_attempts(const std::vector<std::optional<select::Verdict>>& slots,
                                  int k) {
  std::vector<int> missing;
  for (int i = 0; i < k; ++i) {
    if (static_cast<std::size_t>(i) >= slots.size() || !slots[static_cast<std::size_t>(i)])
      missing.push_back(i);
  }
  return missing;
}

}  // namespace

ResumeManifest resume_manifest(const Run& run, const select::SearchConfig& config) {
  ResumeManifest manifest;

  for (const auto& qid : run.question_order) {
    const QuestionRun& qrun = run.questions.at(qid);

    std::set<int> present;
    for (const auto& [index, entry] : qrun.responses) {
      if (index < config.k_inf) present.insert(index);
    }
    auto gen_missing = missing_in_range(config.k_inf, present);
    const bool generation_complete = gen_missing.empty();
    if (!generation_complete)
      manifest.generation.push_back({qid, std::move(gen_missing)});

    std::vector<std::optional<std::string>> final_answers(
        static_cast<std::size_t>(config.k_inf));
    for (const auto& [index, entry] : qrun.responses) {
      if (index < config.k_inf)
        final_answers[static_cast<std::size_t>(index)] = entry.record.final_answer;
    }

    // Which responses are owed full verification: everyone, or the
    // preliminary-stage survivors once that stage is complete.
    std::vector<int> pool;
    bool pool_known = true;
    if (config.use_preliminary) {
      bool prelim_complete = generation_complete;
      for (const auto& [index, entry] : qrun.responses) {
        if (index >= config.k_inf) continue;
        auto missing = missing_attempts(entry.preliminary, config.prelim_k);
        if (!missing.empty()) {
          prelim_complete = false;
          manifest.preliminary.push_back(
              {qid, index, select::Stage::preliminary, std::move(missing)});
        }
      }
      if (prelim_complete) {
        std::vector<select::CandidateScore> prelim_scores;
        for (const auto& [index, entry] : qrun.responses) {
          if (index >= config.k_inf) continue;
          std::vector<select::VerificationAttempt> attempts;
          for (auto v : entry.preliminary_verdicts(config.prelim_k))
            attempts.push_back({v, select::Stage::preliminary, 0, ""});
          prelim_scores.push_back(select::average_score(index, attempts));
        }
        pool = select::preliminary_filter(prelim_scores, final_answers, config,
                                          rng::mix({run.meta.seed, rng::fnv1a(qid)}));
      } else {
        pool_known = false;
      }
    } else {
      for (int index : present) pool.push_back(index);
    }

    if (!pool_known) continue;

    bool scores_complete = generation_complete;
    for (int index : pool) {
      const ResponseEntry& entry = qrun.responses.at(index);
      auto missing = missing_attempts(entry.full, config.k_verif);
      if (!missing.empty()) {
        scores_complete = false;
        manifest.verification.push_back({qid, index, select::Stage::full, std::move(missing)});
      }
    }

    // Matchup units exist only once every score is final; before that the
    // tie set itself is unknown.
    if (!scores_complete || pool.empty()) continue;

    std::vector<select::CandidateScore> scores;
    for (int index : pool) {
      std::vector<select::VerificationAttempt> attempts;
      for (auto v : qrun.responses.at(index).full_verdicts(config.k_verif))
        attempts.push_back({v, select::Stage::full, 0, ""});
      scores.push_back(select::average_score(index, attempts));
    }
    auto s_best = select::compute_s_best(scores, config.tie_window, config.tie_cap);
    if (!select::needs_tiebreak(s_best, final_answers)) continue;

    for (std::size_t i = 0; i < s_best.size(); ++i) {
      for (std::size_t j = i + 1; j < s_best.size(); ++j) {
        const int a = std::min(s_best[i], s_best[j]);
        const int b = std::max(s_best[i], s_best[j]);
        std::set<int> have;
        for (const auto& m : qrun.matchups) {
          if (m.a_index == a && m.b_index == b) have.insert(m.attempt_index);
        }
        auto missing = missing_in_range(config.k_tie, have);
        if (!missing.empty()) manifest.matchups.push_back({qid, a, b, std::move(missing)});
      }
    }
  }
  return manifest;
}

}  // namespace sieve::run_store
