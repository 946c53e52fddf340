#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "sieve/backend.hpp"
#include "sieve/batch.hpp"
#include "sieve/evaluate.hpp"
#include "sieve/grader.hpp"
#include "sieve/parse.hpp"
#include "sieve/pipeline.hpp"
#include "sieve/run_store.hpp"
#include "sieve/select.hpp"
#include "sieve/synth.hpp"
#include "sieve/templates.hpp"

namespace sieve::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

struct LoadedBackend {
  backend::BackendConfig config;
  std::shared_ptr<backend::Backend> backend;
};

LoadedBackend load_backend(const std::string& file) {
  if (file.empty()) throw std::runtime_error("a backend config file is required");
  LoadedBackend loaded;
  loaded.config = backend::backend_config_from_json(read_file(file));
  loaded.backend = backend::make_backend(loaded.config);
  return loaded;
}

std::function<std::int64_t()> clock_for(const backend::BackendConfig& config) {
  // Scripted runs get zero timestamps so artifacts are byte-stable.
  if (backend::is_scripted(config)) return [] { return std::int64_t{0}; };
  return [] {
    return static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
  };
}

run_store::Question question_from_json(const json& j) {
  for (const auto& item : j.items())
    if (item.key() != "id" && item.key() != "text" && item.key() != "style" &&
        item.key() != "reference_answer" && item.key() != "reference_solution")
      throw std::runtime_error("questions file: unknown key \"" + item.key() + "\"");
  run_store::Question q;
  q.id = j.at("id").get<std::string>();
  q.text = j.at("text").get<std::string>();
  q.style = j.value("style", "boxed");
  if (j.contains("reference_answer"))
    q.reference_answer = j["reference_answer"].get<std::string>();
  if (j.contains("reference_solution"))
    q.reference_solution = j["reference_solution"].get<std::string>();
  return q;
}

std::vector<run_store::Question> load_questions(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<run_store::Question> questions;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      questions.push_back(question_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return questions;
}

// Scores for all k_inf candidates of a question from stored full verdicts.
std::vector<select::CandidateScore> stored_scores(const run_store::QuestionRun& question,
                                                  const select::SearchConfig& config) {
  std::vector<select::CandidateScore> scores;
  scores.reserve(config.k_inf);
  for (int index = 0; index < config.k_inf; ++index) {
    auto it = question.responses.find(index);
    if (it == question.responses.end())
      throw std::runtime_error("question " + question.question.id + ": response " +
                               std::to_string(index) + " missing");
    std::vector<select::Verdict> verdicts = it->second.full_verdicts(config.k_verif);
    std::vector<select::VerificationAttempt> attempts;
    attempts.reserve(verdicts.size());
    for (std::size_t a = 0; a < verdicts.size(); ++a) {
      select::VerificationAttempt attempt;
      attempt.verdict = verdicts[a];
      attempt.stage = select::Stage::full;
      attempt.attempt_index = static_cast<int>(a);
      attempts.push_back(attempt);
    }
    scores.push_back(select::average_score(index, attempts));
  }
  return scores;
}

std::vector<std::optional<std::string>> stored_answers(const run_store::QuestionRun& question,
                                                       int k_inf) {
  std::vector<std::optional<std::string>> answers;
  answers.reserve(k_inf);
  for (int index = 0; index < k_inf; ++index)
    answers.push_back(question.responses.at(index).record.final_answer);
  return answers;
}

void print_selection(const run_store::SelectionRecord& record) {
  std::cout << record.question_id << '\t' << record.method << '\t' << record.chosen_index
            << '\t' << (record.final_answer ? *record.final_answer : "-");
  if (!record.response_text.empty()) std::cout << '\t' << record.response_text;
  std::cout << '\n';
}

evaluate::CurveOptions curve_options(const CurveFlags& flags, bool for_verification) {
  evaluate::CurveOptions options;
  options.k_inf_grid = flags.k_inf_grid;
  options.k_verif_grid = flags.k_verif_grid;
  options.seeds = flags.seeds;
  options.ambiguous_only = flags.ambiguous;
  options.omission.p_same = flags.p_same;
  options.omission.draw = flags.draw;
  options.omission.drop_consistency_correct = !flags.keep_consistency_correct;
  (void)for_verification;
  return options;
}

std::vector<evaluate::ScalingCell> run_curves(const run_store::Run& run,
                                              const CurveFlags& flags) {
  evaluate::GradeLookup grades = evaluate::grades_from_run(run);
  std::vector<evaluate::ScalingCell> cells;
  if (flags.metric == "verification" || flags.metric == "both") {
    auto v = evaluate::verification_curve(run, grades, curve_options(flags, true));
    cells.insert(cells.end(), v.begin(), v.end());
  }
  if (flags.metric == "consistency" || flags.metric == "both") {
    auto c = evaluate::consistency_curve(run, grades, curve_options(flags, false));
    cells.insert(cells.end(), c.begin(), c.end());
  }
  if (cells.empty() && flags.metric != "verification" && flags.metric != "consistency" &&
      flags.metric != "both")
    throw std::runtime_error("unknown metric \"" + flags.metric + "\"");
  return cells;
}

void emit_curves(const std::vector<evaluate::ScalingCell>& cells, const CurveFlags& flags) {
  std::string table = evaluate::cells_to_table(cells);
  if (flags.table_file.empty())
    std::cout << table;
  else
    write_file(flags.table_file, table);
  if (!flags.matrix_file.empty()) {
    std::string matrices;
    for (const char* metric : {"verification", "consistency"}) {
      bool any = false;
      for (const auto& cell : cells) any = any || cell.metric == metric;
      if (!any) continue;
      matrices += metric;
      matrices += '\n';
      matrices += evaluate::cells_to_matrix(cells, metric);
      matrices += '\n';
    }
    write_file(flags.matrix_file, matrices);
  }
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

}  // namespace

int cmd_generate(const GenerateOptions& options) {
  LoadedBackend loaded = load_backend(options.backend_file);
  templates::TemplateSet tset = templates::TemplateSet::load_dir(options.templates_dir);

  bool fresh = !fs::exists(fs::path(options.run_dir) / "run.jsonl");
  select::SearchConfig config;
  if (!options.config_file.empty())
    config = select::search_config_from_json(read_file(options.config_file));
  config.validate();

  run_store::RunWriter writer(options.run_dir,
                              fresh ? run_store::RunWriter::Mode::create
                                    : run_store::RunWriter::Mode::append,
                              clock_for(loaded.config));
  if (options.halt_after) writer.set_append_limit(*options.halt_after);

  if (fresh) {
    run_store::RunMeta meta;
    meta.config = config;
    meta.backend_kind = loaded.config.kind;
    meta.seed = options.seed;
    writer.put_meta(meta);
  } else {
    config = writer.state().meta.config;
  }

  if (!options.questions_file.empty())
    for (run_store::Question& q : load_questions(options.questions_file))
      if (writer.state().questions.find(q.id) == writer.state().questions.end())
        writer.add_question(q);

  struct Item {
    run_store::Question question;
    int index;
  };
  std::vector<Item> items;
  run_store::ResumeManifest manifest = resume_manifest(writer.state(), config);
  for (const run_store::GenerationUnit& unit : manifest.generation) {
    const run_store::Question& q = writer.state().question(unit.question_id).question;
    for (int index : unit.missing_indices) items.push_back({q, index});
  }

  backend::Backend* extraction =
      options.no_extract_backend ? nullptr : loaded.backend.get();
  batch::parallel_for(static_cast<int>(items.size()), options.parallel, [&](int i) {
    pipeline::GeneratedResponse response = pipeline::generate_response(
        *loaded.backend, items[i].question, tset, config, &writer.transcripts(), extraction);
    run_store::ResponseRecord record;
    record.question_id = items[i].question.id;
    record.index = items[i].index;
    record.final_answer = std::move(response.final_answer);
    record.text = std::move(response.text);
    record.transcript_ref = std::move(response.transcript_ref);
    record.prompt_tokens = response.prompt_tokens;
    record.output_tokens = response.output_tokens;
    writer.add_response(record);
  });

  std::cout << "generated\t" << items.size() << '\n';
  return kExitOk;
}

int cmd_verify(const VerifyOptions& options) {
  LoadedBackend loaded = load_backend(options.backend_file);
  templates::TemplateSet tset = templates::TemplateSet::load_dir(options.templates_dir);

  run_store::RunWriter writer(options.run_dir, run_store::RunWriter::Mode::append,
                              clock_for(loaded.config));
  if (options.halt_after) writer.set_append_limit(*options.halt_after);
  const select::SearchConfig config = writer.state().meta.config;

  struct Item {
    run_store::Question question;
    std::string candidate_text;
    int response_index;
    select::Stage stage;
    int attempt;
  };
  auto collect = [&](const std::vector<run_store::VerificationUnit>& units,
                     select::Stage stage) {
    std::vector<Item> items;
    for (const run_store::VerificationUnit& unit : units) {
      const run_store::QuestionRun& qrun = writer.state().question(unit.question_id);
      const run_store::ResponseEntry& entry = qrun.responses.at(unit.response_index);
      if (entry.record.text.empty())
        throw std::runtime_error("question " + unit.question_id + " response " +
                                 std::to_string(unit.response_index) +
                                 " has no stored text to verify");
      for (int attempt : unit.missing_attempts)
        items.push_back(
            {qrun.question, entry.record.text, unit.response_index, stage, attempt});
    }
    return items;
  };
  auto run_items = [&](const std::vector<Item>& items) {
    batch::parallel_for(static_cast<int>(items.size()), options.parallel, [&](int i) {
      const Item& item = items[i];
      pipeline::VerificationOutcome outcome = pipeline::run_verification_attempt(
          *loaded.backend, item.question, item.candidate_text, tset, config, item.stage,
          item.attempt, options.rewrite, &writer.transcripts());
      run_store::VerificationRecord record;
      record.question_id = item.question.id;
      record.response_index = item.response_index;
      record.attempt_index = item.attempt;
      record.stage = item.stage;
      record.verdict = outcome.attempt.verdict;
      record.transcript_ref = outcome.attempt.transcript_ref;
      writer.add_verification(record);
    });
    return items.size();
  };

  // The preliminary stage first; completing it fixes the pool the full stage
  // verifies, so the manifest is recomputed in between.
  std::size_t prelim_done =
      run_items(collect(resume_manifest(writer.state(), config).preliminary,
                        select::Stage::preliminary));
  std::size_t full_done = run_items(
      collect(resume_manifest(writer.state(), config).verification, select::Stage::full));

  std::cout << "verified\tpreliminary\t" << prelim_done << '\n';
  std::cout << "verified\tfull\t" << full_done << '\n';
  return kExitOk;
}

int cmd_select(const SelectOptions& options) {
  std::shared_ptr<backend::Backend> tie_backend;
  backend::BackendConfig backend_config;
  if (!options.backend_file.empty()) {
    LoadedBackend loaded = load_backend(options.backend_file);
    tie_backend = loaded.backend;
    backend_config = loaded.config;
  }
  std::optional<templates::TemplateSet> tset;
  if (!options.templates_dir.empty())
    tset = templates::TemplateSet::load_dir(options.templates_dir);

  run_store::RunWriter writer(options.run_dir, run_store::RunWriter::Mode::append,
                              clock_for(backend_config));
  if (options.halt_after) writer.set_append_limit(*options.halt_after);
  const select::SearchConfig config = writer.state().meta.config;

  if (options.method != "verification" && options.method != "consistency")
    throw std::runtime_error("unknown selection method \"" + options.method + "\"");

  for (const std::string& qid : writer.state().question_order) {
    const run_store::QuestionRun& qrun = writer.state().question(qid);

    const run_store::SelectionRecord* existing = nullptr;
    for (const run_store::SelectionRecord& record : qrun.selections)
      if (record.method == options.method) existing = &record;
    if (existing != nullptr) {
      print_selection(*existing);
      continue;
    }

    std::vector<std::optional<std::string>> answers = stored_answers(qrun, config.k_inf);
    run_store::SelectionRecord record;
    record.question_id = qid;
    record.method = options.method;

    if (options.method == "consistency") {
      select::SelectionResult result = select::select_by_consistency(answers);
      record.chosen_index = result.chosen_index;
      record.final_answer = answers[result.chosen_index];
      record.response_text = result.response_text;
    } else {
      std::vector<select::CandidateScore> scores = stored_scores(qrun, config);
      select::MatchupProvider provider = [&](int a, int b) {
        std::vector<select::MatchupSample> samples;
        std::set<int> present;
        for (const run_store::MatchupRecord& m : qrun.matchups) {
          if (m.a_index != a || m.b_index != b) continue;
          select::MatchupSample sample;
          sample.a_index = m.a_index;
          sample.b_index = m.b_index;
          sample.order = m.order;
          sample.verdict = m.verdict;
          sample.attempt_index = m.attempt_index;
          sample.transcript_ref = m.transcript_ref;
          samples.push_back(std::move(sample));
          present.insert(m.attempt_index);
        }
        for (int attempt = 0; attempt < config.k_tie; ++attempt) {
          if (present.count(attempt) != 0) continue;
          if (tie_backend == nullptr || !tset)
            throw std::runtime_error(
                "question " + qid +
                " needs tie-break comparisons; pass --backend and --templates");
          select::MatchupSample sample = pipeline::run_matchup_sample(
              *tie_backend, qrun.question, qrun.responses.at(a).record.text,
              qrun.responses.at(b).record.text, a, b, attempt, *tset, config,
              &writer.transcripts());
          run_store::MatchupRecord m;
          m.question_id = qid;
          m.a_index = a;
          m.b_index = b;
          m.attempt_index = attempt;
          m.order = sample.order;
          m.verdict = sample.verdict;
          m.transcript_ref = sample.transcript_ref;
          writer.add_matchup(m);
          samples.push_back(std::move(sample));
        }
        std::sort(samples.begin(), samples.end(),
                  [](const select::MatchupSample& x, const select::MatchupSample& y) {
                    return x.attempt_index < y.attempt_index;
                  });
        return samples;
      };
      select::SelectionResult result =
          select::select_by_verification(scores, answers, provider, config, true);
      record.chosen_index = result.chosen_index;
      record.final_answer = answers[result.chosen_index];
      record.s_best = result.s_best;
      record.degenerate = result.degenerate;
    }

    writer.add_selection(record);
    print_selection(record);
  }
  return kExitOk;
}

int cmd_grade(const GradeOptions& options) {
  if (options.mode != "exact" && options.mode != "lm")
    throw std::runtime_error("unknown grading mode \"" + options.mode + "\"");

  LoadedBackend loaded;
  std::optional<templates::TemplateSet> tset;
  if (options.mode == "lm") {
    loaded = load_backend(options.backend_file);
    tset = templates::TemplateSet::load_dir(options.templates_dir);
  }

  run_store::RunWriter writer(options.run_dir, run_store::RunWriter::Mode::append,
                              clock_for(loaded.config));
  if (options.halt_after) writer.set_append_limit(*options.halt_after);

  struct Item {
    run_store::Question question;
    int index;
    std::optional<std::string> final_answer;
    std::string text;
  };
  std::vector<Item> items;
  for (const std::string& qid : writer.state().question_order) {
    const run_store::QuestionRun& qrun = writer.state().question(qid);
    for (const auto& [index, entry] : qrun.responses)
      if (!entry.grade)
        items.push_back({qrun.question, index, entry.record.final_answer, entry.record.text});
  }

  if (options.mode == "exact") {
    for (const Item& item : items) {
      if (!item.question.reference_answer)
        throw std::runtime_error("question " + item.question.id +
                                 " has no reference answer for exact grading");
      run_store::GradeRecord record;
      record.question_id = item.question.id;
      record.response_index = item.index;
      record.correct = grader::grade_exact(item.final_answer, *item.question.reference_answer);
      record.mode = "exact";
      writer.add_grade(record);
    }
  } else {
    batch::parallel_for(static_cast<int>(items.size()), options.parallel, [&](int i) {
      const Item& item = items[i];
      grader::GradeOutcome outcome = grader::grade_with_lm(
          *loaded.backend, item.question, item.text, *tset, &writer.transcripts());
      run_store::GradeRecord record;
      record.question_id = item.question.id;
      record.response_index = item.index;
      record.correct = outcome.correct;
      record.mode = "lm";
      record.degenerate = outcome.degenerate;
      record.votes_true = outcome.votes_true;
      record.votes_valid = outcome.votes_valid;
      writer.add_grade(record);
    });
  }

  std::cout << "graded\t" << items.size() << '\n';
  return kExitOk;
}

int cmd_scale(const ScaleOptions& options) {
  run_store::Run run = run_store::load_run(options.run_dir);
  emit_curves(run_curves(run, options.curve), options.curve);
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& options) {
  synth::SynthConfig config = synth::synth_config_from_json(read_file(options.config_file));

  if (!options.emit_run_dir.empty()) {
    synth::write_synthetic_run(config, options.seed, options.emit_run_dir);
    std::cout << "emitted\t" << options.emit_run_dir << '\n';
  }

  if (options.curve.k_inf_grid.empty()) {
    if (options.emit_run_dir.empty()) std::cout << "ok\n";
    return kExitOk;
  }

  run_store::Run run = synth::generate_synthetic_run(config, options.seed);
  std::vector<evaluate::ScalingCell> cells = run_curves(run, options.curve);
  emit_curves(cells, options.curve);

  if (options.trend) {
    for (const char* metric : {"verification", "consistency"}) {
      std::vector<double> xs;
      std::vector<double> ys;
      for (const evaluate::ScalingCell& cell : cells) {
        if (cell.metric != metric) continue;
        xs.push_back(std::string(metric) == "verification" ? cell.k_verif : cell.k_inf);
        ys.push_back(cell.accuracy);
      }
      if (xs.size() < 2) continue;
      double rho = evaluate::spearman_rho(xs, ys);
      double p =
          evaluate::spearman_trend_pvalue(xs, ys, options.permutations, options.trend_seed);
      std::cout << "trend\t" << metric << '\t' << format_double(rho) << '\t'
                << format_double(p) << '\n';
    }
  }
  return kExitOk;
}

int cmd_bench(const BenchOptions& options) {
  LoadedBackend loaded = load_backend(options.backend_file);
  templates::TemplateSet tset = templates::TemplateSet::load_dir(options.templates_dir);

  std::istringstream in(read_file(options.entries_file));
  std::string line;
  int line_no = 0;
  int comparison_total = 0, comparison_ok = 0;
  int scoring_total = 0, scoring_ok = 0;
  std::string out;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(options.entries_file + " line " + std::to_string(line_no) +
                               ": " + e.what());
    }

    if (j.contains("solution_a")) {
      int expected = j.at("correct").get<int>();
      if (expected != 1 && expected != 2)
        throw std::runtime_error(options.entries_file + " line " + std::to_string(line_no) +
                                 ": correct must be 1 or 2");
      Conversation conv;
      conv.params.temperature = 0.0;
      conv.add_user(templates::render(tset.get("bench_comparison"),
                                      {j.at("question").get<std::string>(),
                                       j.at("solution_a").get<std::string>(),
                                       j.at("solution_b").get<std::string>()}));
      backend::Completion completion = loaded.backend->complete(conv);
      std::optional<int> choice = parse::parse_matchup_choice(completion.text);
      bool ok = choice && *choice == expected;
      ++comparison_total;
      if (ok) ++comparison_ok;
      out += "row\t" + std::to_string(line_no) + "\tcomparison\t" + std::to_string(expected) +
             "\t" + (choice ? std::to_string(*choice) : "-") + "\t" + (ok ? "1" : "0") + "\n";
    } else {
      std::string label = j.at("label").get<std::string>();
      if (label != "correct" && label != "incorrect")
        throw std::runtime_error(options.entries_file + " line " + std::to_string(line_no) +
                                 ": label must be correct or incorrect");
      bool expected = label == "correct";
      Conversation conv;
      conv.params.temperature = 0.0;
      conv.add_user(templates::render(tset.get("bench_scoring_1"),
                                      {j.at("question").get<std::string>(),
                                       j.at("solution").get<std::string>()}));
      backend::Completion first = loaded.backend->complete(conv);
      conv.add_model(std::move(first.text));
      conv.add_user(tset.get("bench_scoring_2").text);
      backend::Completion second = loaded.backend->complete(conv);
      std::optional<bool> verdict = parse::parse_scoring_choice(second.text);
      bool ok = verdict && *verdict == expected;
      ++scoring_total;
      if (ok) ++scoring_ok;
      out += "row\t" + std::to_string(line_no) + "\tscoring\t" + label + "\t" +
             (verdict ? (*verdict ? "correct" : "incorrect") : "-") + "\t" +
             (ok ? "1" : "0") + "\n";
    }
  }

  auto summary = [&](const char* kind, int total, int good) {
    if (total == 0) return;
    out += "summary\t";
    out += kind;
    out += "\t" + std::to_string(total) + "\t" + std::to_string(good) + "\t" +
           format_double(static_cast<double>(good) / total) + "\n";
  };
  summary("comparison", comparison_total, comparison_ok);
  summary("scoring", scoring_total, scoring_ok);

  if (options.out_file.empty())
    std::cout << out;
  else
    write_file(options.out_file, out);
  return kExitOk;
}

int cmd_cost(const CostOptions& options) {
  evaluate::CostAssumptions assumptions;
  assumptions.tokens_per_attempt = options.tokens_per_attempt;
  assumptions.price_per_million_tokens = options.price_per_million;
  assumptions.cost_reduction = options.reduction;
  evaluate::CostEstimate estimate =
      evaluate::estimate_cost(options.k_inf, options.k_verif, assumptions);
  char dollars[32];
  std::snprintf(dollars, sizeof dollars, "%.2f", estimate.dollars);
  std::cout << "total_tokens\t" << estimate.total_tokens << '\n';
  std::cout << "dollars\t$" << dollars << '\n';
  return kExitOk;
}

}  // namespace sieve::cli
