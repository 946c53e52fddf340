#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sieve/answers.hpp"
#include "sieve/run_store.hpp"
#include "sieve/select.hpp"
#include "sieve/synth.hpp"

using namespace sieve;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path = fs::temp_directory_path() /
           ("sieve-synth-" + std::to_string(stamp) + "-" + std::to_string(counter++));
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

synth::SynthConfig small_config() {
  synth::SynthConfig config;
  config.search.k_inf = 4;
  config.search.k_verif = 3;
  synth::SynthQuestion q;
  q.id = "q-a";
  q.correct_answer = "42";
  q.p_correct = 0.6;
  q.wrong_answers.push_back({"7", 1.0, std::nullopt});
  config.questions.push_back(q);
  return config;
}

// Fraction of parseable verdicts that endorse, over every response of `qid`.
double endorsement_fraction(const run_store::Run& run, const std::string& qid) {
  int endorse = 0;
  int parseable = 0;
  for (const auto& [index, entry] : run.question(qid).responses) {
    for (const auto& verdict : entry.full) {
      REQUIRE(verdict.has_value());
      if (*verdict == select::Verdict::unparseable) continue;
      ++parseable;
      if (*verdict == select::Verdict::correct) ++endorse;
    }
  }
  REQUIRE(parseable > 0);
  return static_cast<double>(endorse) / parseable;
}

}  // namespace

TEST_CASE("endorse_correct interpolates piecewise-linearly and clamps") {
  synth::SynthVerifier verifier;
  verifier.endorse_correct_points = {{0.2, 0.1}, {0.8, 0.7}};

  // Exactly on the knots.
  CHECK(synth::endorse_correct(verifier, 0.2) == doctest::Approx(0.1));
  CHECK(synth::endorse_correct(verifier, 0.8) == doctest::Approx(0.7));
  // Midpoint and an off-center point.
  CHECK(synth::endorse_correct(verifier, 0.5) == doctest::Approx(0.4));
  CHECK(synth::endorse_correct(verifier, 0.35) == doctest::Approx(0.25));
  // Clamped outside the knot range.
  CHECK(synth::endorse_correct(verifier, 0.0) == doctest::Approx(0.1));
  CHECK(synth::endorse_correct(verifier, 1.0) == doctest::Approx(0.7));

  synth::SynthVerifier flat;  // default: 0.9 everywhere
  CHECK(synth::endorse_correct(flat, 0.0) == doctest::Approx(0.9));
  CHECK(synth::endorse_correct(flat, 0.5) == doctest::Approx(0.9));
  CHECK(synth::endorse_correct(flat, 1.0) == doctest::Approx(0.9));
}

TEST_CASE("endorse_incorrect uses the per-answer override when present") {
  synth::SynthVerifier verifier;
  verifier.endorse_incorrect = 0.05;
  verifier.endorse_incorrect_by_answer["17"] = 0.6;

  CHECK(synth::endorse_incorrect(verifier, "17") == doctest::Approx(0.6));
  CHECK(synth::endorse_incorrect(verifier, "23") == doctest::Approx(0.05));
}

TEST_CASE("sampled composition tracks p_correct and wrong-answer weights") {
  synth::SynthConfig config;
  config.search.k_inf = 5000;
  config.search.k_verif = 1;
  synth::SynthQuestion q;
  q.id = "mc";
  q.correct_answer = "42";
  q.p_correct = 0.3;
  q.wrong_answers.push_back({"1", 2.0, std::nullopt});
  q.wrong_answers.push_back({"2", 1.0, std::nullopt});
  config.questions.push_back(q);

  run_store::Run run = synth::generate_synthetic_run(config, 9001);
  const run_store::QuestionRun& qrun = run.question("mc");
  REQUIRE(static_cast<int>(qrun.responses.size()) == 5000);

  int correct = 0;
  std::map<std::string, int> wrong_counts;
  for (const auto& [index, entry] : qrun.responses) {
    REQUIRE(entry.grade.has_value());
    REQUIRE(entry.grade->mode == "synthetic");
    REQUIRE(entry.record.final_answer.has_value());
    if (entry.grade->correct) {
      CHECK(*entry.record.final_answer == "42");
      ++correct;
    } else {
      ++wrong_counts[*entry.record.final_answer];
    }
  }
  // 5 sigma on a binomial fraction at n = 5000 is about 0.032.
  CHECK(correct / 5000.0 == doctest::Approx(0.3).epsilon(0.15));
  CHECK(std::abs(correct / 5000.0 - 0.3) < 0.04);

  int wrong_total = wrong_counts["1"] + wrong_counts["2"];
  CHECK(wrong_total == 5000 - correct);
  double frac_one = static_cast<double>(wrong_counts["1"]) / wrong_total;
  CHECK(std::abs(frac_one - 2.0 / 3.0) < 0.04);
}

TEST_CASE("fixed composition yields exact counts in a shuffled arrangement") {
  synth::SynthConfig config;
  config.search.k_inf = 20;
  config.search.k_verif = 1;
  synth::SynthQuestion q;
  q.id = "fixed";
  q.correct_answer = "5";
  q.correct_count = 12;
  q.wrong_answers.push_back({"6", 1.0, 5});
  q.wrong_answers.push_back({"8", 1.0, 3});
  config.questions.push_back(q);

  auto arrangement = [&](std::uint64_t seed) {
    run_store::Run run = synth::generate_synthetic_run(config, seed);
    std::vector<std::string> answers;
    for (const auto& [index, entry] : run.question("fixed").responses)
      answers.push_back(*entry.record.final_answer);
    return answers;
  };

  std::vector<std::string> a1 = arrangement(1);
  std::vector<std::string> a2 = arrangement(2);
  for (const auto& answers : {a1, a2}) {
    REQUIRE(answers.size() == 20);
    std::map<std::string, int> counts;
    for (const std::string& answer : answers) ++counts[answer];
    CHECK(counts["5"] == 12);
    CHECK(counts["6"] == 5);
    CHECK(counts["8"] == 3);
  }
  // Same multiset, different order: the shuffle is seeded.
  CHECK(a1 != a2);
}

TEST_CASE("verdict draws follow the endorsement and unparseable rates") {
  synth::SynthConfig config;
  config.search.k_inf = 4;
  config.search.k_verif = 2000;
  config.verifier.endorse_correct_points = {{0.0, 0.8}, {1.0, 0.8}};
  config.verifier.unparseable_rate = 0.25;
  synth::SynthQuestion q;
  q.id = "rates";
  q.correct_answer = "1";
  q.p_correct = 1.0;
  config.questions.push_back(q);

  run_store::Run run = synth::generate_synthetic_run(config, 7);
  int unparseable = 0, endorse = 0, total = 0;
  for (const auto& [index, entry] : run.question("rates").responses) {
    REQUIRE(static_cast<int>(entry.full.size()) == 2000);
    for (const auto& verdict : entry.full) {
      ++total;
      if (*verdict == select::Verdict::unparseable)
        ++unparseable;
      else if (*verdict == select::Verdict::correct)
        ++endorse;
    }
  }
  CHECK(total == 8000);
  CHECK(std::abs(unparseable / 8000.0 - 0.25) < 0.025);
  CHECK(std::abs(static_cast<double>(endorse) / (total - unparseable) - 0.8) < 0.03);
}

TEST_CASE("per-answer endorsement overrides shape incorrect verdicts") {
  synth::SynthConfig config;
  config.search.k_inf = 40;
  config.search.k_verif = 500;
  config.verifier.endorse_incorrect = 0.05;
  config.verifier.endorse_incorrect_by_answer["1"] = 0.55;
  synth::SynthQuestion q;
  q.id = "overrides";
  q.correct_answer = "42";
  q.p_correct = 0.0;
  q.wrong_answers.push_back({"1", 1.0, std::nullopt});
  q.wrong_answers.push_back({"2", 1.0, std::nullopt});
  config.questions.push_back(q);

  run_store::Run run = synth::generate_synthetic_run(config, 11);
  std::map<std::string, std::pair<int, int>> tallies;  // answer -> {endorse, total}
  for (const auto& [index, entry] : run.question("overrides").responses) {
    auto& [endorse, total] = tallies[*entry.record.final_answer];
    CHECK_FALSE(entry.grade->correct);
    for (const auto& verdict : entry.full) {
      ++total;
      if (*verdict == select::Verdict::correct) ++endorse;
    }
  }
  REQUIRE(tallies.count("1") == 1);
  REQUIRE(tallies.count("2") == 1);
  auto rate = [&](const std::string& answer) {
    auto [endorse, total] = tallies[answer];
    REQUIRE(total >= 5000);
    return static_cast<double>(endorse) / total;
  };
  CHECK(std::abs(rate("1") - 0.55) < 0.03);
  CHECK(std::abs(rate("2") - 0.05) < 0.03);
}

TEST_CASE("response quality drives the endorsement rate") {
  synth::SynthConfig config;
  config.search.k_inf = 10;
  config.search.k_verif = 1500;
  config.verifier.endorse_correct_points = {{0.0, 0.2}, {1.0, 0.9}};
  synth::SynthQuestion lo;
  lo.id = "lo";
  lo.correct_answer = "3";
  lo.p_correct = 1.0;
  lo.quality.kind = synth::QualityDist::Kind::constant;
  lo.quality.value = 0.0;
  synth::SynthQuestion hi = lo;
  hi.id = "hi";
  hi.quality.value = 1.0;
  config.questions.push_back(lo);
  config.questions.push_back(hi);

  run_store::Run run = synth::generate_synthetic_run(config, 3);
  CHECK(std::abs(endorsement_fraction(run, "lo") - 0.2) < 0.02);
  CHECK(std::abs(endorsement_fraction(run, "hi") - 0.9) < 0.02);
}

TEST_CASE("uniform quality varies endorsement per response") {
  synth::SynthConfig config;
  config.search.k_inf = 50;
  config.search.k_verif = 200;
  config.verifier.endorse_correct_points = {{0.0, 0.0}, {1.0, 1.0}};
  synth::SynthQuestion q;
  q.id = "spread";
  q.correct_answer = "9";
  q.p_correct = 1.0;
  q.quality.kind = synth::QualityDist::Kind::uniform;
  q.quality.lo = 0.0;
  q.quality.hi = 1.0;
  config.questions.push_back(q);

  run_store::Run run = synth::generate_synthetic_run(config, 5);
  int below = 0, above = 0;
  for (const auto& [index, entry] : run.question("spread").responses) {
    int endorse = 0;
    for (const auto& verdict : entry.full)
      if (*verdict == select::Verdict::correct) ++endorse;
    double frac = endorse / 200.0;
    if (frac < 0.3) ++below;
    if (frac > 0.7) ++above;
  }
  // Quality is drawn per response, so endorsement fractions spread out.
  CHECK(below >= 5);
  CHECK(above >= 5);
}

TEST_CASE("discrete quality picks knot values with the given weights") {
  synth::SynthConfig config;
  config.search.k_inf = 400;
  config.search.k_verif = 3;
  config.verifier.endorse_correct_points = {{0.0, 0.0}, {1.0, 1.0}};
  synth::SynthQuestion q;
  q.id = "knots";
  q.correct_answer = "2";
  q.p_correct = 1.0;
  q.quality.kind = synth::QualityDist::Kind::discrete;
  q.quality.points = {{0.0, 1.0}, {1.0, 3.0}};
  config.questions.push_back(q);

  run_store::Run run = synth::generate_synthetic_run(config, 13);
  int all_endorse = 0;
  for (const auto& [index, entry] : run.question("knots").responses) {
    int endorse = 0;
    for (const auto& verdict : entry.full)
      if (*verdict == select::Verdict::correct) ++endorse;
    // Endorse rate is exactly 0 or 1, so each response is unanimous.
    CHECK((endorse == 0 || endorse == 3));
    if (endorse == 3) ++all_endorse;
  }
  CHECK(std::abs(all_endorse / 400.0 - 0.75) < 0.11);
}

TEST_CASE("generated runs carry full question and response shape") {
  synth::SynthConfig config = small_config();
  synth::SynthQuestion second;
  second.id = "q-b";
  second.correct_answer = "1,000";
  second.p_correct = 1.0;
  config.questions.push_back(second);

  run_store::Run run = synth::generate_synthetic_run(config, 21);
  CHECK(run.has_meta);
  CHECK(run.meta.backend_kind == "synthetic");
  CHECK(run.meta.seed == 21);
  CHECK(run.meta.config.k_inf == 4);
  REQUIRE(run.question_order == std::vector<std::string>{"q-a", "q-b"});

  const run_store::QuestionRun& qa = run.question("q-a");
  CHECK(qa.question.text == "Synthetic question q-a.");
  CHECK(qa.question.style == "boxed");
  CHECK(qa.question.reference_answer == "42");
  CHECK(qa.question.reference_solution == "The final answer is 42.");
  REQUIRE(static_cast<int>(qa.responses.size()) == 4);
  for (const auto& [index, entry] : qa.responses) {
    CHECK(entry.record.question_id == "q-a");
    CHECK(entry.record.index == index);
    REQUIRE(entry.record.final_answer.has_value());
    CHECK(entry.record.text == "The final answer is " + *entry.record.final_answer + ".");
    CHECK(entry.full_verdicts(3).size() == 3);
    CHECK(entry.preliminary.empty());
    REQUIRE(entry.grade.has_value());
    CHECK(entry.grade->mode == "synthetic");
    CHECK(entry.grade->correct == (*entry.record.final_answer == "42"));
  }

  // The canonical form is stored even when the raw answer has separators.
  for (const auto& [index, entry] : run.question("q-b").responses) {
    CHECK(*entry.record.final_answer == answers::canonical_answer("1,000"));
    CHECK(entry.record.text == "The final answer is 1,000.");
    CHECK(entry.grade->correct);
  }
}

TEST_CASE("same seed reproduces a run byte for byte, other seeds do not") {
  synth::SynthConfig config = small_config();
  TempDir d1, d2, d3;
  synth::write_synthetic_run(config, 99, d1.str());
  synth::write_synthetic_run(config, 99, d2.str());
  synth::write_synthetic_run(config, 100, d3.str());

  std::string bytes1 = read_file(d1.path / "run.jsonl");
  REQUIRE_FALSE(bytes1.empty());
  CHECK(bytes1 == read_file(d2.path / "run.jsonl"));
  CHECK(bytes1 != read_file(d3.path / "run.jsonl"));
}

TEST_CASE("written synthetic runs load back with identical content") {
  synth::SynthConfig config = small_config();
  run_store::Run expected = synth::generate_synthetic_run(config, 4242);

  TempDir dir;
  synth::write_synthetic_run(config, 4242, dir.str());
  run_store::Run loaded = run_store::load_run(dir.str());

  CHECK(loaded.meta.backend_kind == "synthetic");
  CHECK(loaded.meta.seed == 4242);
  CHECK(loaded.meta.config.k_inf == expected.meta.config.k_inf);
  REQUIRE(loaded.question_order == expected.question_order);
  // seq: meta + question + per response (record + 3 verdicts + grade)
  CHECK(loaded.next_seq == 1 + 1 + 4 * (1 + 3 + 1));

  const run_store::QuestionRun& got = loaded.question("q-a");
  const run_store::QuestionRun& want = expected.question("q-a");
  CHECK(got.question.text == want.question.text);
  CHECK(got.question.reference_answer == want.question.reference_answer);
  REQUIRE(got.responses.size() == want.responses.size());
  for (const auto& [index, entry] : want.responses) {
    const run_store::ResponseEntry& other = got.responses.at(index);
    CHECK(other.record.final_answer == entry.record.final_answer);
    CHECK(other.record.text == entry.record.text);
    CHECK(other.full_verdicts(3) == entry.full_verdicts(3));
    CHECK(other.grade->correct == entry.grade->correct);
    CHECK(other.grade->mode == "synthetic");
  }
}

TEST_CASE("synthetic matchup provider emits alternating, seeded samples") {
  synth::SynthVerifier verifier;
  select::MatchupProvider provider =
      synth::make_synthetic_provider(verifier, {true, false, true}, 6, 77);

  std::vector<select::MatchupSample> samples = provider(0, 2);
  REQUIRE(static_cast<int>(samples.size()) == 6);
  for (int t = 0; t < 6; ++t) {
    CHECK(samples[t].a_index == 0);
    CHECK(samples[t].b_index == 2);
    CHECK(samples[t].attempt_index == t);
    CHECK(samples[t].order ==
          (t % 2 == 0 ? select::PresentedOrder::ab : select::PresentedOrder::ba));
  }

  // Same provider, same pair: identical answers. Different seed: not required
  // to differ pairwise, but the full verdict sequence does for this fixture.
  std::vector<select::MatchupSample> again = provider(0, 2);
  auto verdicts = [](const std::vector<select::MatchupSample>& list) {
    std::vector<select::MatchupVerdict> out;
    for (const auto& sample : list) out.push_back(sample.verdict);
    return out;
  };
  CHECK(verdicts(again) == verdicts(samples));

  select::MatchupProvider other =
      synth::make_synthetic_provider(verifier, {true, false, true}, 6, 78);
  CHECK(verdicts(other(0, 2)) != verdicts(samples));
}

TEST_CASE("synthetic matchups favor the correct side at comparison_accuracy") {
  synth::SynthVerifier verifier;
  verifier.comparison_accuracy = 0.9;

  auto a_win_fraction = [&](std::vector<bool> classes) {
    select::MatchupProvider provider =
        synth::make_synthetic_provider(verifier, std::move(classes), 4000, 123);
    int a_wins = 0, decided = 0;
    for (const select::MatchupSample& sample : provider(0, 1)) {
      if (sample.verdict == select::MatchupVerdict::unparseable) continue;
      ++decided;
      if (sample.verdict == select::MatchupVerdict::a_wins) ++a_wins;
    }
    REQUIRE(decided == 4000);
    return static_cast<double>(a_wins) / decided;
  };

  CHECK(std::abs(a_win_fraction({true, false}) - 0.9) < 0.025);
  CHECK(std::abs(a_win_fraction({false, true}) - 0.1) < 0.025);
  // Same class on both sides: a coin flip.
  CHECK(std::abs(a_win_fraction({true, true}) - 0.5) < 0.04);
  CHECK(std::abs(a_win_fraction({false, false}) - 0.5) < 0.04);
}

TEST_CASE("synthetic matchups emit unparseable samples at the configured rate") {
  synth::SynthVerifier verifier;
  verifier.unparseable_rate = 0.3;
  select::MatchupProvider provider =
      synth::make_synthetic_provider(verifier, {true, false}, 4000, 55);
  int unparseable = 0;
  for (const select::MatchupSample& sample : provider(0, 1))
    if (sample.verdict == select::MatchupVerdict::unparseable) ++unparseable;
  CHECK(std::abs(unparseable / 4000.0 - 0.3) < 0.04);
}

TEST_CASE("synthetic matchup provider rejects bad pairs and bad k_tie") {
  synth::SynthVerifier verifier;
  CHECK_THROWS_AS(synth::make_synthetic_provider(verifier, {true, false}, 0, 1),
                  std::invalid_argument);
  select::MatchupProvider provider =
      synth::make_synthetic_provider(verifier, {true, false}, 2, 1);
  CHECK_THROWS_AS(provider(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(provider(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(provider(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(provider(-1, 1), std::invalid_argument);
}

TEST_CASE("synth_config_from_json expands counts and spreads p_correct") {
  std::string text = R"({
    "search": {"k_inf": 6, "k_verif": 2},
    "verifier": {
      "endorse_correct": [[0.0, 0.3], [1.0, 0.9]],
      "endorse_incorrect": 0.2,
      "endorse_incorrect_by_answer": {"5": 0.4},
      "unparseable_rate": 0.1,
      "comparison_accuracy": 0.8
    },
    "questions": [
      {"id": "q", "count": 3, "correct_answer": "8", "p_correct": [0.2, 0.6],
       "wrong_answers": [{"answer": "9", "weight": 2.0}]},
      {"id": "solo", "correct_answer": "1", "p_correct": [0.4, 0.8],
       "wrong_answers": [{"answer": "2"}]}
    ]
  })";
  synth::SynthConfig config = synth::synth_config_from_json(text);

  CHECK(config.search.k_inf == 6);
  CHECK(config.search.k_verif == 2);
  CHECK(config.verifier.endorse_correct_points ==
        std::vector<std::pair<double, double>>{{0.0, 0.3}, {1.0, 0.9}});
  CHECK(config.verifier.endorse_incorrect == doctest::Approx(0.2));
  CHECK(config.verifier.endorse_incorrect_by_answer.at("5") == doctest::Approx(0.4));
  CHECK(config.verifier.unparseable_rate == doctest::Approx(0.1));
  CHECK(config.verifier.comparison_accuracy == doctest::Approx(0.8));

  REQUIRE(static_cast<int>(config.questions.size()) == 4);
  CHECK(config.questions[0].id == "q-1");
  CHECK(config.questions[1].id == "q-2");
  CHECK(config.questions[2].id == "q-3");
  CHECK(config.questions[0].p_correct == doctest::Approx(0.2));
  CHECK(config.questions[1].p_correct == doctest::Approx(0.4));
  CHECK(config.questions[2].p_correct == doctest::Approx(0.6));
  CHECK(config.questions[0].wrong_answers.size() == 1);
  CHECK(config.questions[0].wrong_answers[0].answer == "9");
  CHECK(config.questions[0].wrong_answers[0].weight == doctest::Approx(2.0));
  // A single copy with a range lands on the midpoint.
  CHECK(config.questions[3].id == "solo");
  CHECK(config.questions[3].p_correct == doctest::Approx(0.6));
}

TEST_CASE("synth_config_from_json parses every quality kind") {
  auto parse_quality = [](const std::string& quality_json) {
    std::string text = R"({"questions": [{"id": "x", "correct_answer": "1",
      "p_correct": 1.0, "quality": )" +
                       quality_json + "}]}";
    return synth::synth_config_from_json(text).questions.at(0).quality;
  };

  synth::QualityDist constant = parse_quality(R"({"kind": "constant", "value": 0.7})");
  CHECK(constant.kind == synth::QualityDist::Kind::constant);
  CHECK(constant.value == doctest::Approx(0.7));

  synth::QualityDist uniform = parse_quality(R"({"kind": "uniform", "lo": 0.1, "hi": 0.9})");
  CHECK(uniform.kind == synth::QualityDist::Kind::uniform);
  CHECK(uniform.lo == doctest::Approx(0.1));
  CHECK(uniform.hi == doctest::Approx(0.9));

  synth::QualityDist discrete =
      parse_quality(R"({"kind": "discrete", "points": [[0.0, 1.0], [1.0, 2.0]]})");
  CHECK(discrete.kind == synth::QualityDist::Kind::discrete);
  REQUIRE(discrete.points.size() == 2);
  CHECK(discrete.points[1].second == doctest::Approx(2.0));

  CHECK_THROWS_WITH_AS(parse_quality(R"({"kind": "bimodal"})"),
                       doctest::Contains("unknown quality kind"), std::invalid_argument);
}

TEST_CASE("synth_config_from_json rejects malformed input") {
  auto parse = [](const std::string& text) { return synth::synth_config_from_json(text); };

  SUBCASE("unknown keys anywhere") {
    CHECK_THROWS_WITH_AS(parse(R"({"questions": [], "extra": 1})"),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse(R"({"verifier": {"endorse_rate": 0.5},
                  "questions": [{"id": "a", "correct_answer": "1", "p_correct": 1.0}]})"),
        doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [{"id": "a", "correct_answer": "1", "p": 1.0}]})"),
        doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [{"id": "a", "correct_answer": "1", "p_correct": 0.5,
                  "wrong_answers": [{"answer": "2", "frequency": 3}]}]})"),
        doctest::Contains("unknown key"), std::invalid_argument);
  }

  SUBCASE("questions array is required") {
    CHECK_THROWS_WITH_AS(parse(R"({})"), doctest::Contains("questions array"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse(R"({"questions": {}})"), doctest::Contains("questions array"),
                         std::invalid_argument);
  }

  SUBCASE("p_correct must be a number or pair") {
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [{"id": "a", "correct_answer": "1", "p_correct": "high"}]})"),
        doctest::Contains("p_correct"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [{"id": "a", "correct_answer": "1",
                  "p_correct": [0.1, 0.2, 0.3]}]})"),
        doctest::Contains("p_correct"), std::invalid_argument);
  }

  SUBCASE("count must be positive") {
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [{"id": "a", "correct_answer": "1", "p_correct": 1.0,
                  "count": 0}]})"),
        doctest::Contains("count"), std::invalid_argument);
  }

  SUBCASE("fixed composition must sum to k_inf") {
    CHECK_THROWS_WITH_AS(
        parse(R"({"search": {"k_inf": 10},
                  "questions": [{"id": "a", "correct_answer": "1", "correct_count": 4,
                  "wrong_answers": [{"answer": "2", "count": 3}]}]})"),
        doctest::Contains("sum to 7"), std::invalid_argument);
  }

  SUBCASE("mixing counted wrong answers with sampled composition") {
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [{"id": "a", "correct_answer": "1", "p_correct": 0.5,
                  "wrong_answers": [{"answer": "2", "count": 3}]}]})"),
        doctest::Contains("correct_count"), std::invalid_argument);
  }

  SUBCASE("sampled wrong answers need positive weight") {
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [{"id": "a", "correct_answer": "1", "p_correct": 0.5,
                  "wrong_answers": [{"answer": "2", "weight": 0.0}]}]})"),
        doctest::Contains("weights must be positive"), std::invalid_argument);
  }

  SUBCASE("imperfect p_correct needs a wrong answer to sample") {
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [{"id": "a", "correct_answer": "1", "p_correct": 0.5}]})"),
        doctest::Contains("wrong answer"), std::invalid_argument);
  }

  SUBCASE("endorse_correct knots must be sorted with non-decreasing rates") {
    CHECK_THROWS_WITH_AS(
        parse(R"({"verifier": {"endorse_correct": [[0.5, 0.2], [0.1, 0.9]]},
                  "questions": [{"id": "a", "correct_answer": "1", "p_correct": 1.0}]})"),
        doctest::Contains("sorted"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse(R"({"verifier": {"endorse_correct": [[0.1, 0.9], [0.5, 0.2]]},
                  "questions": [{"id": "a", "correct_answer": "1", "p_correct": 1.0}]})"),
        doctest::Contains("non-decreasing"), std::invalid_argument);
  }

  SUBCASE("rates must lie in the unit interval") {
    CHECK_THROWS_WITH_AS(
        parse(R"({"verifier": {"unparseable_rate": 1.5},
                  "questions": [{"id": "a", "correct_answer": "1", "p_correct": 1.0}]})"),
        doctest::Contains("[0, 1]"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse(R"({"verifier": {"comparison_accuracy": -0.1},
                  "questions": [{"id": "a", "correct_answer": "1", "p_correct": 1.0}]})"),
        doctest::Contains("[0, 1]"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [{"id": "a", "correct_answer": "1", "p_correct": 1.2}]})"),
        doctest::Contains("[0, 1]"), std::invalid_argument);
  }

  SUBCASE("question ids must be unique after expansion") {
    CHECK_THROWS_WITH_AS(
        parse(R"({"questions": [
          {"id": "a", "correct_answer": "1", "p_correct": 1.0},
          {"id": "a", "correct_answer": "2", "p_correct": 1.0}]})"),
        doctest::Contains("unique"), std::invalid_argument);
  }
}

TEST_CASE("SynthConfig::validate rejects structural mistakes directly") {
  synth::SynthConfig config = small_config();

  SUBCASE("no questions") {
    config.questions.clear();
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("questions"),
                         std::invalid_argument);
  }
  SUBCASE("empty endorsement curve") {
    config.verifier.endorse_correct_points.clear();
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("endorse_correct"),
                         std::invalid_argument);
  }
  SUBCASE("negative correct_count") {
    config.questions[0].correct_count = -1;
    config.questions[0].wrong_answers[0].count = 5;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("negative"),
                         std::invalid_argument);
  }
  SUBCASE("uniform quality bounds out of order") {
    config.questions[0].quality.kind = synth::QualityDist::Kind::uniform;
    config.questions[0].quality.lo = 0.8;
    config.questions[0].quality.hi = 0.2;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("lo must not exceed hi"),
                         std::invalid_argument);
  }
  SUBCASE("discrete quality needs mass somewhere") {
    config.questions[0].quality.kind = synth::QualityDist::Kind::discrete;
    config.questions[0].quality.points = {{0.5, 0.0}};
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("zero"),
                         std::invalid_argument);
  }
  SUBCASE("empty question id") {
    config.questions[0].id.clear();
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("id"),
                         std::invalid_argument);
  }
  SUBCASE("search config errors surface through validate") {
    config.search.k_inf = 0;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("k_inf"),
                         std::invalid_argument);
  }
}
