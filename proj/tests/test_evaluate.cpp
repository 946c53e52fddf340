#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sieve/answers.hpp"
#include "sieve/evaluate.hpp"
#include "sieve/rng.hpp"
#include "sieve/run_store.hpp"
#include "sieve/select.hpp"

using namespace sieve;
using evaluate::CurveOptions;
using evaluate::OmissionConfig;
using evaluate::ScalingCell;
using evaluate::SubsampleView;
using select::Verdict;

namespace {

constexpr Verdict C = Verdict::correct;
constexpr Verdict E = Verdict::error_found;
constexpr Verdict U = Verdict::unparseable;

long long choose(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Exhaustive pass@k: fraction of k-subsets of {0..n-1} that intersect the
// first c elements.
double brute_pass_at_k(int n, int c, int k) {
  long long hits = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    ++total;
    if ((mask & ((1u << c) - 1)) != 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

void add_response(run_store::QuestionRun& q, int index,
                  std::optional<std::string> answer, std::vector<Verdict> verdicts,
                  bool correct) {
  auto& entry = q.responses[index];
  entry.record.question_id = q.question.id;
  entry.record.index = index;
  entry.record.final_answer = std::move(answer);
  entry.record.text = "response " + std::to_string(index);
  for (Verdict v : verdicts) entry.full.emplace_back(v);
  run_store::GradeRecord g;
  g.question_id = q.question.id;
  g.response_index = index;
  g.correct = correct;
  entry.grade = g;
}

run_store::QuestionRun& add_question(run_store::Run& run, const std::string& id) {
  run.question_order.push_back(id);
  auto& q = run.questions[id];
  q.question.id = id;
  q.question.text = "question " + id;
  return q;
}

// Three questions, six responses each, three recorded attempts per response,
// with unparseable attempts, an answerless degenerate, and an all-answerless
// question mixed in.
run_store::Run make_curve_run() {
  run_store::Run run;
  run.has_meta = true;

  auto& q1 = add_question(run, "q1");
  add_response(q1, 0, "10", {C, C, C}, true);
  add_response(q1, 1, "11", {C, C, E}, false);
  add_response(q1, 2, "10", {E, E, E}, true);
  add_response(q1, 3, std::nullopt, {U, U, U}, false);
  add_response(q1, 4, "12", {C, E, U}, false);
  add_response(q1, 5, "10", {E, C, C}, true);

  auto& q2 = add_question(run, "q2");
  for (int i = 0; i < 6; ++i)
    add_response(q2, i, std::nullopt, {i % 2 ? C : E, C, E}, false);

  auto& q3 = add_question(run, "q3");
  for (int i = 0; i < 6; ++i)
    add_response(q3, i, i % 2 ? "8" : "7", {i % 2 ? C : E, i % 2 ? C : E, C},
                 i % 2 == 0);
  return run;
}

// Reference selection over a subsample: average the drawn verdicts per drawn
// response, skip unparseables, prefer non-degenerates, break ties by draw
// position. Kept deliberately separate from the library's selection helpers.
int reference_best_position(const run_store::QuestionRun& question,
                            const SubsampleView& view) {
  int best = -1;
  double best_avg = -1.0;
  bool best_degenerate = true;
  for (std::size_t p = 0; p < view.response_indices.size(); ++p) {
    const auto& entry = question.responses.at(view.response_indices[p]);
    int parseable = 0, endorsed = 0;
    for (int attempt : view.verification_indices[p]) {
      Verdict v = *entry.full[attempt];
      if (v == U) continue;
      ++parseable;
      if (v == C) ++endorsed;
    }
    bool degenerate = parseable == 0;
    double avg = degenerate ? 0.0 : static_cast<double>(endorsed) / parseable;
    bool better;
    if (best == -1)
      better = true;
    else if (degenerate != best_degenerate)
      better = !degenerate;
    else
      better = avg > best_avg;
    if (better) {
      best = static_cast<int>(p);
      best_avg = avg;
      best_degenerate = degenerate;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("pass_at_k matches exhaustive enumeration") {
  for (int n = 1; n <= 8; ++n)
    for (int c = 0; c <= n; ++c)
      for (int k = 1; k <= n; ++k) {
        CAPTURE(n);
        CAPTURE(c);
        CAPTURE(k);
        CHECK(evaluate::pass_at_k(n, c, k) ==
              doctest::Approx(brute_pass_at_k(n, c, k)).epsilon(1e-12));
      }
}

TEST_CASE("pass_at_k handles large pools exactly") {
  // 1 - (199/200)(198/199)...(150/151) telescopes to 1 - 150/200.
  CHECK(evaluate::pass_at_k(200, 1, 50) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(evaluate::pass_at_k(200, 0, 50) == 0.0);
  CHECK(evaluate::pass_at_k(200, 151, 50) == 1.0);  // k > n - c
  CHECK(evaluate::pass_at_k(5, 5, 1) == 1.0);
  CHECK_THROWS_AS(evaluate::pass_at_k(0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::pass_at_k(5, 6, 1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::pass_at_k(5, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::pass_at_k(5, 2, 6), std::invalid_argument);
}

TEST_CASE("subsampling is deterministic and prefix-stable") {
  run_store::Run run = make_curve_run();
  const auto& q1 = run.question("q1");

  SubsampleView small = evaluate::subsample(q1, 3, 2, 42);
  SubsampleView again = evaluate::subsample(q1, 3, 2, 42);
  CHECK(small.response_indices == again.response_indices);
  CHECK(small.verification_indices == again.verification_indices);

  // Growing either budget extends the draw instead of reshuffling it.
  SubsampleView wider = evaluate::subsample(q1, 6, 2, 42);
  REQUIRE(wider.response_indices.size() == 6);
  for (std::size_t i = 0; i < small.response_indices.size(); ++i)
    CHECK(wider.response_indices[i] == small.response_indices[i]);

  SubsampleView deeper = evaluate::subsample(q1, 3, 3, 42);
  for (std::size_t p = 0; p < small.verification_indices.size(); ++p)
    for (std::size_t i = 0; i < small.verification_indices[p].size(); ++i)
      CHECK(deeper.verification_indices[p][i] == small.verification_indices[p][i]);

  // Every draw is a set of valid indices.
  std::set<int> seen(wider.response_indices.begin(), wider.response_indices.end());
  CHECK(seen.size() == 6);
  for (const auto& attempts : deeper.verification_indices) {
    std::set<int> distinct(attempts.begin(), attempts.end());
    CHECK(distinct.size() == attempts.size());
    for (int a : attempts) CHECK((a >= 0 && a < 3));
  }

  // A different seed reshuffles.
  bool any_difference = false;
  for (std::uint64_t seed = 43; seed < 48 && !any_difference; ++seed)
    any_difference = evaluate::subsample(q1, 6, 0, seed).response_indices !=
                     wider.response_indices;
  CHECK(any_difference);

  // The attempt draw of a response depends only on its original index, not
  // on which responses were drawn alongside it.
  SubsampleView full_view = evaluate::subsample(q1, 6, 2, 42);
  for (std::size_t p = 0; p < small.response_indices.size(); ++p) {
    int original = small.response_indices[p];
    for (std::size_t w = 0; w < full_view.response_indices.size(); ++w)
      if (full_view.response_indices[w] == original)
        CHECK(full_view.verification_indices[w] == small.verification_indices[p]);
  }
}

TEST_CASE("subsampling names its deficits") {
  run_store::Run run = make_curve_run();
  const auto& q1 = run.question("q1");
  try {
    evaluate::subsample(q1, 9, 0, 1);
    FAIL("expected a deficit error");
  } catch (const std::runtime_error& e) {
    std::string what = e.what();
    CHECK(what.find("k_inf=9") != std::string::npos);
    CHECK(what.find("run has 6") != std::string::npos);
  }
  try {
    evaluate::subsample(q1, 6, 4, 1);
    FAIL("expected a deficit error");
  } catch (const std::runtime_error& e) {
    std::string what = e.what();
    CHECK(what.find("k_verif=4") != std::string::npos);
    CHECK(what.find("run has 3") != std::string::npos);
  }
  CHECK_THROWS_AS(evaluate::subsample(q1, 0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::subsample(q1, 1, -1, 1), std::invalid_argument);

  // A hole in the attempt record is an error, not a shorter draw.
  run_store::Run holes;
  auto& q = add_question(holes, "qh");
  add_response(q, 0, "1", {C, C}, true);
  q.responses[0].full[1] = std::nullopt;
  CHECK_THROWS_AS(evaluate::subsample(q, 1, 1, 1), std::runtime_error);

  // Sparse response indices are rejected outright.
  run_store::Run sparse;
  auto& qs = add_question(sparse, "qs");
  add_response(qs, 0, "1", {C}, true);
  add_response(qs, 2, "1", {C}, true);
  CHECK_THROWS_AS(evaluate::subsample(qs, 1, 0, 1), std::runtime_error);
}

TEST_CASE("grade lookups come straight from the run") {
  run_store::Run run = make_curve_run();
  evaluate::GradeLookup grades = evaluate::grades_from_run(run);
  CHECK(grades("q1", 0));
  CHECK_FALSE(grades("q1", 1));
  CHECK_THROWS_AS(grades("q1", 99), std::runtime_error);
  CHECK_THROWS_AS(grades("missing", 0), std::invalid_argument);

  run.questions["q1"].responses[0].grade.reset();
  CHECK_THROWS_AS(grades("q1", 0), std::runtime_error);
}

TEST_CASE("prob_all_same is an exact hypergeometric") {
  // 199 of 200 correct, 50 drawn: only the all-correct branch contributes,
  // and the product telescopes to 150/200.
  CHECK(evaluate::prob_all_same(200, 199, 50) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(evaluate::prob_all_same(4, 2, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(evaluate::prob_all_same(10, 0, 4) == 1.0);
  CHECK(evaluate::prob_all_same(10, 10, 4) == 1.0);
  CHECK(evaluate::prob_all_same(10, 5, 1) == 1.0);
  CHECK_THROWS_AS(evaluate::prob_all_same(10, 11, 1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::prob_all_same(10, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::prob_all_same(10, 5, 11), std::invalid_argument);
}

TEST_CASE("the ambiguous subset applies its three rules in run order") {
  run_store::Run run;
  // qa: nothing correct; the k-draw can never contain a correct response.
  auto& qa = add_question(run, "qa");
  add_response(qa, 0, "1", {C}, false);
  add_response(qa, 1, "2", {C}, false);
  add_response(qa, 2, "3", {C}, false);
  add_response(qa, 3, "4", {C}, false);
  // qb: plurality voting on the full pool already gets it right.
  auto& qb = add_question(run, "qb");
  add_response(qb, 0, "7", {C}, true);
  add_response(qb, 1, "7", {C}, true);
  add_response(qb, 2, "9", {C}, false);
  add_response(qb, 3, "5", {C}, false);
  // qc: one correct response hiding behind a wrong plurality.
  auto& qc = add_question(run, "qc");
  add_response(qc, 0, "9", {C}, false);
  add_response(qc, 1, "9", {C}, false);
  add_response(qc, 2, "9", {C}, false);
  add_response(qc, 3, "7", {C}, true);
  // qd: two vs two, the tie resolving to a wrong answer.
  auto& qd = add_question(run, "qd");
  add_response(qd, 0, "5", {C}, false);
  add_response(qd, 1, "5", {C}, false);
  add_response(qd, 2, "7", {C}, true);
  add_response(qd, 3, "7", {C}, true);

  evaluate::GradeLookup grades = evaluate::grades_from_run(run);
  const int k = 4;  // draw everything, so rule one depends only on the pool

  OmissionConfig lax;  // p_same = 1.0 disables the one-sidedness rule
  lax.p_same = 1.0;
  lax.draw = 2;
  CHECK(evaluate::ambiguous_subset(run, grades, k, 1, lax) ==
        std::vector<std::string>{"qc", "qd"});

  OmissionConfig keep_voted = lax;
  keep_voted.drop_consistency_correct = false;
  CHECK(evaluate::ambiguous_subset(run, grades, k, 1, keep_voted) ==
        std::vector<std::string>{"qb", "qc", "qd"});

  // qc's pool is one-sided: both draws miss the single correct response
  // with probability 1/2, above a 0.4 ceiling. qd's pool splits 2-2 and
  // stays below it.
  OmissionConfig strict = lax;
  strict.p_same = 0.4;
  CHECK(evaluate::ambiguous_subset(run, grades, k, 1, strict) ==
        std::vector<std::string>{"qd"});

  // An oversized draw clamps to the pool instead of failing.
  OmissionConfig oversized = strict;
  oversized.draw = 50;
  CHECK(evaluate::ambiguous_subset(run, grades, k, 1, oversized) ==
        std::vector<std::string>{"qc", "qd"});
}

TEST_CASE("the verification curve agrees with a reference reimplementation") {
  run_store::Run run = make_curve_run();
  evaluate::GradeLookup grades = evaluate::grades_from_run(run);
  CurveOptions options;
  options.k_inf_grid = {2, 4, 6};
  options.k_verif_grid = {1, 3};
  options.seeds = {1, 2, 3};

  auto cells = evaluate::verification_curve(run, grades, options);
  REQUIRE(cells.size() == 3 * 2 * 3);

  for (const ScalingCell& cell : cells) {
    CHECK(cell.metric == "verification");
    CHECK(cell.n_questions == 3);
    CHECK(cell.accuracy ==
          doctest::Approx(static_cast<double>(cell.n_correct) / cell.n_questions));

    int expected_correct = 0;
    for (const std::string& qid : run.question_order) {
      const auto& question = run.question(qid);
      SubsampleView view = evaluate::subsample(question, cell.k_inf, cell.k_verif, cell.seed);
      int best = reference_best_position(question, view);
      if (grades(qid, view.response_indices[best])) ++expected_correct;
    }
    CAPTURE(cell.k_inf);
    CAPTURE(cell.k_verif);
    CAPTURE(cell.seed);
    CHECK(cell.n_correct == expected_correct);
  }

  // Byte-identical on a rerun.
  CHECK(evaluate::cells_to_table(cells) ==
        evaluate::cells_to_table(evaluate::verification_curve(run, grades, options)));

  CurveOptions bad = options;
  bad.k_verif_grid.clear();
  CHECK_THROWS_AS(evaluate::verification_curve(run, grades, bad), std::invalid_argument);
  bad = options;
  bad.seeds.clear();
  CHECK_THROWS_AS(evaluate::verification_curve(run, grades, bad), std::invalid_argument);
}

TEST_CASE("the consistency curve counts plurality wins") {
  run_store::Run run = make_curve_run();
  evaluate::GradeLookup grades = evaluate::grades_from_run(run);
  CurveOptions options;
  options.k_inf_grid = {2, 6};
  options.seeds = {5, 6};

  auto cells = evaluate::consistency_curve(run, grades, options);
  REQUIRE(cells.size() == 4);
  for (const ScalingCell& cell : cells) {
    CHECK(cell.metric == "consistency");
    CHECK(cell.k_verif == 0);
    CHECK(cell.n_questions == 3);

    int expected_correct = 0;
    for (const std::string& qid : run.question_order) {
      const auto& question = run.question(qid);
      SubsampleView view = evaluate::subsample(question, cell.k_inf, 0, cell.seed);
      // Plurality by canonical answer, ties to the earliest draw position;
      // no parseable answers means the question scores zero.
      std::map<std::string, int> counts;
      std::map<std::string, std::size_t> first;
      for (std::size_t p = 0; p < view.response_indices.size(); ++p) {
        const auto& answer =
            question.responses.at(view.response_indices[p]).record.final_answer;
        if (!answer) continue;
        std::string canon = answers::canonical_answer(*answer);
        if (!counts.count(canon)) first[canon] = p;
        ++counts[canon];
      }
      if (counts.empty()) continue;
      std::string winner;
      int best_count = -1;
      std::size_t best_first = 0;
      for (const auto& [answer, count] : counts) {
        if (count > best_count ||
            (count == best_count && first[answer] < best_first)) {
          winner = answer;
          best_count = count;
          best_first = first[answer];
        }
      }
      if (grades(qid, view.response_indices[first[winner]])) ++expected_correct;
    }
    CAPTURE(cell.k_inf);
    CAPTURE(cell.seed);
    CHECK(cell.n_correct == expected_correct);
  }

  // q2 is all answerless: with only q2 in the run the curve scores zero
  // rather than failing.
  run_store::Run lone;
  auto& q2 = add_question(lone, "q2");
  for (int i = 0; i < 3; ++i) add_response(q2, i, std::nullopt, {C}, false);
  evaluate::GradeLookup lone_grades = evaluate::grades_from_run(lone);
  CurveOptions small;
  small.k_inf_grid = {2};
  small.seeds = {1};
  auto lone_cells = evaluate::consistency_curve(lone, lone_grades, small);
  REQUIRE(lone_cells.size() == 1);
  CHECK(lone_cells[0].n_correct == 0);
  CHECK(lone_cells[0].accuracy == 0.0);
}

TEST_CASE("the ablation finds the equal-error threshold") {
  // Correct solutions draw at most two flags; incorrect ones at least three.
  auto report = evaluate::ablation_rates({0, 1, 2, 0}, {5, 4, 3, 5}, 5);
  CHECK(report.threshold == 2);
  CHECK(report.fpr == 0.0);
  CHECK(report.fnr == 0.0);
  REQUIRE(report.fpr_by_threshold.size() == 6);
  REQUIRE(report.fnr_by_threshold.size() == 6);
  CHECK(report.fpr_by_threshold[0] == doctest::Approx(0.5));  // counts 1 and 2 flag
  CHECK(report.fnr_by_threshold[5] == 1.0);                   // everything passes at 5
  CHECK(std::is_sorted(report.fpr_by_threshold.rbegin(), report.fpr_by_threshold.rend()));
  CHECK(std::is_sorted(report.fnr_by_threshold.begin(), report.fnr_by_threshold.end()));

  CHECK_THROWS_AS(evaluate::ablation_rates({}, {1}, 5), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::ablation_rates({1}, {}, 5), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::ablation_rates({6}, {1}, 5), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::ablation_rates({-1}, {1}, 5), std::invalid_argument);
}

TEST_CASE("the chosen ablation threshold is the lowest minimizer") {
  for (int seed = 0; seed < 20; ++seed) {
    rng::Stream stream(rng::mix({static_cast<std::uint64_t>(seed), rng::fnv1a("ablation")}));
    const int attempts = 10;
    std::vector<int> correct, incorrect;
    for (int i = 0; i < 30; ++i) correct.push_back(static_cast<int>(stream.below(5)));
    for (int i = 0; i < 30; ++i) incorrect.push_back(3 + static_cast<int>(stream.below(8)));
    auto report = evaluate::ablation_rates(correct, incorrect, attempts);

    double best_gap = 2.0;
    int best_t = 0;
    for (int t = 0; t <= attempts; ++t) {
      double gap = std::fabs(report.fpr_by_threshold[t] - report.fnr_by_threshold[t]);
      if (gap < best_gap) {
        best_gap = gap;
        best_t = t;
      }
    }
    CHECK(report.threshold == best_t);
    CHECK(report.fpr == report.fpr_by_threshold[best_t]);
    CHECK(report.fnr == report.fnr_by_threshold[best_t]);
  }
}

TEST_CASE("cost estimates multiply out exactly") {
  evaluate::CostAssumptions defaults;
  auto estimate = evaluate::estimate_cost(200, 50, defaults);
  CHECK(estimate.total_tokens == 130000000LL);
  CHECK(estimate.dollars == doctest::Approx(650.0).epsilon(1e-12));

  defaults.cost_reduction = 0.70;
  CHECK(evaluate::estimate_cost(200, 50, defaults).dollars ==
        doctest::Approx(195.0).epsilon(1e-9));

  evaluate::CostAssumptions tiny{1000, 2.0, 0.0};
  auto small = evaluate::estimate_cost(1, 1, tiny);
  CHECK(small.total_tokens == 1000);
  CHECK(small.dollars == doctest::Approx(0.002));

  CHECK_THROWS_AS(evaluate::estimate_cost(0, 1, defaults), std::invalid_argument);
  defaults.cost_reduction = 1.5;
  CHECK_THROWS_AS(evaluate::estimate_cost(1, 1, defaults), std::invalid_argument);
}

TEST_CASE("spearman handles ties, direction, and degeneracy") {
  CHECK(evaluate::spearman_rho({1, 2, 3, 4}, {1, 1, 2, 2}) ==
        doctest::Approx(0.8944271909999159).epsilon(1e-12));
  CHECK(evaluate::spearman_rho({1, 2, 3, 4}, {10, 20, 25, 90}) == doctest::Approx(1.0));
  CHECK(evaluate::spearman_rho({1, 2, 3, 4}, {9, 7, 4, 2}) == doctest::Approx(-1.0));
  CHECK(evaluate::spearman_rho({1, 2, 3, 4}, {5, 5, 5, 5}) == 0.0);
  CHECK(evaluate::spearman_rho({2, 2, 2, 2}, {1, 2, 3, 4}) == 0.0);
  CHECK_THROWS_AS(evaluate::spearman_rho({1, 2}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate::spearman_rho({1}, {1}), std::invalid_argument);
}

TEST_CASE("the permutation test rewards monotone trends") {
  std::vector<double> xs, up, down;
  for (int i = 0; i < 8; ++i) {
    xs.push_back(i);
    up.push_back(i * 2.0 + 1.0);
    down.push_back(-i * 1.5);
  }
  double p_up = evaluate::spearman_trend_pvalue(xs, up, 999, 7);
  CHECK(p_up >= 1.0 / 1000);
  CHECK(p_up <= 0.005);

  // A perfectly reversed trend is never beaten: every shuffle ties or wins.
  double p_down = evaluate::spearman_trend_pvalue(xs, down, 999, 7);
  CHECK(p_down == doctest::Approx(1.0));

  CHECK(evaluate::spearman_trend_pvalue(xs, up, 999, 7) == p_up);
  CHECK_THROWS_AS(evaluate::spearman_trend_pvalue(xs, up, 0, 7), std::invalid_argument);
}

TEST_CASE("the cell table is sorted and fixed-precision") {
  std::vector<ScalingCell> cells;
  cells.push_back({"verification", 10, 5, 2, 4, 3, 0.75});
  cells.push_back({"consistency", 10, 0, 1, 4, 2, 0.5});
  cells.push_back({"verification", 5, 5, 1, 4, 1, 0.25});
  CHECK(evaluate::cells_to_table(cells) ==
        "metric\tk_inf\tk_verif\tseed\tn_questions\tn_correct\taccuracy\n"
        "consistency\t10\t0\t1\t4\t2\t0.500000\n"
        "verification\t5\t5\t1\t4\t1\t0.250000\n"
        "verification\t10\t5\t2\t4\t3\t0.750000\n");
  CHECK(evaluate::cells_to_table({}) ==
        "metric\tk_inf\tk_verif\tseed\tn_questions\tn_correct\taccuracy\n");
}

TEST_CASE("the matrix averages seeds and marks absent combinations") {
  std::vector<ScalingCell> cells;
  cells.push_back({"verification", 5, 5, 1, 4, 1, 0.25});
  cells.push_back({"verification", 5, 5, 2, 4, 3, 0.75});
  cells.push_back({"verification", 10, 10, 1, 4, 4, 1.0});
  cells.push_back({"consistency", 10, 0, 1, 4, 0, 0.0});  // other metric, ignored
  CHECK(evaluate::cells_to_matrix(cells, "verification") ==
        "k_verif\\k_inf\t5\t10\n"
        "5\t0.500000\t-\n"
        "10\t-\t1.000000\n");
}
