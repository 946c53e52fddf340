#include "sieve/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "sieve/rng.hpp"
#include "sieve/select.hpp"

namespace sieve::evaluate {

namespace {

std::string format_accuracy(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

// Probability that `draw` without-replacement draws all come from a class of
// size c inside a pool of size n.
double prob_all_in_class(long n, long c, int draw) {
  if (c < draw) return 0.0;
  double p = 1.0;
  for (int i = 0; i < draw; ++i) p *= static_cast<double>(c - i) / static_cast<double>(n - i);
  return p;
}

// Verdicts of the question's response at the given full-stage attempt
// indices; throws on holes.
select::CandidateScore score_at(const run_store::ResponseEntry& entry,
                                const std::vector<int>& attempt_indices, int position,
                                const std::string& question_id) {
  select::CandidateScore score;
  score.candidate_index = position;
  score.n_attempts = static_cast<int>(attempt_indices.size());
  for (int attempt : attempt_indices) {
    const std::optional<select::Verdict>& verdict = entry.full[attempt];
    if (!verdict)
      throw std::runtime_error("question " + question_id + " response " +
                               std::to_string(entry.record.index) +
                               ": verification attempt " + std::to_string(attempt) +
                               " missing");
    if (*verdict == select::Verdict::unparseable) continue;
    ++score.n_parseable;
    if (*verdict == select::Verdict::correct) score.average += 1.0;
  }
  if (score.n_parseable == 0) {
    score.average = 0.0;
    score.degenerate = true;
  } else {
    score.average /= score.n_parseable;
  }
  return score;
}

void check_dense_responses(const run_store::QuestionRun& question) {
  int expected = 0;
  for (const auto& [index, entry] : question.responses) {
    if (index != expected)
      throw std::runtime_error("question " + question.question.id + ": response " +
                               std::to_string(expected) + " missing");
    ++expected;
  }
}

// Number of correct responses in the full pool.
long count_correct(const run_store::QuestionRun& question, const GradeLookup& grades) {
  long c = 0;
  for (const auto& [index, entry] : question.responses)
    if (grades(question.question.id, index)) ++c;
  return c;
}

std::vector<std::optional<std::string>> answers_at(
    const run_store::QuestionRun& question, const std::vector<int>& response_indices) {
  std::vector<std::optional<std::string>> answers;
  answers.reserve(response_indices.size());
  for (int index : response_indices)
    answers.push_back(question.responses.at(index).record.final_answer);
  return answers;
}

void check_curve_options(const CurveOptions& options, bool needs_verif_grid) {
  if (options.k_inf_grid.empty())
    throw std::invalid_argument("curve: k_inf grid must not be empty");
  if (needs_verif_grid && options.k_verif_grid.empty())
    throw std::invalid_argument("curve: k_verif grid must not be empty");
  if (options.seeds.empty()) throw std::invalid_argument("curve: seeds must not be empty");
}

std::vector<std::string> curve_questions(const run_store::Run& run, const GradeLookup& grades,
                                         int k_inf, std::uint64_t seed,
                                         const CurveOptions& options) {
  if (options.ambiguous_only)
    return ambiguous_subset(run, grades, k_inf, seed, options.omission);
  return run.question_order;
}

// Average ranks, ties averaged.
std::vector<double> ranks_of(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double rank = (i + j) / 2.0 + 1.0;
    for (int t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double pass_at_k(long n, long c, long k) {
  if (n < 1) throw std::invalid_argument("pass_at_k: n must be at least 1");
  if (c < 0 || c > n) throw std::invalid_argument("pass_at_k: need 0 <= c <= n");
  if (k < 1 || k > n) throw std::invalid_argument("pass_at_k: need 1 <= k <= n");
  if (k > n - c) return 1.0;  // every k-subset hits a correct response
  double miss = 1.0;
  for (long i = 0; i < k; ++i)
    miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  return 1.0 - miss;
}

SubsampleView subsample(const run_store::QuestionRun& question, int k_inf, int k_verif,
                        std::uint64_t seed) {
  if (k_inf < 1) throw std::invalid_argument("subsample: k_inf must be at least 1");
  if (k_verif < 0) throw std::invalid_argument("subsample: k_verif must not be negative");
  check_dense_responses(question);
  const std::string& qid = question.question.id;
  const int n = static_cast<int>(question.responses.size());
  if (k_inf > n)
    throw std::runtime_error("question " + qid + ": need k_inf=" + std::to_string(k_inf) +
                             " responses, run has " + std::to_string(n));

  SubsampleView view;
  rng::Stream response_stream(rng::mix({seed, rng::fnv1a(qid), rng::fnv1a("responses")}));
  view.response_indices = rng::sample_without_replacement(n, k_inf, response_stream);
  view.verification_indices.resize(view.response_indices.size());
  if (k_verif == 0) return view;

  for (std::size_t p = 0; p < view.response_indices.size(); ++p) {
    int original = view.response_indices[p];
    const run_store::ResponseEntry& entry = question.responses.at(original);
    const int m = static_cast<int>(entry.full.size());
    for (int attempt = 0; attempt < m; ++attempt)
      if (!entry.full[attempt])
        throw std::runtime_error("question " + qid + " response " + std::to_string(original) +
                                 ": verification attempt " + std::to_string(attempt) +
                                 " missing");
    if (k_verif > m)
      throw std::runtime_error("question " + qid + " response " + std::to_string(original) +
                               ": need k_verif=" + std::to_string(k_verif) +
                               " attempts, run has " + std::to_string(m));
    rng::Stream attempt_stream(rng::mix({seed, rng::fnv1a(qid), rng::fnv1a("verifications"),
                                         static_cast<std::uint64_t>(original)}));
    view.verification_indices[p] = rng::sample_without_replacement(m, k_verif, attempt_stream);
  }
  return view;
}

GradeLookup grades_from_run(const run_store::Run& run) {
  const run_store::Run* runp = &run;
  return [runp](const std::string& question_id, int response_index) {
    const run_store::QuestionRun& question = runp->question(question_id);
    auto it = question.responses.find(response_index);
    if (it == question.responses.end() || !it->second.grade)
      throw std::runtime_error("no grade for question " + question_id + " response " +
                               std::to_string(response_index));
    return it->second.grade->correct;
  };
}

double prob_all_same(long n, long c, int draw) {
  if (n < 1) throw std::invalid_argument("prob_all_same: n must be at least 1");
  if (c < 0 || c > n) throw std::invalid_argument("prob_all_same: need 0 <= c <= n");
  if (draw < 1 || draw > n)
    throw std::invalid_argument("prob_all_same: need 1 <= draw <= n");
  return prob_all_in_class(n, c, draw) + prob_all_in_class(n, n - c, draw);
}

std::vector<std::string> ambiguous_subset(const run_store::Run& run, const GradeLookup& grades,
                                          int k, std::uint64_t seed,
                                          const OmissionConfig& omission) {
  std::vector<std::string> kept;
  for (const std::string& qid : run.question_order) {
    const run_store::QuestionRun& question = run.question(qid);
    check_dense_responses(question);
    const long n = static_cast<long>(question.responses.size());

    // The seeded k-draw must offer at least one correct response to find.
    SubsampleView view = subsample(question, k, 0, seed);
    bool any_correct = false;
    for (int index : view.response_indices)
      if (grades(qid, index)) {
        any_correct = true;
        break;
      }
    if (!any_correct) continue;

    if (omission.drop_consistency_correct) {
      std::vector<int> all(question.responses.size());
      std::iota(all.begin(), all.end(), 0);
      try {
        select::SelectionResult vote = select::select_by_consistency(answers_at(question, all));
        if (grades(qid, vote.chosen_index)) continue;
      } catch (const std::runtime_error&) {
        // No parseable answers in the pool: voting cannot solve it, keep it.
      }
    }

    long c = count_correct(question, grades);
    int draw = std::min<long>(omission.draw, n);
    if (prob_all_same(n, c, draw) > omission.p_same) continue;

    kept.push_back(qid);
  }
  return kept;
}

std::vector<ScalingCell> verification_curve(const run_store::Run& run,
                                            const GradeLookup& grades,
                                            const CurveOptions& options) {
  check_curve_options(options, true);
  std::vector<ScalingCell> cells;
  for (int k_verif : options.k_verif_grid) {
    for (int k_inf : options.k_inf_grid) {
      for (std::uint64_t seed : options.seeds) {
        std::vector<std::string> qids = curve_questions(run, grades, k_inf, seed, options);
        ScalingCell cell;
        cell.metric = "verification";
        cell.k_inf = k_inf;
        cell.k_verif = k_verif;
        cell.seed = seed;
        cell.n_questions = static_cast<int>(qids.size());
        for (const std::string& qid : qids) {
          const run_store::QuestionRun& question = run.question(qid);
          SubsampleView view = subsample(question, k_inf, k_verif, seed);
          std::vector<select::CandidateScore> scores;
          scores.reserve(view.response_indices.size());
          for (std::size_t p = 0; p < view.response_indices.size(); ++p)
            scores.push_back(score_at(question.responses.at(view.response_indices[p]),
                                      view.verification_indices[p], static_cast<int>(p), qid));
          int best_position = select::compute_s_best(scores, 0.0, 1).front();
          if (grades(qid, view.response_indices[best_position])) ++cell.n_correct;
        }
        cell.accuracy =
            qids.empty() ? 0.0 : static_cast<double>(cell.n_correct) / cell.n_questions;
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::vector<ScalingCell> consistency_curve(const run_store::Run& run,
                                           const GradeLookup& grades,
                                           const CurveOptions& options) {
  check_curve_options(options, false);
  std::vector<ScalingCell> cells;
  for (int k_inf : options.k_inf_grid) {
    for (std::uint64_t seed : options.seeds) {
      std::vector<std::string> qids = curve_questions(run, grades, k_inf, seed, options);
      ScalingCell cell;
      cell.metric = "consistency";
      cell.k_inf = k_inf;
      cell.seed = seed;
      cell.n_questions = static_cast<int>(qids.size());
      for (const std::string& qid : qids) {
        const run_store::QuestionRun& question = run.question(qid);
        SubsampleView view = subsample(question, k_inf, 0, seed);
        try {
          select::SelectionResult vote =
              select::select_by_consistency(answers_at(question, view.response_indices));
          if (grades(qid, view.response_indices[vote.chosen_index])) ++cell.n_correct;
        } catch (const std::runtime_error&) {
          // No drawn response had a parseable answer: scored incorrect.
        }
      }
      cell.accuracy =
          qids.empty() ? 0.0 : static_cast<double>(cell.n_correct) / cell.n_questions;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

AblationReport ablation_rates(const std::vector<int>& correct_counts,
                              const std::vector<int>& incorrect_counts, int attempts) {
  if (attempts < 1) throw std::invalid_argument("ablation: attempts must be at least 1");
  if (correct_counts.empty() || incorrect_counts.empty())
    throw std::invalid_argument("ablation: both classes need at least one solution");
  for (int count : correct_counts)
    if (count < 0 || count > attempts)
      throw std::invalid_argument("ablation: count out of range for correct class");
  for (int count : incorrect_counts)
    if (count < 0 || count > attempts)
      throw std::invalid_argument("ablation: count out of range for incorrect class");

  AblationReport report;
  report.fpr_by_threshold.resize(attempts + 1);
  report.fnr_by_threshold.resize(attempts + 1);
  double best_gap = 2.0;
  for (int t = 0; t <= attempts; ++t) {
    long flagged_correct = std::count_if(correct_counts.begin(), correct_counts.end(),
                                         [t](int count) { return count > t; });
    long passed_incorrect = std::count_if(incorrect_counts.begin(), incorrect_counts.end(),
                                          [t](int count) { return count <= t; });
    double fpr = static_cast<double>(flagged_correct) / correct_counts.size();
    double fnr = static_cast<double>(passed_incorrect) / incorrect_counts.size();
    report.fpr_by_threshold[t] = fpr;
    report.fnr_by_threshold[t] = fnr;
    double gap = std::fabs(fpr - fnr);
    if (gap < best_gap) {
      best_gap = gap;
      report.threshold = t;
      report.fpr = fpr;
      report.fnr = fnr;
    }
  }
  return report;
}

CostEstimate estimate_cost(int k_inf, int k_verif, const CostAssumptions& assumptions) {
  if (k_inf < 1 || k_verif < 1)
    throw std::invalid_argument("cost: k_inf and k_verif must be at least 1");
  if (assumptions.tokens_per_attempt < 1)
    throw std::invalid_argument("cost: tokens_per_attempt must be at least 1");
  if (assumptions.price_per_million_tokens < 0.0)
    throw std::invalid_argument("cost: price must not be negative");
  if (assumptions.cost_reduction < 0.0 || assumptions.cost_reduction > 1.0)
    throw std::invalid_argument("cost: cost_reduction must lie in [0, 1]");
  CostEstimate estimate;
  estimate.total_tokens = static_cast<long long>(k_inf) * k_verif * assumptions.tokens_per_attempt;
  estimate.dollars = static_cast<double>(estimate.total_tokens) / 1e6 *
                     assumptions.price_per_million_tokens * (1.0 - assumptions.cost_reduction);
  return estimate;
}

double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("spearman: series must have equal length");
  if (xs.size() < 2) throw std::invalid_argument("spearman: need at least two points");
  return pearson(ranks_of(xs), ranks_of(ys));
}

double spearman_trend_pvalue(const std::vector<double>& xs, const std::vector<double>& ys,
                             int permutations, std::uint64_t seed) {
  if (permutations < 1)
    throw std::invalid_argument("spearman: permutations must be at least 1");
  const double observed = spearman_rho(xs, ys);
  const int n = static_cast<int>(ys.size());
  rng::Stream stream(rng::mix({seed, rng::fnv1a("spearman-permutation")}));
  int at_least = 0;
  std::vector<double> shuffled(n);
  for (int p = 0; p < permutations; ++p) {
    std::vector<int> order = rng::sample_without_replacement(n, n, stream);
    for (int i = 0; i < n; ++i) shuffled[i] = ys[order[i]];
    if (spearman_rho(xs, shuffled) >= observed - 1e-12) ++at_least;
  }
  return static_cast<double>(1 + at_least) / (1 + permutations);
}

std::string cells_to_table(const std::vector<ScalingCell>& cells) {
  std::vector<ScalingCell> sorted = cells;
  std::sort(sorted.begin(), sorted.end(), [](const ScalingCell& a, const ScalingCell& b) {
    return std::tie(a.metric, a.k_verif, a.k_inf, a.seed) <
           std::tie(b.metric, b.k_verif, b.k_inf, b.seed);
  });
  std::string out = "metric\tk_inf\tk_verif\tseed\tn_questions\tn_correct\taccuracy\n";
  for (const ScalingCell& cell : sorted) {
    out += cell.metric;
    out += '\t';
    out += std::to_string(cell.k_inf);
    out += '\t';
    out += std::to_string(cell.k_verif);
    out += '\t';
    out += std::to_string(cell.seed);
    out += '\t';
    out += std::to_string(cell.n_questions);
    out += '\t';
    out += std::to_string(cell.n_correct);
    out += '\t';
    out += format_accuracy(cell.accuracy);
    out += '\n';
  }
  return out;
}

std::string cells_to_matrix(const std::vector<ScalingCell>& cells, const std::string& metric) {
  std::set<int> k_inf_values;
  std::set<int> k_verif_values;
  std::map<std::pair<int, int>, std::pair<double, int>> sums;  // (k_verif, k_inf) -> (sum, n)
  for (const ScalingCell& cell : cells) {
    if (cell.metric != metric) continue;
    k_inf_values.insert(cell.k_inf);
    k_verif_values.insert(cell.k_verif);
    auto& slot = sums[{cell.k_verif, cell.k_inf}];
    slot.first += cell.accuracy;
    slot.second += 1;
  }
  std::string out = "k_verif\\k_inf";
  for (int k_inf : k_inf_values) {
    out += '\t';
    out += std::to_string(k_inf);
  }
  out += '\n';
  for (int k_verif : k_verif_values) {
    out += std::to_string(k_verif);
    for (int k_inf : k_inf_values) {
      out += '\t';
      auto it = sums.find({k_verif, k_inf});
      if (it == sums.end())
        out += '-';
      else
        out += format_accuracy(it->second.first / it->second.second);
    }
    out += '\n';
  }
  return out;
}

}  // namespace sieve::evaluate
