#include "sieve/select.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "sieve/answers.hpp"
#include "sieve/rng.hpp"

namespace sieve::select {

namespace {

// Absolute tolerance for score-window and threshold boundaries. Averages are
// ratios of small integers; this only rescues genuine boundary cases from
// floating-point noise.
constexpr double kBoundaryEps = 1e-12;

// Ranking used everywhere a "best" candidate is needed: higher average first,
// non-degenerate before degenerate at equal average, then lower index.
bool better(const CandidateScore& a, const CandidateScore& b) {
  if (a.average != b.average) return a.average > b.average;
  if (a.degenerate != b.degenerate) return !a.degenerate;
  return a.candidate_index < b.candidate_index;
}

}  // namespace

// ---------------------------------------------------------------------------
// SearchConfig

void SearchConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("search config: ") + what);
  };
  require(k_inf >= 1, "k_inf must be at least 1");
  require(k_verif >= 1, "k_verif must be at least 1");
  require(k_tie >= 1, "k_tie must be at least 1");
  require(tie_window >= 0.0 && tie_window <= 1.0, "tie_window must lie in [0, 1]");
  require(tie_cap >= 2, "tie_cap must be at least 2");
  require(sigma_inf >= 0.0, "sigma_inf must be non-negative");
  require(sigma_verif >= 0.0, "sigma_verif must be non-negative");
  require(max_output_tokens >= 1, "max_output_tokens must be at least 1");
  require(prelim_k >= 1, "prelim_k must be at least 1");
  require(prelim_threshold >= 0.0 && prelim_threshold <= 1.0,
          "prelim_threshold must lie in [0, 1]");
  require(prelim_cap_per_answer >= 1, "prelim_cap_per_answer must be at least 1");
}

SearchConfig search_config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("search config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("search config: expected a JSON object");

  SearchConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "k_inf") c.k_inf = value.get<int>();
    else if (key == "k_verif") c.k_verif = value.get<int>();
    else if (key == "k_tie") c.k_tie = value.get<int>();
    else if (key == "tie_window") c.tie_window = value.get<double>();
    else if (key == "tie_cap") c.tie_cap = value.get<int>();
    else if (key == "sigma_inf") c.sigma_inf = value.get<double>();
    else if (key == "sigma_verif") c.sigma_verif = value.get<double>();
    else if (key == "max_output_tokens") c.max_output_tokens = value.get<int>();
    else if (key == "use_preliminary") c.use_preliminary = value.get<bool>();
    else if (key == "prelim_k") c.prelim_k = value.get<int>();
    else if (key == "prelim_threshold") c.prelim_threshold = value.get<double>();
    else if (key == "prelim_cap_per_answer") c.prelim_cap_per_answer = value.get<int>();
    else throw std::invalid_argument("search config: unknown key \"" + key + "\"");
  }
  c.validate();
  return c;
}

std::string search_config_to_json(const SearchConfig& c) {
  nlohmann::json j{
      {"k_inf", c.k_inf},
      {"k_verif", c.k_verif},
      {"k_tie", c.k_tie},
      {"tie_window", c.tie_window},
      {"tie_cap", c.tie_cap},
      {"sigma_inf", c.sigma_inf},
      {"sigma_verif", c.sigma_verif},
      {"max_output_tokens", c.max_output_tokens},
      {"use_preliminary", c.use_preliminary},
      {"prelim_k", c.prelim_k},
      {"prelim_threshold", c.prelim_threshold},
      {"prelim_cap_per_answer", c.prelim_cap_per_answer},
  };
  return j.dump();
}

// ---------------------------------------------------------------------------
// Scores

CandidateScore average_score(int candidate_index,
                             const std::vector<VerificationAttempt>& attempts) {
  CandidateScore score;
  score.candidate_index = candidate_index;
  score.n_attempts = static_cast<int>(attempts.size());
  int endorsed = 0;
  for (const auto& a : attempts) {
    if (a.verdict == Verdict::unparseable) continue;
    ++score.n_parseable;
    if (a.verdict == Verdict::correct) ++endorsed;
  }
  if (score.n_parseable == 0) {
    score.average = 0.0;
    score.degenerate = true;
  } else {
    score.average = static_cast<double>(endorsed) / score.n_parseable;
  }
  return score;
}

// ---------------------------------------------------------------------------
// Tie set

std::vector<int> compute_s_best(const std::vector<CandidateScore>& scores,
                                double tie_window, int tie_cap) {
  if (scores.empty()) throw std::invalid_argument("s_best: no candidate scores");
  if (tie_window < 0.0) throw std::invalid_argument("s_best: negative tie_window");
  if (tie_cap < 1) throw std::invalid_argument("s_best: tie_cap must be at least 1");

  bool any_valid = false;
  for (const auto& s : scores) any_valid = any_valid || !s.degenerate;

  std::vector<const CandidateScore*> eligible;
  eligible.reserve(scores.size());
  for (const auto& s : scores) {
    if (any_valid && s.degenerate) continue;  // degenerates never enter the tie set
    eligible.push_back(&s);
  }
  std::sort(eligible.begin(), eligible.end(),
            [](const CandidateScore* a, const CandidateScore* b) { return better(*a, *b); });

  const double cutoff = eligible.front()->average - tie_window - kBoundaryEps;
  std::vector<int> members;
  for (const auto* s : eligible) {
    if (s->average < cutoff) break;
    members.push_back(s->candidate_index);
    if (static_cast<int>(members.size()) == tie_cap) break;
  }
  return members;
}

bool needs_tiebreak(const std::vector<int>& s_best,
                    const std::vector<std::optional<std::string>>& final_answers) {
  if (s_best.size() < 2) return false;
  std::optional<std::string> shared;
  for (int idx : s_best) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= final_answers.size())
      throw std::invalid_argument("needs_tiebreak: candidate index out of range");
    const auto& ans = final_answers[static_cast<std::size_t>(idx)];
    if (!ans.has_value()) return true;  // answerless is distinct from everything
    std::string canon = answers::canonical_answer(*ans);
    if (!shared) {
      shared = std::move(canon);
    } else if (*shared != canon) {
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Tournament

std::pair<int, Tournament> tournament_winner(const std::vector<int>& members,
                                             const std::vector<CandidateScore>& scores,
                                             const std::vector<MatchupSample>& samples) {
  if (members.empty()) throw std::invalid_argument("tournament: no members");

  std::unordered_map<int, const CandidateScore*> by_index;
  for (const auto& s : scores) by_index[s.candidate_index] = &s;
  for (int m : members) {
    if (!by_index.count(m))
      throw std::invalid_argument("tournament: member has no score");
  }

  Tournament table;
  table.members = members;
  table.match_wins.assign(members.size(), 0);
  if (members.size() == 1) return {members.front(), table};

  std::map<std::pair<int, int>, PairCell> cells;
  for (const auto& s : samples) {
    const int lo = std::min(s.a_index, s.b_index);
    const int hi = std::max(s.a_index, s.b_index);
    auto& cell = cells[{lo, hi}];
    cell.a_index = lo;
    cell.b_index = hi;
    if (s.verdict == MatchupVerdict::unparseable) {
      ++cell.unparseable;
    } else {
      const int winner = (s.verdict == MatchupVerdict::a_wins) ? s.a_index : s.b_index;
      if (winner == lo) ++cell.a_sample_wins;
      else ++cell.b_sample_wins;
    }
  }

  auto position = [&](int candidate) {
    for (std::size_t i = 0; i < members.size(); ++i)
      if (members[i] == candidate) return i;
    throw std::logic_error("tournament: candidate not a member");
  };

  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const int lo = std::min(members[i], members[j]);
      const int hi = std::max(members[i], members[j]);
      auto it = cells.find({lo, hi});
      if (it == cells.end())
        throw std::invalid_argument("tournament: pair has no comparison samples");
      const PairCell& cell = it->second;
      table.pairs.push_back(cell);
      if (cell.a_sample_wins > cell.b_sample_wins) {
        ++table.match_wins[position(lo)];
      } else if (cell.b_sample_wins > cell.a_sample_wins) {
        ++table.match_wins[position(hi)];
      } else {
        table.drawn_pairs.emplace_back(lo, hi);
      }
    }
  }

  // Most matchups won; ties go to the higher verification average, then the
  // lower candidate index.
  std::size_t best = 0;
  for (std::size_t i = 1; i < members.size(); ++i) {
    if (table.match_wins[i] != table.match_wins[best]) {
      if (table.match_wins[i] > table.match_wins[best]) best = i;
      continue;
    }
    const CandidateScore& a = *by_index.at(members[i]);
    const CandidateScore& b = *by_index.at(members[best]);
    if (a.average != b.average) {
      if (a.average > b.average) best = i;
      continue;
    }
    if (members[i] < members[best]) best = i;
  }
  return {members[best], table};
}

// ---------------------------------------------------------------------------
// Selection

SelectionResult select_by_verification(
    const std::vector<CandidateScore>& scores,
    const std::vector<std::optional<std::string>>& final_answers,
    const MatchupProvider& provider, const SearchConfig& config, bool run_tiebreak) {
  SelectionResult result;
  result.method = run_tiebreak ? SelectionMethod::verification
                               : SelectionMethod::verification_no_tiebreak;
  result.s_best = compute_s_best(scores, config.tie_window, config.tie_cap);

  if (run_tiebreak && needs_tiebreak(result.s_best, final_answers)) {
    if (!provider)
      throw std::invalid_argument("selection: tie-break needed but no matchup provider");
    std::vector<MatchupSample> samples;
    for (std::size_t i = 0; i < result.s_best.size(); ++i) {
      for (std::size_t j = i + 1; j < result.s_best.size(); ++j) {
        const int lo = std::min(result.s_best[i], result.s_best[j]);
        const int hi = std::max(result.s_best[i], result.s_best[j]);
        auto pair_samples = provider(lo, hi);
        samples.insert(samples.end(), pair_samples.begin(), pair_samples.end());
      }
    }
    auto [winner, table] = tournament_winner(result.s_best, scores, samples);
    result.chosen_index = winner;
    result.tournament = std::move(table);
  } else {
    // s_best is ordered (average desc, index asc), so the first member is
    // the argmax with lower index breaking exact ties.
    result.chosen_index = result.s_best.front();
  }

  for (const auto& s : scores) {
    if (s.candidate_index == result.chosen_index) result.degenerate = s.degenerate;
  }
  return result;
}

SelectionResult select_by_consistency(
    const std::vector<std::optional<std::string>>& final_answers) {
  struct Tally {
    int count = 0;
    int first_index = 0;
  };
  std::map<std::string, Tally> tallies;
  for (std::size_t i = 0; i < final_answers.size(); ++i) {
    if (!final_answers[i].has_value()) continue;
    std::string canon = answers::canonical_answer(*final_answers[i]);
    auto [it, inserted] = tallies.emplace(std::move(canon), Tally{0, static_cast<int>(i)});
    ++it->second.count;
  }
  if (tallies.empty())
    throw std::runtime_error("consistency: no candidate produced a parseable final answer");

  SelectionResult result;
  result.method = SelectionMethod::consistency;
  for (const auto& [answer, tally] : tallies)
    result.plurality.push_back({answer, tally.count, tally.first_index});
  std::sort(result.plurality.begin(), result.plurality.end(),
            [](const PluralityEntry& a, const PluralityEntry& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.first_index < b.first_index;
            });

  const PluralityEntry& winner = result.plurality.front();
  result.chosen_index = winner.first_index;
  result.response_text = "The final answer is " + winner.answer;
  return result;
}

std::vector<int> preliminary_filter(
    const std::vector<CandidateScore>& prelim_scores,
    const std::vector<std::optional<std::string>>& final_answers,
    const SearchConfig& config, std::uint64_t seed) {
  if (config.prelim_cap_per_answer < 1)
    throw std::invalid_argument("preliminary filter: cap must be at least 1");

  // Group survivors of the score threshold by canonical final answer.
  // Answerless candidates each form their own group, mirroring the
  // distinct-from-everything rule used by needs_tiebreak.
  std::map<std::string, std::vector<int>> groups;
  for (const auto& s : prelim_scores) {
    if (s.average < config.prelim_threshold - kBoundaryEps) continue;
    if (s.candidate_index < 0 ||
        static_cast<std::size_t>(s.candidate_index) >= final_answers.size())
      throw std::invalid_argument("preliminary filter: candidate index out of range");
    const auto& ans = final_answers[static_cast<std::size_t>(s.candidate_index)];
    std::string key = ans.has_value()
                          ? "a:" + answers::canonical_answer(*ans)
                          : "m:" + std::to_string(s.candidate_index);
    groups[std::move(key)].push_back(s.candidate_index);
  }

  std::vector<int> kept;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end());
    if (static_cast<int>(members.size()) <= config.prelim_cap_per_answer) {
      kept.insert(kept.end(), members.begin(), members.end());
      continue;
    }
    // Over-full answer groups keep a uniform random subset, deterministically
    // derived from the run seed and the answer itself.
    rng::Stream stream(rng::mix({seed, rng::fnv1a(key), rng::fnv1a("preliminary-cap")}));
    auto picks = rng::sample_without_replacement(static_cast<int>(members.size()),
                                                 config.prelim_cap_per_answer, stream);
    for (int p : picks) kept.push_back(members[static_cast<std::size_t>(p)]);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace sieve::select
