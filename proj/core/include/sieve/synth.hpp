#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sieve/run_store.hpp"
#include "sieve/select.hpp"

// Synthetic model.
//
// Generates complete runs from a statistical caricature of a model and its
// verifier instead of a backend: each question has a correct answer, a
// distribution over wrong answers, and a quality distribution for correct
// responses; the verifier endorses correct responses at a quality-dependent
// rate and wrong answers at a per-answer or global rate. Everything is drawn
// from splitmix streams keyed by (seed, question id, purpose), so a run is a
// pure function of config and seed. Useful for studying the selection rules
// at scales where real verification would be unaffordable.

namespace sieve::synth {

// Quality of a correct response, in [0, 1].
struct QualityDist {
  enum class Kind { constant, uniform, discrete };
  Kind kind = Kind::constant;
  double value = 1.0;                             // constant
  double lo = 0.0, hi = 1.0;                      // uniform
  std::vector<std::pair<double, double>> points;  // discrete: (value, probability)
};

struct WeightedAnswer {
  std::string answer;
  double weight = 1.0;       // sampling weight when the composition is drawn
  std::optional<int> count;  // fixed-composition count
};

struct SynthQuestion {
  std::string id;
  std::string correct_answer;
  double p_correct = 0.5;  // chance a drawn response is correct
  // When correct_count and every wrong answer's count are set, the pool has
  // exactly that composition (order still shuffled by seed) and p_correct
  // and weights are ignored. Counts must sum to k_inf.
  std::optional<int> correct_count;
  std::vector<WeightedAnswer> wrong_answers;
  QualityDist quality;
};

struct SynthVerifier {
  // Piecewise-linear endorsement rate for correct responses as a function of
  // quality; must be sorted by quality and non-decreasing in rate. Queries
  // outside the range clamp to the end points.
  std::vector<std::pair<double, double>> endorse_correct_points = {{0.0, 0.9}, {1.0, 0.9}};
  double endorse_incorrect = 0.1;
  std::map<std::string, double> endorse_incorrect_by_answer;  // per-answer override
  double unparseable_rate = 0.0;  // chance an attempt yields no verdict at all
  // Chance the correct side wins a mixed comparison; same-class comparisons
  // are coin flips.
  double comparison_accuracy = 0.75;
};

double endorse_correct(const SynthVerifier& verifier, double quality);
double endorse_incorrect(const SynthVerifier& verifier, const std::string& answer);

struct SynthConfig {
  select::SearchConfig search;
  SynthVerifier verifier;
  std::vector<SynthQuestion> questions;

  void validate() const;  // throws std::invalid_argument naming the field
};

// JSON loader. A question entry may carry "count": N to expand into N copies
// (ids suffixed -1..-N), and its "p_correct" may be a [lo, hi] pair, which
// spreads evenly spaced values across the copies.
SynthConfig synth_config_from_json(std::string_view text);

// A complete in-memory run: k_inf responses per question with final answers
// and synthetic grades, and k_verif full verification verdicts per response.
run_store::Run generate_synthetic_run(const SynthConfig& config, std::uint64_t seed);

// Same draw, persisted through the run store (zero timestamps, inline
// response text, no transcripts).
void write_synthetic_run(const SynthConfig& config, std::uint64_t seed, const std::string& dir);

// Comparison samples for tie-breaks over a synthetic pool: k_tie samples per
// pair, mixed-class pairs decided at comparison_accuracy, presentation order
// alternating as in the live pipeline.
select::MatchupProvider make_synthetic_provider(const SynthVerifier& verifier,
                                                std::vector<bool> correct_by_index, int k_tie,
                                                std::uint64_t question_seed);

}  // namespace sieve::synth
