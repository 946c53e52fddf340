#include "sieve/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sieve/answers.hpp"
#include "sieve/rng.hpp"

namespace sieve::synth {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known)
      throw std::invalid_argument(std::string("synthetic config: unknown key \"") + item.key() +
                                  "\" in " + where);
  }
}

std::vector<std::pair<double, double>> parse_point_list(const json& j, const char* where) {
  if (!j.is_array())
    throw std::invalid_argument(std::string("synthetic config: ") + where +
                                " must be an array of [x, y] pairs");
  std::vector<std::pair<double, double>> points;
  for (const json& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      throw std::invalid_argument(std::string("synthetic config: ") + where +
                                  " entries must be [x, y] number pairs");
    points.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  return points;
}

QualityDist parse_quality(const json& j) {
  reject_unknown_keys(j, {"kind", "value", "lo", "hi", "points"}, "quality");
  QualityDist dist;
  std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    dist.kind = QualityDist::Kind::constant;
    dist.value = j.value("value", 1.0);
  } else if (kind == "uniform") {
    dist.kind = QualityDist::Kind::uniform;
    dist.lo = j.value("lo", 0.0);
    dist.hi = j.value("hi", 1.0);
  } else if (kind == "discrete") {
    dist.kind = QualityDist::Kind::discrete;
    dist.points = parse_point_list(j.at("points"), "quality points");
  } else {
    throw std::invalid_argument("synthetic config: unknown quality kind \"" + kind + "\"");
  }
  return dist;
}

SynthVerifier parse_verifier(const json& j) {
  reject_unknown_keys(j,
                      {"endorse_correct", "endorse_incorrect", "endorse_incorrect_by_answer",
                       "unparseable_rate", "comparison_accuracy"},
                      "verifier");
  SynthVerifier verifier;
  if (j.contains("endorse_correct"))
    verifier.endorse_correct_points = parse_point_list(j["endorse_correct"], "endorse_correct");
  verifier.endorse_incorrect = j.value("endorse_incorrect", verifier.endorse_incorrect);
  if (j.contains("endorse_incorrect_by_answer")) {
    const json& by_answer = j["endorse_incorrect_by_answer"];
    if (!by_answer.is_object())
      throw std::invalid_argument(
          "synthetic config: endorse_incorrect_by_answer must be an object");
    for (const auto& item : by_answer.items())
      verifier.endorse_incorrect_by_answer[item.key()] = item.value().get<double>();
  }
  verifier.unparseable_rate = j.value("unparseable_rate", verifier.unparseable_rate);
  verifier.comparison_accuracy = j.value("comparison_accuracy", verifier.comparison_accuracy);
  return verifier;
}

std::vector<SynthQuestion> parse_question_entry(const json& j) {
  reject_unknown_keys(
      j, {"id", "correct_answer", "p_correct", "correct_count", "wrong_answers", "quality",
          "count"},
      "question");
  SynthQuestion base;
  base.id = j.at("id").get<std::string>();
  base.correct_answer = j.at("correct_answer").get<std::string>();
  if (j.contains("correct_count")) base.correct_count = j["correct_count"].get<int>();
  if (j.contains("wrong_answers")) {
    for (const json& w : j["wrong_answers"]) {
      reject_unknown_keys(w, {"answer", "weight", "count"}, "wrong answer");
      WeightedAnswer answer;
      answer.answer = w.at("answer").get<std::string>();
      answer.weight = w.value("weight", 1.0);
      if (w.contains("count")) answer.count = w["count"].get<int>();
      base.wrong_answers.push_back(std::move(answer));
    }
  }
  if (j.contains("quality")) base.quality = parse_quality(j["quality"]);

  int copies = j.value("count", 1);
  if (copies < 1) throw std::invalid_argument("synthetic config: count must be at least 1");

  double lo = 0.5, hi = 0.5;
  bool has_p = j.contains("p_correct");
  bool ranged = false;
  if (has_p) {
    const json& p = j["p_correct"];
    if (p.is_number()) {
      lo = hi = p.get<double>();
    } else if (p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number()) {
      lo = p[0].get<double>();
      hi = p[1].get<double>();
      ranged = true;
    } else {
      throw std::invalid_argument(
          "synthetic config: p_correct must be a number or a [lo, hi] pair");
    }
  }

  std::vector<SynthQuestion> expanded;
  for (int i = 0; i < copies; ++i) {
    SynthQuestion q = base;
    if (copies > 1) q.id = base.id + "-" + std::to_string(i + 1);
    if (has_p) {
      if (!ranged)
        q.p_correct = lo;
      else if (copies == 1)
        q.p_correct = (lo + hi) / 2.0;
      else
        q.p_correct = lo + (hi - lo) * i / (copies - 1);
    }
    expanded.push_back(std::move(q));
  }
  return expanded;
}

void check_rate(double value, const char* field) {
  if (value < 0.0 || value > 1.0)
    throw std::invalid_argument(std::string("synthetic config: ") + field +
                                " must lie in [0, 1]");
}

double sample_quality(const QualityDist& dist, rng::Stream& stream) {
  switch (dist.kind) {
    case QualityDist::Kind::constant:
      return dist.value;
    case QualityDist::Kind::uniform:
      return dist.lo + (dist.hi - dist.lo) * stream.next_double();
    case QualityDist::Kind::discrete: {
      double total = 0.0;
      for (const auto& [value, prob] : dist.points) total += prob;
      double x = stream.next_double() * total;
      for (const auto& [value, prob] : dist.points) {
        x -= prob;
        if (x < 0.0) return value;
      }
      return dist.points.back().first;
    }
  }
  return dist.value;
}

// The pool for one question: answers, classes, and qualities, index-aligned.
struct Pool {
  std::vector<std::string> answers;
  std::vector<bool> correct;
  std::vector<double> quality;
};

Pool draw_pool(const SynthQuestion& question, int k_inf, std::uint64_t question_seed) {
  Pool pool;
  pool.answers.resize(k_inf);
  pool.correct.resize(k_inf);
  pool.quality.assign(k_inf, 0.0);

  rng::Stream composition(rng::mix({question_seed, rng::fnv1a("composition")}));
  if (question.correct_count) {
    // Fixed composition: lay the pool out deterministically, then shuffle.
    std::vector<std::pair<std::string, bool>> flat;
    flat.reserve(k_inf);
    for (int i = 0; i < *question.correct_count; ++i)
      flat.emplace_back(question.correct_answer, true);
    for (const WeightedAnswer& w : question.wrong_answers)
      for (int i = 0; i < *w.count; ++i) flat.emplace_back(w.answer, false);
    std::vector<int> slots =
        rng::sample_without_replacement(k_inf, k_inf, composition);
    for (int i = 0; i < k_inf; ++i) {
      pool.answers[slots[i]] = flat[i].first;
      pool.correct[slots[i]] = flat[i].second;
    }
  } else {
    double total_weight = 0.0;
    for (const WeightedAnswer& w : question.wrong_answers) total_weight += w.weight;
    for (int r = 0; r < k_inf; ++r) {
      if (composition.next_double() < question.p_correct) {
        pool.answers[r] = question.correct_answer;
        pool.correct[r] = true;
      } else {
        double x = composition.next_double() * total_weight;
        const WeightedAnswer* picked = &question.wrong_answers.back();
        for (const WeightedAnswer& w : question.wrong_answers) {
          x -= w.weight;
          if (x < 0.0) {
            picked = &w;
            break;
          }
        }
        pool.answers[r] = picked->answer;
        pool.correct[r] = false;
      }
    }
  }

  rng::Stream quality(rng::mix({question_seed, rng::fnv1a("quality")}));
  for (int r = 0; r < k_inf; ++r)
    if (pool.correct[r]) pool.quality[r] = sample_quality(question.quality, quality);
  return pool;
}

std::vector<std::optional<select::Verdict>> draw_verdicts(const SynthVerifier& verifier,
                                                          double endorse_rate, int k_verif,
                                                          rng::Stream& stream) {
  std::vector<std::optional<select::Verdict>> verdicts(k_verif);
  for (int a = 0; a < k_verif; ++a) {
    if (stream.next_double() < verifier.unparseable_rate) {
      verdicts[a] = select::Verdict::unparseable;
      continue;
    }
    verdicts[a] = stream.next_double() < endorse_rate ? select::Verdict::correct
                                                      : select::Verdict::error_found;
  }
  return verdicts;
}

}  // namespace

double endorse_correct(const SynthVerifier& verifier, double quality) {
  const auto& points = verifier.endorse_correct_points;
  if (quality <= points.front().first) return points.front().second;
  if (quality >= points.back().first) return points.back().second;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (quality > points[i].first) continue;
    const auto& [q0, r0] = points[i - 1];
    const auto& [q1, r1] = points[i];
    if (q1 == q0) return r1;
    return r0 + (r1 - r0) * (quality - q0) / (q1 - q0);
  }
  return points.back().second;
}

double endorse_incorrect(const SynthVerifier& verifier, const std::string& answer) {
  auto it = verifier.endorse_incorrect_by_answer.find(answer);
  if (it != verifier.endorse_incorrect_by_answer.end()) return it->second;
  return verifier.endorse_incorrect;
}

void SynthConfig::validate() const {
  search.validate();
  if (questions.empty())
    throw std::invalid_argument("synthetic config: questions must not be empty");

  const auto& points = verifier.endorse_correct_points;
  if (points.empty())
    throw std::invalid_argument("synthetic config: endorse_correct must not be empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    check_rate(points[i].second, "endorse_correct rate");
    if (i > 0 && points[i].first < points[i - 1].first)
      throw std::invalid_argument("synthetic config: endorse_correct must be sorted by quality");
    if (i > 0 && points[i].second < points[i - 1].second)
      throw std::invalid_argument(
          "synthetic config: endorse_correct rates must be non-decreasing");
  }
  check_rate(verifier.endorse_incorrect, "endorse_incorrect");
  for (const auto& [answer, rate] : verifier.endorse_incorrect_by_answer)
    check_rate(rate, "endorse_incorrect_by_answer");
  check_rate(verifier.unparseable_rate, "unparseable_rate");
  check_rate(verifier.comparison_accuracy, "comparison_accuracy");

  std::vector<std::string> ids;
  for (const SynthQuestion& q : questions) {
    if (q.id.empty()) throw std::invalid_argument("synthetic config: question id must not be empty");
    ids.push_back(q.id);
    if (q.correct_answer.empty())
      throw std::invalid_argument("synthetic config: correct_answer must not be empty");
    check_rate(q.p_correct, "p_correct");

    if (q.correct_count) {
      long total = *q.correct_count;
      if (*q.correct_count < 0)
        throw std::invalid_argument("synthetic config: correct_count must not be negative");
      for (const WeightedAnswer& w : q.wrong_answers) {
        if (!w.count)
          throw std::invalid_argument(
              "synthetic config: fixed composition needs a count on every wrong answer");
        if (*w.count < 0)
          throw std::invalid_argument("synthetic config: counts must not be negative");
        total += *w.count;
      }
      if (total != search.k_inf)
        throw std::invalid_argument("synthetic config: composition counts sum to " +
                                    std::to_string(total) + ", expected k_inf = " +
                                    std::to_string(search.k_inf));
    } else {
      for (const WeightedAnswer& w : q.wrong_answers) {
        if (w.count)
          throw std::invalid_argument(
              "synthetic config: wrong-answer counts need correct_count as well");
        if (!(w.weight > 0.0))
          throw std::invalid_argument("synthetic config: weights must be positive");
      }
      if (q.p_correct < 1.0 && q.wrong_answers.empty())
        throw std::invalid_argument(
            "synthetic config: p_correct below 1 needs at least one wrong answer");
    }

    switch (q.quality.kind) {
      case QualityDist::Kind::constant:
        check_rate(q.quality.value, "quality value");
        break;
      case QualityDist::Kind::uniform:
        check_rate(q.quality.lo, "quality lo");
        check_rate(q.quality.hi, "quality hi");
        if (q.quality.lo > q.quality.hi)
          throw std::invalid_argument("synthetic config: quality lo must not exceed hi");
        break;
      case QualityDist::Kind::discrete: {
        if (q.quality.points.empty())
          throw std::invalid_argument("synthetic config: quality points must not be empty");
        double total = 0.0;
        for (const auto& [value, prob] : q.quality.points) {
          check_rate(value, "quality point value");
          if (prob < 0.0)
            throw std::invalid_argument("synthetic config: quality probabilities must not be negative");
          total += prob;
        }
        if (!(total > 0.0))
          throw std::invalid_argument("synthetic config: quality probabilities must not all be zero");
        break;
      }
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("synthetic config: question ids must be unique");
}

SynthConfig synth_config_from_json(std::string_view text) {
  json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("synthetic config: expected a JSON object");
  reject_unknown_keys(j, {"search", "verifier", "questions"}, "config");

  SynthConfig config;
  if (j.contains("search"))
    config.search = select::search_config_from_json(j["search"].dump());
  if (j.contains("verifier")) config.verifier = parse_verifier(j["verifier"]);
  if (!j.contains("questions") || !j["questions"].is_array())
    throw std::invalid_argument("synthetic config: questions array is required");
  for (const json& entry : j["questions"])
    for (SynthQuestion& q : parse_question_entry(entry))
      config.questions.push_back(std::move(q));

  config.validate();
  return config;
}

run_store::Run generate_synthetic_run(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  run_store::Run run;
  run.has_meta = true;
  run.meta.config = config.search;
  run.meta.backend_kind = "synthetic";
  run.meta.seed = seed;

  for (const SynthQuestion& sq : config.questions) {
    const std::uint64_t question_seed = rng::mix({seed, rng::fnv1a(sq.id)});
    Pool pool = draw_pool(sq, config.search.k_inf, question_seed);

    run_store::QuestionRun& qrun = run.questions[sq.id];
    run.question_order.push_back(sq.id);
    qrun.question.id = sq.id;
    qrun.question.text = "Synthetic question " + sq.id + ".";
    qrun.question.style = "boxed";
    qrun.question.reference_answer = sq.correct_answer;
    qrun.question.reference_solution = "The final answer is " + sq.correct_answer + ".";

    for (int r = 0; r < config.search.k_inf; ++r) {
      run_store::ResponseEntry& entry = qrun.responses[r];
      entry.record.question_id = sq.id;
      entry.record.index = r;
      entry.record.final_answer = answers::canonical_answer(pool.answers[r]);
      entry.record.text = "The final answer is " + pool.answers[r] + ".";

      double rate = pool.correct[r] ? endorse_correct(config.verifier, pool.quality[r])
                                    : endorse_incorrect(config.verifier, pool.answers[r]);
      rng::Stream verdict_stream(
          rng::mix({question_seed, rng::fnv1a("verdicts"), static_cast<std::uint64_t>(r)}));
      entry.full =
          draw_verdicts(config.verifier, rate, config.search.k_verif, verdict_stream);

      run_store::GradeRecord grade;
      grade.question_id = sq.id;
      grade.response_index = r;
      grade.correct = pool.correct[r];
      grade.mode = "synthetic";
      entry.grade = grade;
    }
  }
  return run;
}

void write_synthetic_run(const SynthConfig& config, std::uint64_t seed,
                         const std::string& dir) {
  run_store::Run run = generate_synthetic_run(config, seed);
  run_store::RunWriter writer(dir, run_store::RunWriter::Mode::create,
                              [] { return std::int64_t{0}; });
  writer.put_meta(run.meta);
  for (const std::string& qid : run.question_order) {
    const run_store::QuestionRun& qrun = run.question(qid);
    writer.add_question(qrun.question);
    for (const auto& [index, entry] : qrun.responses) {
      writer.add_response(entry.record);
      for (std::size_t attempt = 0; attempt < entry.full.size(); ++attempt) {
        run_store::VerificationRecord record;
        record.question_id = qid;
        record.response_index = index;
        record.attempt_index = static_cast<int>(attempt);
        record.stage = select::Stage::full;
        record.verdict = *entry.full[attempt];
        writer.add_verification(record);
      }
      writer.add_grade(*entry.grade);
    }
  }
}

select::MatchupProvider make_synthetic_provider(const SynthVerifier& verifier,
                                                std::vector<bool> correct_by_index, int k_tie,
                                                std::uint64_t question_seed) {
  if (k_tie < 1) throw std::invalid_argument("synthetic provider: k_tie must be at least 1");
  return [verifier, correct = std::move(correct_by_index), k_tie,
          question_seed](int a_index, int b_index) {
    if (a_index < 0 || b_index <= a_index ||
        b_index >= static_cast<int>(correct.size()))
      throw std::invalid_argument("synthetic provider: bad pair (" + std::to_string(a_index) +
                                  ", " + std::to_string(b_index) + ")");
    rng::Stream stream(rng::mix({question_seed, rng::fnv1a("matchups"),
                                 static_cast<std::uint64_t>(a_index),
                                 static_cast<std::uint64_t>(b_index)}));
    std::vector<select::MatchupSample> samples;
    samples.reserve(k_tie);
    for (int t = 0; t < k_tie; ++t) {
      select::MatchupSample sample;
      sample.a_index = a_index;
      sample.b_index = b_index;
      sample.attempt_index = t;
      sample.order = t % 2 == 0 ? select::PresentedOrder::ab : select::PresentedOrder::ba;
      if (stream.next_double() < verifier.unparseable_rate) {
        sample.verdict = select::MatchupVerdict::unparseable;
      } else {
        double u = stream.next_double();
        bool a_wins;
        if (correct[a_index] != correct[b_index]) {
          bool correct_side_wins = u < verifier.comparison_accuracy;
          a_wins = correct[a_index] ? correct_side_wins : !correct_side_wins;
        } else {
          a_wins = u < 0.5;
        }
        sample.verdict =
            a_wins ? select::MatchupVerdict::a_wins : select::MatchupVerdict::b_wins;
      }
      samples.push_back(std::move(sample));
    }
    return samples;
  };
}

}  // namespace sieve::synth
