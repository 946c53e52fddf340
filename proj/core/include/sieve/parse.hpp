#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sieve/select.hpp"

// Reply parsing.
//
// Model replies are free text; these routines pull structured outcomes out of
// them. Parsing is deliberately forgiving about everything except the final
// decision markers themselves: a reply that does not contain a recognizable
// marker is unparseable, never a guess.

namespace sieve::parse {

// Verification verdict. Scans case-insensitively for the two markers
//   "No, final answer is correct"          -> correct
//   "**Yes**" (bold, standalone, optional trailing . or !) -> error_found
// and the marker appearing later in the reply wins, since verifiers often
// restate the instructions before concluding. No marker -> unparseable.
select::Verdict parse_verdict(std::string_view reply);

// First balanced {...} object in the reply, tolerating surrounding prose and
// code fences. Returns nullopt when no complete object exists.
std::optional<std::string> first_json_object(std::string_view reply);

// Comparison summary: {"correct_solution": 1 or 2}. Returns 1 or 2, or
// nullopt when the reply does not commit to either.
std::optional<int> parse_matchup_choice(std::string_view reply);

// Grading summary: the boolean "student_final_answer_is_correct". The
// printed format itself carries a trailing comma, so one trailing comma
// before } or ] is repaired before strict JSON parsing.
std::optional<bool> parse_grade_bool(std::string_view reply);

// Benchmark scoring summary: "is_solution_correct": 'yes' or 'no'. The
// suggested format uses single quotes, which is not valid JSON, so this
// scans for the key and reads the following yes/no token.
std::optional<bool> parse_scoring_choice(std::string_view reply);

}  // namespace sieve::parse
