#pragma once

#include <optional>
#include <string>
#include <string_view>

// Final-answer handling. Two responses "reach the same answer" when their
// final answers, stripped of leading and trailing whitespace, are literally
// equal; everything downstream (plurality voting, tie-break grouping,
// synthetic grading) goes through canonical_answer so the equivalence
// relation lives in exactly one place.

namespace sieve::answers {

// Strips leading/trailing ASCII whitespace. The result is the canonical form
// used for equality everywhere.
std::string canonical_answer(std::string_view raw);

// Deterministic extractor for solutions that end in \boxed{...}: returns the
// canonicalized content of the last boxed group, tracking brace nesting.
// Returns nullopt when no complete boxed group exists.
std::optional<std::string> extract_boxed(std::string_view text);

// Literal-match equality on canonical forms.
bool same_answer(std::string_view a, std::string_view b);

}  // namespace sieve::answers
