#include "sieve/parse.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

namespace sieve::parse {

namespace {

std::string lowered(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Last match position of the bold standalone yes: "**yes**", allowing
// whitespace inside the bold span and one trailing '.' or '!'. Operates on a
// lowercased reply.
std::optional<std::size_t> last_bold_yes(const std::string& low) {
  std::optional<std::size_t> last;
  std::size_t pos = 0;
  while ((pos = low.find("**", pos)) != std::string::npos) {
    std::size_t i = pos + 2;
    while (i < low.size() && std::isspace(static_cast<unsigned char>(low[i]))) ++i;
    if (low.compare(i, 3, "yes") == 0) {
      i += 3;
      if (i < low.size() && (low[i] == '.' || low[i] == '!')) ++i;
      while (i < low.size() && std::isspace(static_cast<unsigned char>(low[i]))) ++i;
      if (low.compare(i, 2, "**") == 0) last = pos;
    }
    pos += 2;
  }
  return last;
}

std::optional<std::size_t> last_substring(const std::string& haystack,
                                          std::string_view needle) {
  const std::size_t at = haystack.rfind(needle);
  if (at == std::string::npos) return std::nullopt;
  return at;
}

// One trailing comma before a closing brace/bracket is a known quirk of the
// structured-output formats; repair it so strict JSON parsing can proceed.
std::string strip_trailing_commas(std::string text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == ',') {
      std::size_t j = i + 1;
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;
    }
    out.push_back(text[i]);
  }
  return out;
}

std::optional<nlohmann::json> parse_object(std::string_view reply) {
  auto body = first_json_object(reply);
  if (!body) return std::nullopt;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string text = attempt == 0 ? *body : strip_trailing_commas(*body);
    auto parsed = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
  }
  return std::nullopt;
}

}  // namespace

select::Verdict parse_verdict(std::string_view reply) {
  const std::string low = lowered(reply);
  const auto correct_at = last_substring(low, "no, final answer is correct");
  const auto error_at = last_bold_yes(low);
  if (!correct_at && !error_at) return select::Verdict::unparseable;
  if (correct_at && error_at)
    return *correct_at > *error_at ? select::Verdict::correct
                                   : select::Verdict::error_found;
  return correct_at ? select::Verdict::correct : select::Verdict::error_found;
}

std::optional<std::string> first_json_object(std::string_view reply) {
  const std::size_t start = reply.find('{');
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < reply.size(); ++i) {
    const char c = reply[i];
    if (in_string) {
      if (c == '\\') {
        ++i;  // skip the escaped character
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return std::string(reply.substr(start, i - start + 1));
    }
  }
  return std::nullopt;
}

std::optional<int> parse_matchup_choice(std::string_view reply) {
  auto obj = parse_object(reply);
  if (!obj || !obj->contains("correct_solution")) return std::nullopt;
  const auto& v = (*obj)["correct_solution"];
  int choice = 0;
  if (v.is_number_integer()) {
    choice = v.get<int>();
  } else if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "1") choice = 1;
    else if (s == "2") choice = 2;
  }
  if (choice == 1 || choice == 2) return choice;
  return std::nullopt;
}

std::optional<bool> parse_grade_bool(std::string_view reply) {
  auto obj = parse_object(reply);
  if (!obj || !obj->contains("student_final_answer_is_correct")) return std::nullopt;
  const auto& v = (*obj)["student_final_answer_is_correct"];
  if (v.is_boolean()) return v.get<bool>();
  return std::nullopt;
}

std::optional<bool> parse_scoring_choice(std::string_view reply) {
  const std::string low = lowered(reply);
  const std::size_t key = low.find("is_solution_correct");
  if (key == std::string::npos) return std::nullopt;
  std::size_t i = key + std::string_view("is_solution_correct").size();
  // Skip the closing quote, colon, whitespace, and any opening quote.
  while (i < low.size() && !std::isalnum(static_cast<unsigned char>(low[i]))) ++i;
  if (low.compare(i, 3, "yes") == 0) return true;
  if (low.compare(i, 2, "no") == 0) return false;
  return std::nullopt;
}

}  // namespace sieve::parse
