#include "sieve/answers.hpp"

#include <cctype>

namespace sieve::answers {

std::string canonical_answer(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
  return std::string(raw.substr(begin, end - begin));
}

std::optional<std::string> extract_boxed(std::string_view text) {
  constexpr std::string_view kMarker = "\\boxed{";
  std::optional<std::string> found;
  std::size_t pos = 0;
  while (true) {
    const std::size_t at = text.find(kMarker, pos);
    if (at == std::string_view::npos) break;
    std::size_t i = at + kMarker.size();
    int depth = 1;
    std::string body;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) break;
      }
      body.push_back(c);
    }
    if (depth == 0) {
      // Later boxes win: a solution that revises itself ends on its real
      // final answer.
      found = canonical_answer(body);
    }
    pos = at + kMarker.size();
  }
  return found;
}

bool same_answer(std::string_view a, std::string_view b) {
  return canonical_answer(a) == canonical_answer(b);
}

}  // namespace sieve::answers
