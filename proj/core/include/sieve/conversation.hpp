#pragma once

#include <string>
#include <vector>

namespace sieve {

enum class Role { user, model };

struct Turn {
  Role role = Role::user;
  std::string text;
};

struct GenParams {
  double temperature = 0.0;
  int max_output_tokens = 8192;
};

// A chat exchange. Turns strictly alternate user/model and always start with
// a user turn; the mutators below enforce that, so a Conversation built
// through them is valid by construction.
struct Conversation {
  std::vector<Turn> turns;
  GenParams params;

  void add_user(std::string text);
  void add_model(std::string text);

  // Text of the most recent user turn. Throws std::logic_error when empty.
  const std::string& last_user_text() const;
};

// Plain-text rendering used for content-addressed transcript storage.
std::string serialize_transcript(const Conversation& conversation);

}  // namespace sieve
