#include "sieve/conversation.hpp"

#include <stdexcept>

namespace sieve {

void Conversation::add_user(std::string text) {
  if (!turns.empty() && turns.back().role == Role::user)
    throw std::logic_error("conversation: consecutive user turns");
  turns.push_back({Role::user, std::move(text)});
}

void Conversation::add_model(std::string text) {
  if (turns.empty() || turns.back().role == Role::model)
    throw std::logic_error("conversation: model turn must follow a user turn");
  turns.push_back({Role::model, std::move(text)});
}

const std::string& Conversation::last_user_text() const {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->role == Role::user) return it->text;
  }
  throw std::logic_error("conversation: no user turn");
}

std::string serialize_transcript(const Conversation& conversation) {
  std::string out;
  for (const auto& turn : conversation.turns) {
    out += (turn.role == Role::user) ? "### user\n" : "### model\n";
    out += turn.text;
    out += "\n";
  }
  return out;
}

}  // namespace sieve
