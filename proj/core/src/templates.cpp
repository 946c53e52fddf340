#include "sieve/templates.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sieve::templates {

namespace {

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("templates: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

}  // namespace

int count_placeholders(const std::string& text) {
  int n = 0;
  std::size_t pos = 0;
  while ((pos = text.find("{}", pos)) != std::string::npos) {
    ++n;
    pos += 2;
  }
  return n;
}

std::string render(const PromptTemplate& tmpl, const std::vector<std::string>& args) {
  if (static_cast<int>(args.size()) != tmpl.arity)
    throw std::invalid_argument("templates: " + tmpl.name + " takes " +
                                std::to_string(tmpl.arity) + " arguments, got " +
                                std::to_string(args.size()));
  std::string out;
  out.reserve(tmpl.text.size());
  std::size_t pos = 0;
  std::size_t arg = 0;
  while (true) {
    const std::size_t at = tmpl.text.find("{}", pos);
    if (at == std::string::npos) {
      out.append(tmpl.text, pos, std::string::npos);
      break;
    }
    out.append(tmpl.text, pos, at - pos);
    out += args[arg++];
    pos = at + 2;
  }
  return out;
}

const std::vector<TemplateSpec>& expected_templates() {
  static const std::vector<TemplateSpec> specs{
      {"inference_boxed", 1},
      {"inference_verbatim", 1},
      {"verification_1", 2},
      {"verification_2", 0},
      {"verification_3", 0},
      {"verification_4", 0},
      {"verification_5", 0},
      {"verification_6", 0},
      {"verification_7", 0},
      {"verification_8", 2},
      {"verification_9", 0},
      {"comparison_1", 3},
      {"comparison_2", 0},
      {"comparison_3", 1},
      {"comparison_4", 1},
      {"comparison_5", 0},
      {"comparison_summary", 0},
      {"extraction", 1},
      {"grading_1", 3},
      {"grading_2", 0},
      {"bench_comparison", 3},
      {"bench_scoring_1", 2},
      {"bench_scoring_2", 0},
  };
  return specs;
}

TemplateSet TemplateSet::load_dir(const std::string& dir) {
  TemplateSet set;
  for (const auto& spec : expected_templates()) {
    const std::filesystem::path path =
        std::filesystem::path(dir) / (std::string(spec.name) + ".txt");
    PromptTemplate tmpl;
    tmpl.name = spec.name;
    tmpl.text = read_file_bytes(path);
    tmpl.arity = count_placeholders(tmpl.text);
    if (tmpl.arity != spec.arity)
      throw std::runtime_error("templates: " + path.string() + " has " +
                               std::to_string(tmpl.arity) + " placeholders, expected " +
                               std::to_string(spec.arity));
    set.templates_.push_back(std::move(tmpl));
  }
  return set;
}

const PromptTemplate& TemplateSet::get(const std::string& name) const {
  for (const auto& t : templates_) {
    if (t.name == name) return t;
  }
  throw std::invalid_argument("templates: unknown template \"" + name + "\"");
}

bool TemplateSet::has(const std::string& name) const {
  for (const auto& t : templates_) {
    if (t.name == name) return true;
  }
  return false;
}

}  // namespace sieve::templates
