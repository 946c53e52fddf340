#pragma once

#include <string>
#include <vector>

// Prompt templates.
//
// Every prompt sent to a model is rendered from a file in the templates
// directory. Files are loaded byte-exactly (no trimming, no newline
// normalization) and substitution fills "{}" placeholders left to right in a
// single pass, so placeholder-like text inside substituted arguments is never
// re-scanned. Each template has a fixed arity that is checked at load time
// and again at render time.

namespace sieve::templates {

struct PromptTemplate {
  std::string name;
  std::string text;
  int arity = 0;
};

// Number of "{}" placeholders in a template body.
int count_placeholders(const std::string& text);

// Single left-to-right substitution pass. args.size() must equal the
// template's arity; throws std::invalid_argument otherwise.
std::string render(const PromptTemplate& tmpl, const std::vector<std::string>& args);

// The full registry of template files the pipeline knows about, with their
// required arities.
struct TemplateSpec {
  const char* name;
  int arity;
};
const std::vector<TemplateSpec>& expected_templates();

class TemplateSet {
public:
  // Loads every expected template from `dir`, verifying that each file
  // exists and contains exactly the declared number of placeholders.
  static TemplateSet load_dir(const std::string& dir);

  const PromptTemplate& get(const std::string& name) const;
  bool has(const std::string& name) const;

private:
  std::vector<PromptTemplate> templates_;
};

}  // namespace sieve::templates
