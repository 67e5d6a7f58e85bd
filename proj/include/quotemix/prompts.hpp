#pragma once

#include <map>
#include <string>
#include <string_view>

#include "quotemix/domain.hpp"

namespace quotemix {

// Versioned prompt cards compiled in from assets/prompts/<name>.<version>.txt.
struct PromptTemplate {
  std::string name;     // e.g. "remix"
  std::string version;  // e.g. "remix.v1"
  std::string text;
};

// Throws InvalidArgument for an unknown name.
const PromptTemplate& prompt_template(std::string_view name);

// name -> version for every compiled-in card.
std::map<std::string, std::string> template_versions();

class TemplateError : public Error {
 public:
  using Error::Error;
};

// Single-pass substitution of `{Placeholder}` tokens. Substituted values are
// not rescanned. A placeholder without a value throws TemplateError.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& values);

class MissingGuideline : public Error {
 public:
  explicit MissingGuideline(PersonaLabel label);
  PersonaLabel label() const { return label_; }

 private:
  PersonaLabel label_;
};

struct RemixPrompt {
  std::string rendered;
  Brand brand;
  Persona persona;
  std::string template_version;
};

// Renders the remix card for one cell. Deterministic.
RemixPrompt build_remix_prompt(const Brand& brand, const Persona& persona);

}  // namespace quotemix
