#include "quotemix/prompts.hpp"

#include <vector>

namespace quotemix {

namespace detail {
const std::map<std::string, std::string>& embedded_prompt_assets();
}

namespace {

const std::vector<PromptTemplate>& all_templates() {
  static const std::vector<PromptTemplate> templates = [] {
    std::vector<PromptTemplate> out;
    for (const auto& [asset, text] : detail::embedded_prompt_assets()) {
      auto dot = asset.find('.');
      std::string body = text;
      if (!body.empty() && body.back() == '\n') body.pop_back();
      out.push_back(PromptTemplate{asset.substr(0, dot), asset, std::move(body)});
    }
    return out;
  }();
  return templates;
}

}  // namespace

const PromptTemplate& prompt_template(std::string_view name) {
  for (const auto& t : all_templates()) {
    if (t.name == name) return t;
  }
  throw InvalidArgument("no prompt template named '" + std::string(name) + "'");
}

std::map<std::string, std::string> template_versions() {
  std::map<std::string, std::string> out;
  for (const auto& t : all_templates()) out[t.name] = t.version;
  return out;
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size() + 256);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      auto close = text.find('}', i + 1);
      auto next_open = text.find('{', i + 1);
      if (close != std::string_view::npos && (next_open == std::string_view::npos || close < next_open)) {
        std::string key(text.substr(i + 1, close - i - 1));
        auto it = values.find(key);
        if (it == values.end()) throw TemplateError("no value for placeholder {" + key + "}");
        out += it->second;
        i = close + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

MissingGuideline::MissingGuideline(PersonaLabel label)
    : Error("persona '" + std::string(to_string(label)) + "' has no guideline configured"),
      label_(label) {}

RemixPrompt build_remix_prompt(const Brand& brand, const Persona& persona) {
  if (persona.guideline().empty()) throw MissingGuideline(persona.label());
  const auto& tmpl = prompt_template("remix");
  auto rendered = render_template(tmpl.text, {{"Brand", brand.name()},
                                              {"Persona", std::string(persona.name())},
                                              {"persona_guidelines[Persona]", persona.guideline()}});
  return RemixPrompt{std::move(rendered), brand, persona, tmpl.version};
}

}  // namespace quotemix
