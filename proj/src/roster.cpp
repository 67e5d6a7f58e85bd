#include "quotemix/roster.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace quotemix {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Roster::Roster(std::vector<Brand> brands, std::vector<Persona> personas)
    : brands_(std::move(brands)), personas_(std::move(personas)) {
  if (brands_.empty()) throw InvalidArgument("roster has no brands");
  if (personas_.empty()) throw InvalidArgument("roster has no personas");
  std::set<std::string> seen;
  for (const auto& b : brands_) {
    if (!seen.insert(lower(b.name())).second) {
      throw InvalidArgument("duplicate brand '" + b.name() + "' in roster");
    }
  }
  std::set<PersonaLabel> labels;
  for (const auto& p : personas_) {
    if (!labels.insert(p.label()).second) {
      throw InvalidArgument("duplicate persona '" + std::string(p.name()) + "' in roster");
    }
  }
}

std::optional<Brand> Roster::find_brand(std::string_view name) const {
  auto key = lower(name);
  for (const auto& b : brands_) {
    if (lower(b.name()) == key) return b;
  }
  return std::nullopt;
}

std::optional<Persona> Roster::find_persona(std::string_view label) const {
  auto key = lower(label);
  for (const auto& p : personas_) {
    if (lower(p.name()) == key) return p;
  }
  return std::nullopt;
}

std::vector<Cell> Roster::cells() const {
  std::vector<Cell> out;
  out.reserve(brands_.size() * personas_.size());
  for (const auto& b : brands_) {
    for (const auto& p : personas_) out.push_back(Cell{b, p});
  }
  return out;
}

Roster roster_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("brands") || !j.contains("personas")) {
    throw InvalidArgument("roster must be an object with 'brands' and 'personas'");
  }
  std::vector<Brand> brands;
  for (const auto& b : j.at("brands")) {
    std::vector<std::string> keywords;
    if (b.contains("keywords")) keywords = b.at("keywords").get<std::vector<std::string>>();
    brands.emplace_back(b.at("name").get<std::string>(),
                        parse_domain(b.at("domain").get<std::string>()), std::move(keywords));
  }
  std::vector<Persona> personas;
  for (const auto& p : j.at("personas")) {
    std::string guideline;
    if (p.contains("guideline") && p.at("guideline").is_string()) {
      guideline = p.at("guideline").get<std::string>();
    }
    personas.emplace_back(parse_persona_label(p.at("label").get<std::string>()), std::move(guideline));
  }
  return Roster(std::move(brands), std::move(personas));
}

nlohmann::json roster_to_json(const Roster& roster) {
  nlohmann::json brands = nlohmann::json::array();
  for (const auto& b : roster.brands()) {
    brands.push_back({{"name", b.name()}, {"domain", to_string(b.domain())}, {"keywords", b.keywords()}});
  }
  nlohmann::json personas = nlohmann::json::array();
  for (const auto& p : roster.personas()) {
    personas.push_back({{"label", p.name()}, {"guideline", p.guideline()}});
  }
  return {{"brands", brands}, {"personas", personas}};
}

Roster load_roster(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open roster file " + path.string());
  try {
    return roster_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed roster " + path.string() + ": " + e.what());
  }
}

}  // namespace quotemix
