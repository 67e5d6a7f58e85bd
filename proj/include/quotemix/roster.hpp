#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "quotemix/domain.hpp"

namespace quotemix {

// Brand/persona roster.
//
// JSON schema:
//   {
//     "brands":   [ {"name": "DKNY", "domain": "clothing", "keywords": ["dkny", "new york"]}, ... ],
//     "personas": [ {"label": "Anticipation", "guideline": "..."}, ... ]
//   }
// Domains must be one of the eight labels, persona labels one of the five.
// A persona entry may omit "guideline"; prompt rendering then fails for it.
class Roster {
 public:
  Roster(std::vector<Brand> brands, std::vector<Persona> personas);

  const std::vector<Brand>& brands() const { return brands_; }
  const std::vector<Persona>& personas() const { return personas_; }

  // Case-insensitive lookups.
  std::optional<Brand> find_brand(std::string_view name) const;
  std::optional<Persona> find_persona(std::string_view label) const;

  // Every (brand, persona) pair, brand-major.
  std::vector<Cell> cells() const;

 private:
  std::vector<Brand> brands_;
  std::vector<Persona> personas_;
};

Roster roster_from_json(const nlohmann::json& j);
nlohmann::json roster_to_json(const Roster& roster);
Roster load_roster(const std::filesystem::path& path);

}  // namespace quotemix
