#include "deferral/ecology.hpp"

#include "deferral/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

namespace deferral::ecology {

double amenity_value(double stand_age, double phi, const AmenityParams& params) {
  return 1.0 / (1.0 / (phi * params.k_max) + params.d0 * std::pow(params.d1, stand_age));
}

AmenityPair amenity_pair(const SiteRecord& site, double phi, const AmenityParams& params) {
  return {
      amenity_value(site.commercial_rotation_age, phi, params),
      amenity_value(site.stand_age + kConservedAmenityHorizon, phi, params),
  };
}

OwnerKind classify_landowner(const SiteRecord& site) {
  return site.stand_age > site.commercial_rotation_age ? OwnerKind::Hartmanian : OwnerKind::Faustmannian;
}

LandownerProfile landowner_profile(const SiteRecord& site, double phi, const AmenityParams& params) {
  if (classify_landowner(site) == OwnerKind::Faustmannian)
    return LandownerProfile::faustmannian();
  const auto [a0, a1] = amenity_pair(site, phi, params);
  return LandownerProfile::hartmanian(phi, a0, a1);
}

bool EliteComponent::applies_to(SiteType type) const {
  return std::find(applicable_site_types.begin(), applicable_site_types.end(), type) !=
         applicable_site_types.end();
}

std::vector<const EliteComponent*> EliteTable::components_for(SiteType type) const {
  std::vector<const EliteComponent*> out;
  for (const auto& c : components) {
    if (c.applies_to(type))
      out.push_back(&c);
  }
  return out;
}

void validate(const EliteTable& table) {
  for (const auto& c : table.components) {
    if (!(c.weight > 0.0 && c.weight <= 1.0))
      throw ConfigError(fmt::format("ELITE component '{}': weight {} outside (0, 1]", c.name, c.weight));
    if (!(std::isfinite(c.reference) && c.reference > 0.0))
      throw ConfigError(fmt::format("ELITE component '{}': reference must be > 0", c.name));
  }
  for (SiteType type : kAllSiteTypes) {
    if (table.components_for(type).empty())
      throw ConfigError(fmt::format("ELITE table has no component for site type '{}'", to_string(type)));
  }
}

EliteTable default_elite_table() {
  const std::vector<SiteType> all(kAllSiteTypes.begin(), kAllSiteTypes.end());
  EliteTable table;
  table.components = {
      {"deadwood", 0.6, 20.0, all},
      {"stand_age", 0.4, 150.0, all},
      {"broadleaf_share", 0.2, 0.2, {SiteType::HerbRich, SiteType::HerbRichHeath}},
  };
  return table;
}

EliteTable load_elite_table(const std::filesystem::path& path) {
  const auto data = csv::read_file(path);
  const auto col_name = data.column("component");
  const auto col_types = data.column("site_types");
  const auto col_weight = data.column("weight");
  const auto col_ref = data.column("reference");
  if (!col_name || !col_types || !col_weight || !col_ref)
    throw ConfigError(fmt::format("{}: header must contain component,site_types,weight,reference", path.string()));

  EliteTable table;
  table.source = path.string();
  for (const auto& row : data.rows) {
    EliteComponent c;
    c.name = row.cells[*col_name];
    const auto weight = csv::to_double(row.cells[*col_weight]);
    const auto reference = csv::to_double(row.cells[*col_ref]);
    if (!weight || !reference)
      throw ConfigError(fmt::format("{}:{}: unparseable weight or reference", path.string(), row.line));
    c.weight = *weight;
    c.reference = *reference;

    const std::string& types = row.cells[*col_types];
    if (types == "all") {
      c.applicable_site_types.assign(kAllSiteTypes.begin(), kAllSiteTypes.end());
    } else {
      std::size_t start = 0;
      while (start <= types.size()) {
        const auto end = std::min(types.find(';', start), types.size());
        const auto name = std::string_view(types).substr(start, end - start);
        const auto parsed = parse_site_type(name);
        if (!parsed)
          throw ConfigError(fmt::format("{}:{}: unknown site type '{}'", path.string(), row.line, name));
        c.applicable_site_types.push_back(*parsed);
        start = end + 1;
      }
    }
    table.components.push_back(std::move(c));
  }
  validate(table);
  return table;
}

double component_state(const SiteRecord& site, const std::string& component) {
  if (component == "deadwood")
    return site.deadwood;
  if (component == "stand_age")
    return site.stand_age;
  if (component == "broadleaf_share")
    return site.broadleaf_share;
  if (component == "burnt_area")
    return 0.0;
  throw std::invalid_argument(
      fmt::format("site '{}' has no data for ELITE component '{}'", site.id, component));
}

double elite_index(const SiteRecord& site, const EliteTable& table) {
  const auto components = table.components_for(site.site_type);
  if (components.empty())
    throw std::invalid_argument(
        fmt::format("ELITE table does not cover site type '{}'", to_string(site.site_type)));
  double e = 1.0;
  for (const EliteComponent* c : components) {
    const double ratio = std::min(component_state(site, c->name) / c->reference, 1.0);
    e *= 1.0 - c->weight * (1.0 - ratio);
  }
  return e;
}

double old_growth_threshold(SiteType type, Species dominant) {
  const bool broadleaf = dominant == Species::Broadleaf;
  switch (type) {
  case SiteType::HerbRich:
    return broadleaf ? 70.0 : 100.0;
  case SiteType::HerbRichHeath:
    return broadleaf ? 80.0 : 100.0;
  case SiteType::MesicHeath:
    return broadleaf ? 80.0 : 120.0;
  case SiteType::SubXericHeath:
  case SiteType::XericHeath:
  case SiteType::BarrenHeath:
    return 140.0;
  }
  return 140.0;
}

bool is_old_growth(const SiteRecord& site) {
  return site.stand_age >= old_growth_threshold(site.site_type, site.dominant_species);
}

} // namespace deferral::ecology
