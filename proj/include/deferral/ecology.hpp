#pragma once

// Ecological valuation: landowner amenity benefits, the ELITE habitat
// condition index, old-growth age criteria and landowner typing.

#include "deferral/types.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace deferral::ecology {

/// Logistic amenity value A(h) = 1 / (1/(phi K_max) + d0 d1^h), €/ha.
double amenity_value(double stand_age, double phi, const AmenityParams& params);

struct AmenityPair {
  double a0 = 0.0; ///< at the commercial rotation age
  double a1 = 0.0; ///< at current age + 50 years
};

/// Amenity values without (a0) and with (a1) conservation for a Hartmanian owner.
AmenityPair amenity_pair(const SiteRecord& site, double phi, const AmenityParams& params);

/// Years added to the current stand age when valuing amenities under conservation.
inline constexpr double kConservedAmenityHorizon = 50.0;

/// Hartmanian iff the stand is strictly older than its commercial rotation age.
OwnerKind classify_landowner(const SiteRecord& site);

/// Builds the owner profile for a site given the owner's amenity scale phi.
/// phi is ignored for Faustmannian owners.
LandownerProfile landowner_profile(const SiteRecord& site, double phi, const AmenityParams& params);

struct EliteComponent {
  std::string name;
  double weight = 0.0;
  double reference = 0.0;
  std::vector<SiteType> applicable_site_types;

  bool applies_to(SiteType type) const;
};

/// Component weights and reference states per site type.
struct EliteTable {
  std::vector<EliteComponent> components;
  /// Where the table came from; recorded in reports.
  std::string source = "built-in default";

  std::vector<const EliteComponent*> components_for(SiteType type) const;
};

/// Throws ConfigError if any component or site-type coverage rule is broken.
void validate(const EliteTable& table);

/// Built-in table. These weights and references are implementer-chosen
/// defaults, not published values: deadwood (20 m³/ha, 0.6) and stand age
/// (150 yr, 0.4) for all types; broadleaf share (0.2, 0.2) for herb-rich
/// and herb-rich heath sites.
EliteTable default_elite_table();

/// Loads a table from CSV with header `component,site_types,weight,reference`.
/// `site_types` is `all` or a `;`-separated list of site type names.
EliteTable load_elite_table(const std::filesystem::path& path);

/// Current state of a named component for a site. Known components are
/// `deadwood`, `stand_age` (stand-in for large trees), `broadleaf_share` and
/// `burnt_area` (always zero). Throws std::invalid_argument for any other name.
double component_state(const SiteRecord& site, const std::string& component);

/// Multiplicative habitat index in [0, 1]:
///   e = prod_n (1 - L_n (1 - min(current_n / reference_n, 1)))
double elite_index(const SiteRecord& site, const EliteTable& table);

/// Stand-age threshold for old-growth status.
double old_growth_threshold(SiteType type, Species dominant);

bool is_old_growth(const SiteRecord& site);

} // namespace deferral::ecology
