#include "deferral/types.hpp"

#include <cmath>
#include <fmt/format.h>

namespace deferral {

namespace {

constexpr std::array<std::string_view, 6> kSiteTypeNames = {
    "herb_rich", "herb_rich_heath", "mesic_heath", "sub_xeric_heath", "xeric_heath", "barren_heath",
};

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

} // namespace

std::string_view to_string(SiteType type) { return kSiteTypeNames[static_cast<std::size_t>(type)]; }

std::optional<SiteType> parse_site_type(std::string_view text) {
  for (std::size_t i = 0; i < kSiteTypeNames.size(); ++i) {
    if (kSiteTypeNames[i] == text)
      return static_cast<SiteType>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Species species) {
  return species == Species::Broadleaf ? "broadleaf" : "conifer";
}

std::optional<Species> parse_species(std::string_view text) {
  if (text == "broadleaf")
    return Species::Broadleaf;
  if (text == "conifer")
    return Species::Conifer;
  return std::nullopt;
}

std::string_view to_string(OwnerKind kind) {
  return kind == OwnerKind::Hartmanian ? "hartmanian" : "faustmannian";
}

std::vector<Violation> validate_site(const SiteRecord& site) {
  std::vector<Violation> out;
  auto need = [&out](bool ok, std::string field, std::string rule) {
    if (!ok)
      out.push_back({std::move(field), std::move(rule)});
  };

  need(!site.id.empty(), "id", "must be non-empty");
  need(std::isfinite(site.area_ha) && site.area_ha > 0.0, "area_ha", "must be > 0");
  need(finite_nonneg(site.stand_age), "stand_age", "must be >= 0");
  need(finite_nonneg(site.stand_volume), "stand_volume", "must be >= 0");
  need(std::isfinite(site.broadleaf_share) && site.broadleaf_share >= 0.0 && site.broadleaf_share <= 1.0,
       "broadleaf_share", "must lie in [0, 1]");
  need(finite_nonneg(site.deadwood), "deadwood", "must be >= 0");
  need(finite_nonneg(site.timber_value), "timber_value", "must be finite and >= 0");
  need(finite_nonneg(site.land_payment), "land_payment", "must be finite and >= 0");
  need(finite_nonneg(site.opportunity_cost_v0), "opportunity_cost_v0", "must be finite and >= 0");
  need(std::isfinite(site.commercial_rotation_age) && site.commercial_rotation_age > 0.0,
       "commercial_rotation_age", "must be > 0");

  if (std::isfinite(site.broadleaf_share) && site.broadleaf_share >= 0.0 && site.broadleaf_share <= 1.0) {
    const bool broadleaf_majority = site.broadleaf_share >= 0.5;
    const bool says_broadleaf = site.dominant_species == Species::Broadleaf;
    need(broadleaf_majority == says_broadleaf, "dominant_species",
         "inconsistent with broadleaf_share (share >= 0.5 iff broadleaf)");
  }
  return out;
}

double conservation_payment(const SiteRecord& site) { return site.timber_value + site.land_payment; }

std::vector<Violation> validate_profile(const LandownerProfile& owner) {
  std::vector<Violation> out;
  if (owner.kind == OwnerKind::Faustmannian) {
    if (owner.a0 != 0.0 || owner.a1 != 0.0)
      out.push_back({"a0/a1", "must be zero for a Faustmannian owner"});
    return out;
  }
  if (!(std::isfinite(owner.phi) && owner.phi > 0.0))
    out.push_back({"phi", "must be > 0"});
  if (!finite_nonneg(owner.a0))
    out.push_back({"a0", "must be >= 0"});
  if (!finite_nonneg(owner.a1))
    out.push_back({"a1", "must be >= 0"});
  if (owner.a1 < owner.a0)
    out.push_back({"a1", "must be >= a0"});
  return out;
}

std::vector<std::string> config_violations(const SchemeConfig& cfg) {
  std::vector<std::string> out;
  auto need = [&out](bool ok, std::string msg) {
    if (!ok)
      out.push_back(std::move(msg));
  };

  need(finite_nonneg(cfg.interest_rate_r), "interest_rate_r must be >= 0");
  need(cfg.lending_period_t >= 1, "lending_period_t must be >= 1");
  need(cfg.instalment_count_x >= 1, "instalment_count_x must be >= 1");
  need(finite_nonneg(cfg.bid_cap_lo), "bid_cap_lo must be >= 0");
  need(std::isfinite(cfg.bid_cap_hi) && cfg.bid_cap_hi > cfg.bid_cap_lo, "bid_cap_hi must be > bid_cap_lo");
  need(std::isfinite(cfg.upfront_cap_hi) && cfg.upfront_cap_hi > 0.0, "upfront_cap_hi must be > 0");
  need(finite_nonneg(cfg.discount_rate), "discount_rate must be >= 0");
  need(finite_nonneg(cfg.landowner_discount_rate), "landowner_discount_rate must be >= 0");
  need(std::isfinite(cfg.benefit_per_ha), "benefit_per_ha must be finite");
  need(cfg.horizon() >= 1, "horizon_years must be >= 1");
  need(cfg.harvest_window >= 1, "harvest_window must be >= 1");

  const auto& am = cfg.amenity;
  need(std::isfinite(am.d0) && am.d0 > 0.0, "amenity d0 must be > 0");
  need(std::isfinite(am.d1) && am.d1 > 0.0 && am.d1 < 1.0, "amenity d1 must lie in (0, 1)");
  need(std::isfinite(am.k_max) && am.k_max > 0.0, "amenity k_max must be > 0");
  need(std::isfinite(am.phi_mean) && am.phi_mean > 0.0, "amenity phi_mean must be > 0");
  need(finite_nonneg(am.phi_sd), "amenity phi_sd must be >= 0");
  need(std::isfinite(am.phi_floor) && am.phi_floor > 0.0, "amenity phi_floor must be > 0");

  if (cfg.instalment_count_x >= 1 && cfg.lending_period_t >= 0 && finite_nonneg(cfg.interest_rate_r)) {
    const double omega =
        1.0 - std::pow(1.0 + cfg.interest_rate_r, cfg.lending_period_t) / cfg.instalment_count_x;
    need(omega > 0.0 && omega < 1.0,
         fmt::format("Omega = 1 - (1+r)^t/x = {:.6f} must lie in (0, 1)", omega));
  }
  return out;
}

void require_valid(const SchemeConfig& cfg) {
  const auto problems = config_violations(cfg);
  if (problems.empty())
    return;
  std::string msg = "invalid scheme config:";
  for (const auto& p : problems)
    msg += "\n  - " + p;
  throw ConfigError(msg);
}

} // namespace deferral
