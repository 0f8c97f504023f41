#pragma once

// Shared domain types for the deferred-payment conservation auction.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace deferral {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Finnish forest site types, from most to least fertile.
enum class SiteType : std::uint8_t {
  HerbRich,
  HerbRichHeath,
  MesicHeath,
  SubXericHeath,
  XericHeath,
  BarrenHeath,
};

inline constexpr std::array<SiteType, 6> kAllSiteTypes = {
    SiteType::HerbRich,      SiteType::HerbRichHeath, SiteType::MesicHeath,
    SiteType::SubXericHeath, SiteType::XericHeath,    SiteType::BarrenHeath,
};

std::string_view to_string(SiteType type);
std::optional<SiteType> parse_site_type(std::string_view text);

enum class Species : std::uint8_t { Broadleaf, Conifer };

std::string_view to_string(Species species);
std::optional<Species> parse_species(std::string_view text);

inline constexpr double kDefaultAreaHa = 10.0;
inline constexpr double kDefaultLandPayment = 400.0;

/// One forest stand as offered to the program. Monetary values are €/ha.
struct SiteRecord {
  std::string id;
  double area_ha = kDefaultAreaHa;
  SiteType site_type = SiteType::MesicHeath;
  double stand_age = 0.0;
  double stand_volume = 0.0;
  Species dominant_species = Species::Conifer;
  double broadleaf_share = 0.0;
  double deadwood = 0.0;
  double timber_value = 0.0;
  double land_payment = kDefaultLandPayment;
  double opportunity_cost_v0 = 0.0;
  double commercial_rotation_age = 80.0;

  bool operator==(const SiteRecord&) const = default;
};

struct Violation {
  std::string field;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

/// Checks every SiteRecord invariant. An empty result means the site is valid.
std::vector<Violation> validate_site(const SiteRecord& site);

/// Conservation payment V1: stand timber value plus the fixed land payment.
double conservation_payment(const SiteRecord& site);

enum class OwnerKind : std::uint8_t { Faustmannian, Hartmanian };

std::string_view to_string(OwnerKind kind);

/// Landowner preferences. Amenity values a0 (own management) and a1
/// (under conservation) are zero for Faustmannian owners.
struct LandownerProfile {
  OwnerKind kind = OwnerKind::Faustmannian;
  double phi = 1.0;
  double a0 = 0.0;
  double a1 = 0.0;

  static LandownerProfile faustmannian() { return {}; }
  static LandownerProfile hartmanian(double phi, double a0, double a1) {
    return {OwnerKind::Hartmanian, phi, a0, a1};
  }

  /// A1 - A0, zero for Faustmannian owners.
  double amenity_gain() const { return kind == OwnerKind::Hartmanian ? a1 - a0 : 0.0; }
};

std::vector<Violation> validate_profile(const LandownerProfile& owner);

/// Logistic amenity curve parameters.
struct AmenityParams {
  double d0 = 0.04;
  double d1 = 0.95;
  double k_max = 23500.0;
  double phi_mean = 1.0;
  double phi_sd = 0.2;
  double phi_floor = 0.1;

  bool operator==(const AmenityParams&) const = default;
};

/// Auction rules and accounting parameters.
struct SchemeConfig {
  double interest_rate_r = 0.03;
  int lending_period_t = 10;
  int instalment_count_x = 10;
  double bid_cap_lo = 0.0;
  double bid_cap_hi = 3000.0;
  double upfront_cap_hi = 300.0;
  /// Government-side accounting rate.
  double discount_rate = 0.03;
  /// Landowner-side rate for the participation constraint.
  double landowner_discount_rate = 0.03;
  double benefit_per_ha = 5980.0;
  /// Unset means lending_period_t + 1.
  std::optional<int> horizon_years;
  int harvest_window = 40;
  AmenityParams amenity;
  std::uint64_t seed = 1;

  int horizon() const { return horizon_years.value_or(lending_period_t + 1); }

  bool operator==(const SchemeConfig&) const = default;
};

/// Returns human-readable descriptions of every violated config invariant.
std::vector<std::string> config_violations(const SchemeConfig& cfg);

/// Throws ConfigError listing all violations, if any.
void require_valid(const SchemeConfig& cfg);

/// A landowner's bid in the deferred auction.
struct Bid {
  double downpayment_c = 0.0;
  double instalment_m = 0.0;
  double total_revenue_r = 0.0;
  bool participates = false;

  bool operator==(const Bid&) const = default;
};

} // namespace deferral
