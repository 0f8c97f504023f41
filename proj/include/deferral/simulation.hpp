#pragma once

// Experiment engine: program supply, harvest risk, budget-constrained site
// selection under the deferred and up-front mechanisms, and NPV accounting.
//
// Timing convention: year 0 is the auction year. Within a year, funding
// decisions come first; a stand whose harvest year is y is felled at the end
// of year y, so it is still available in year y's funding round.

#include "deferral/bidding.hpp"
#include "deferral/ecology.hpp"
#include "deferral/finance.hpp"
#include "deferral/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deferral::simulation {

using Dataset = std::vector<SiteRecord>;

enum class Mechanism { Deferred, Upfront };

std::string_view to_string(Mechanism mechanism);

/// Owner's amenity scale: Normal(phi_mean, phi_sd) truncated below at phi_floor,
/// drawn from the "phi" stream keyed by site index.
double draw_phi(const SchemeConfig& cfg, std::size_t site_index);

/// Everything a site's owner would do under both mechanisms.
struct SiteEvaluation {
  std::size_t site_index = 0;
  LandownerProfile owner;
  double elite = 0.0;
  Bid deferred;
  bidding::UpfrontBid upfront;
};

std::vector<SiteEvaluation> evaluate_sites(const Dataset& dataset, const SchemeConfig& cfg,
                                           const ecology::EliteTable& table);

struct Offer {
  std::size_t site_index = 0;
  std::string site_id;
  Mechanism mechanism = Mechanism::Deferred;
  double area_ha = 0.0;
  double stand_age = 0.0;
  double elite = 0.0;
  Bid bid;                       ///< deferred offers
  double upfront_payment = 0.0;  ///< up-front offers, €/ha

  /// Money needed at conservation time, €/ha.
  double cost_per_ha() const { return mechanism == Mechanism::Deferred ? bid.downpayment_c : upfront_payment; }
  double cost() const { return cost_per_ha() * area_ha; }
};

/// Offers from every participating owner under the given mechanism.
std::vector<Offer> build_offers(const Dataset& dataset, const std::vector<SiteEvaluation>& evaluations,
                                Mechanism mechanism);

std::vector<Offer> build_offers(const Dataset& dataset, const SchemeConfig& cfg, Mechanism mechanism,
                                const ecology::EliteTable& table);

double offered_area(const std::vector<Offer>& offers);

struct HarvestSchedule {
  /// Indexed by site index; empty when the stand is not harvested in the window.
  std::vector<std::optional<int>> harvest_year;

  std::optional<int> year_for(std::size_t site_index) const {
    return site_index < harvest_year.size() ? harvest_year[site_index] : std::nullopt;
  }
};

/// Stands reaching rotation age at year y0 < harvest_window are felled in a
/// year drawn uniformly from {y0, ..., harvest_window - 1}.
HarvestSchedule draw_harvest_schedule(const Dataset& dataset, const SchemeConfig& cfg);

/// First year at which the stand reaches its commercial rotation age.
int years_to_rotation(const SiteRecord& site);

/// Offer indices in descending elite*area/cost order; ties go to the cheaper
/// offer, then to the lexicographically smaller site id. A zero-cost offer
/// with positive elite ranks as infinitely efficient; zero elite ranks as 0.
std::vector<std::size_t> rank_benefit_cost(const std::vector<Offer>& offers);

/// Offers on stands meeting the old-growth age criteria.
std::vector<Offer> select_old_growth(const std::vector<Offer>& offers, const Dataset& dataset);

struct ConservedSite {
  std::string site_id;
  std::size_t site_index = 0;
  int year = 0;
  double area_ha = 0.0;
  double stand_age = 0.0;
  double elite = 0.0;
  double downpayment = 0.0; ///< €/ha paid at conservation (full payment for up-front)
  double instalment = 0.0;  ///< €/ha/year
};

struct LostSite {
  std::string site_id;
  std::size_t site_index = 0;
  int harvest_year = 0;
  double area_ha = 0.0;
  double stand_age = 0.0;
  double elite = 0.0;
};

/// Headline figures of one run.
struct Summary {
  double budget = 0.0;                   ///< initial (deferred) or annual (up-front) budget
  double instalment_cost_per_year = 0.0; ///< €/year, deferred only
  double offered_area_ha = 0.0;
  double area_ha = 0.0;
  double lost_area_ha = 0.0;
  double bd_index_sum = 0.0; ///< sum of elite * area
  double avg_stand_age = 0.0;
  double avg_downpayment = 0.0; ///< up-front: the average full payment
  double avg_instalment = 0.0;
  double avg_total_payment_npv = 0.0;
  double costs_npv = 0.0;
  double benefits_npv = 0.0;
  double lost_benefits = 0.0; ///< <= 0
  double ex_post_net_benefits = 0.0;
  double absolute_costs = 0.0;
};

struct RunOutcome {
  Mechanism mechanism = Mechanism::Deferred;
  double budget = 0.0;
  double offered_area_ha = 0.0;
  std::vector<ConservedSite> conserved;
  std::vector<LostSite> lost;
  /// Money available in each year (deferred: initial budget, then instalment obligations).
  std::vector<double> budget_by_year;
  finance::CashflowStream spending;
  Summary summary;

  /// Number of years covered by the time series.
  int years() const { return static_cast<int>(budget_by_year.size()); }
  std::vector<std::string> conserved_in(int year) const;
  std::vector<std::string> harvested_in(int year) const;
  std::vector<double> spent_by_year() const;
};

/// Funds ranked offers once, at year 0, skipping any that does not fit the
/// remaining budget or whose downpayment is above the bid cap. Instalments
/// for funded sites are paid in years 1..x. Throws std::invalid_argument on
/// a negative or non-finite budget.
RunOutcome run_deferred(const std::vector<Offer>& offers, const std::vector<std::size_t>& ranking,
                        const SchemeConfig& cfg, double initial_budget, const HarvestSchedule& schedule);

/// Funds ranked offers year by year from a fixed, non-rolling annual budget.
/// An offer whose stand was felled before its turn, and which the budget
/// would have covered, is recorded as lost.
RunOutcome run_upfront(const std::vector<Offer>& offers, const std::vector<std::size_t>& ranking,
                       const SchemeConfig& cfg, double annual_budget, const HarvestSchedule& schedule);

/// Fills outcome.summary from the recorded flows.
Summary account(const RunOutcome& outcome, const SchemeConfig& cfg);

struct NationalInput {
  double area_ha = 0.0;
  double avg_downpayment = 0.0; ///< €/ha
  double avg_instalment = 0.0;  ///< €/ha/year
  double avg_upfront = 0.0;     ///< €/ha
  double harvest_loss_share = 0.093;
};

struct NationalCost {
  double deferred_downpayments = 0.0;
  double deferred_instalments_per_year = 0.0;
  double deferred_npv = 0.0;
  double deferred_absolute = 0.0;
  double upfront_area_per_year = 0.0;
  double upfront_annual = 0.0;
  double upfront_npv = 0.0;
  double upfront_absolute = 0.0;
  double harvest_loss_area = 0.0;
};

/// Scales average per-hectare costs to a national conservation target.
NationalCost extrapolate_national(const NationalInput& input, const SchemeConfig& cfg);

} // namespace deferral::simulation
