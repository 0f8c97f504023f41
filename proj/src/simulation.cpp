#include "deferral/simulation.hpp"

#include "deferral/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace deferral::simulation {

std::string_view to_string(Mechanism mechanism) {
  return mechanism == Mechanism::Deferred ? "deferred" : "upfront";
}

double draw_phi(const SchemeConfig& cfg, std::size_t site_index) {
  auto engine = rng::stream(cfg.seed, "phi", site_index);
  std::normal_distribution<double> normal(cfg.amenity.phi_mean, cfg.amenity.phi_sd);
  return std::max(normal(engine), cfg.amenity.phi_floor);
}

std::vector<SiteEvaluation> evaluate_sites(const Dataset& dataset, const SchemeConfig& cfg,
                                           const ecology::EliteTable& table) {
  std::vector<SiteEvaluation> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const SiteRecord& site = dataset[i];
    SiteEvaluation ev;
    ev.site_index = i;
    // phi is drawn for every site so that a site's draw does not depend on
    // how its neighbours are classified.
    const double phi = draw_phi(cfg, i);
    ev.owner = ecology::landowner_profile(site, phi, cfg.amenity);
    ev.elite = ecology::elite_index(site, table);
    ev.deferred = bidding::optimal_downpayment(site, ev.owner, cfg);
    ev.upfront = bidding::upfront_bid(site, ev.owner, cfg.upfront_cap_hi);
    out.push_back(ev);
  }
  return out;
}

std::vector<Offer> build_offers(const Dataset& dataset, const std::vector<SiteEvaluation>& evaluations,
                                Mechanism mechanism) {
  std::vector<Offer> offers;
  for (const auto& ev : evaluations) {
    const bool in = mechanism == Mechanism::Deferred ? ev.deferred.participates : ev.upfront.participates;
    if (!in)
      continue;
    const SiteRecord& site = dataset.at(ev.site_index);
    Offer offer;
    offer.site_index = ev.site_index;
    offer.site_id = site.id;
    offer.mechanism = mechanism;
    offer.area_ha = site.area_ha;
    offer.stand_age = site.stand_age;
    offer.elite = ev.elite;
    if (mechanism == Mechanism::Deferred)
      offer.bid = ev.deferred;
    else
      offer.upfront_payment = ev.upfront.total_payment;
    offers.push_back(std::move(offer));
  }
  return offers;
}

std::vector<Offer> build_offers(const Dataset& dataset, const SchemeConfig& cfg, Mechanism mechanism,
                                const ecology::EliteTable& table) {
  return build_offers(dataset, evaluate_sites(dataset, cfg, table), mechanism);
}

double offered_area(const std::vector<Offer>& offers) {
  double area = 0.0;
  for (const auto& o : offers)
    area += o.area_ha;
  return area;
}

int years_to_rotation(const SiteRecord& site) {
  return static_cast<int>(std::max(0.0, std::ceil(site.commercial_rotation_age - site.stand_age)));
}

HarvestSchedule draw_harvest_schedule(const Dataset& dataset, const SchemeConfig& cfg) {
  HarvestSchedule schedule;
  schedule.harvest_year.resize(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int first = years_to_rotation(dataset[i]);
    if (first >= cfg.harvest_window)
      continue;
    auto engine = rng::stream(cfg.seed, "harvest", i);
    std::uniform_int_distribution<int> year(first, cfg.harvest_window - 1);
    schedule.harvest_year[i] = year(engine);
  }
  return schedule;
}

std::vector<std::size_t> rank_benefit_cost(const std::vector<Offer>& offers) {
  std::vector<double> ratio(offers.size());
  for (std::size_t i = 0; i < offers.size(); ++i) {
    const double benefit = offers[i].elite * offers[i].area_ha;
    const double cost = offers[i].cost();
    if (benefit <= 0.0)
      ratio[i] = 0.0;
    else if (cost <= 0.0)
      ratio[i] = std::numeric_limits<double>::infinity();
    else
      ratio[i] = benefit / cost;
  }
  std::vector<std::size_t> order(offers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ratio[a] != ratio[b])
      return ratio[a] > ratio[b];
    if (offers[a].cost() != offers[b].cost())
      return offers[a].cost() < offers[b].cost();
    return offers[a].site_id < offers[b].site_id;
  });
  return order;
}

std::vector<Offer> select_old_growth(const std::vector<Offer>& offers, const Dataset& dataset) {
  std::vector<Offer> out;
  for (const auto& o : offers) {
    if (ecology::is_old_growth(dataset.at(o.site_index)))
      out.push_back(o);
  }
  return out;
}

std::vector<std::string> RunOutcome::conserved_in(int year) const {
  std::vector<std::string> ids;
  for (const auto& c : conserved) {
    if (c.year == year)
      ids.push_back(c.site_id);
  }
  return ids;
}

std::vector<std::string> RunOutcome::harvested_in(int year) const {
  std::vector<std::string> ids;
  for (const auto& l : lost) {
    if (l.harvest_year == year)
      ids.push_back(l.site_id);
  }
  return ids;
}

std::vector<double> RunOutcome::spent_by_year() const {
  std::vector<double> out(static_cast<std::size_t>(std::max(years(), spending.last_year() + 1)), 0.0);
  for (const auto& [year, amount] : spending.flows())
    out[static_cast<std::size_t>(year)] = amount;
  return out;
}

namespace {

void check_budget(double budget, const char* what) {
  if (!std::isfinite(budget) || budget < 0.0)
    throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
}

enum class Fate : std::uint8_t { Open, Conserved, Lost };

// One greedy skip-and-continue pass over the ranking. Returns money spent.
double fund_round(int year, double budget, const std::vector<Offer>& offers, const std::vector<std::size_t>& ranking,
                  const SchemeConfig& cfg, const HarvestSchedule& schedule, std::vector<Fate>& fate,
                  RunOutcome& outcome) {
  if (budget <= 0.0)
    return 0.0;
  double remaining = budget;
  for (std::size_t idx : ranking) {
    if (fate[idx] != Fate::Open)
      continue;
    const Offer& offer = offers[idx];
    if (offer.mechanism == Mechanism::Deferred && offer.bid.downpayment_c > cfg.bid_cap_hi)
      continue;
    const double cost = offer.cost();
    if (cost > remaining)
      continue;
    const auto harvest = schedule.year_for(offer.site_index);
    if (harvest && *harvest < year) {
      fate[idx] = Fate::Lost;
      outcome.lost.push_back(
          {offer.site_id, offer.site_index, *harvest, offer.area_ha, offer.stand_age, offer.elite});
      continue;
    }
    fate[idx] = Fate::Conserved;
    remaining -= cost;
    ConservedSite site{offer.site_id, offer.site_index, year, offer.area_ha, offer.stand_age, offer.elite,
                       offer.cost_per_ha(), 0.0};
    if (offer.mechanism == Mechanism::Deferred)
      site.instalment = offer.bid.instalment_m;
    outcome.conserved.push_back(site);
  }
  return budget - remaining;
}

} // namespace

RunOutcome run_deferred(const std::vector<Offer>& offers, const std::vector<std::size_t>& ranking,
                        const SchemeConfig& cfg, double initial_budget, const HarvestSchedule& schedule) {
  check_budget(initial_budget, "initial budget");
  RunOutcome out;
  out.mechanism = Mechanism::Deferred;
  out.budget = initial_budget;
  out.offered_area_ha = offered_area(offers);

  std::vector<Fate> fate(offers.size(), Fate::Open);
  const double spent = fund_round(0, initial_budget, offers, ranking, cfg, schedule, fate, out);

  double instalments = 0.0;
  for (const auto& c : out.conserved)
    instalments += c.instalment * c.area_ha;

  const int x = cfg.instalment_count_x;
  out.budget_by_year.assign(static_cast<std::size_t>(std::max(cfg.horizon(), x + 1)), 0.0);
  out.budget_by_year[0] = initial_budget;
  out.spending.add(0, spent);
  for (int y = 1; y <= x; ++y) {
    out.budget_by_year[static_cast<std::size_t>(y)] = instalments;
    out.spending.add(y, instalments);
  }
  out.summary = account(out, cfg);
  return out;
}

RunOutcome run_upfront(const std::vector<Offer>& offers, const std::vector<std::size_t>& ranking,
                       const SchemeConfig& cfg, double annual_budget, const HarvestSchedule& schedule) {
  check_budget(annual_budget, "annual budget");
  RunOutcome out;
  out.mechanism = Mechanism::Upfront;
  out.budget = annual_budget;
  out.offered_area_ha = offered_area(offers);

  const int horizon = cfg.horizon();
  out.budget_by_year.assign(static_cast<std::size_t>(horizon), annual_budget);
  std::vector<Fate> fate(offers.size(), Fate::Open);
  for (int y = 0; y < horizon; ++y)
    out.spending.add(y, fund_round(y, annual_budget, offers, ranking, cfg, schedule, fate, out));
  out.summary = account(out, cfg);
  return out;
}

Summary account(const RunOutcome& outcome, const SchemeConfig& cfg) {
  const double delta = cfg.discount_rate;
  Summary s;
  s.budget = outcome.budget;
  s.offered_area_ha = outcome.offered_area_ha;

  double age_sum = 0.0;
  double down_sum = 0.0;
  double inst_sum = 0.0;
  double total_npv_sum = 0.0;
  for (const auto& c : outcome.conserved) {
    s.area_ha += c.area_ha;
    s.bd_index_sum += c.elite * c.area_ha;
    age_sum += c.stand_age * c.area_ha;
    down_sum += c.downpayment * c.area_ha;
    inst_sum += c.instalment * c.area_ha;
    const double per_ha_npv =
        c.downpayment + (c.instalment > 0.0
                             ? finance::discounted_instalment_sum(c.instalment, cfg.instalment_count_x, delta)
                             : 0.0);
    total_npv_sum += per_ha_npv * c.area_ha;
    s.benefits_npv += cfg.benefit_per_ha * c.area_ha / finance::compound_factor(delta, c.year);
  }
  if (s.area_ha > 0.0) {
    s.avg_stand_age = age_sum / s.area_ha;
    s.avg_downpayment = down_sum / s.area_ha;
    s.avg_instalment = inst_sum / s.area_ha;
    s.avg_total_payment_npv = total_npv_sum / s.area_ha;
  }
  if (outcome.mechanism == Mechanism::Deferred)
    s.instalment_cost_per_year = inst_sum;

  for (const auto& l : outcome.lost) {
    s.lost_area_ha += l.area_ha;
    s.lost_benefits -= cfg.benefit_per_ha * l.area_ha / finance::compound_factor(delta, l.harvest_year);
  }
  s.costs_npv = finance::npv(outcome.spending, delta);
  s.absolute_costs = outcome.spending.total();
  s.ex_post_net_benefits = s.benefits_npv + s.lost_benefits;
  return s;
}

NationalCost extrapolate_national(const NationalInput& in, const SchemeConfig& cfg) {
  const double delta = cfg.discount_rate;
  const int x = cfg.instalment_count_x;
  const int horizon = cfg.horizon();
  NationalCost out;
  out.deferred_downpayments = in.area_ha * in.avg_downpayment;
  out.deferred_instalments_per_year = in.area_ha * in.avg_instalment;
  out.deferred_npv = out.deferred_downpayments + out.deferred_instalments_per_year * finance::annuity_factor(x, delta);
  out.deferred_absolute = out.deferred_downpayments + out.deferred_instalments_per_year * x;
  out.upfront_area_per_year = in.area_ha / horizon;
  out.upfront_annual = out.upfront_area_per_year * in.avg_upfront;
  out.upfront_npv = out.upfront_annual * finance::annuity_due_factor(horizon, delta);
  out.upfront_absolute = out.upfront_annual * horizon;
  out.harvest_loss_area = in.area_ha * in.harvest_loss_share;
  return out;
}

} // namespace deferral::simulation
