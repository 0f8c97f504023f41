#include "deferral/bidding.hpp"

#include "deferral/finance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deferral::bidding {

namespace {

// Instalment multiplier (1+r)^t / x.
double instalment_multiplier(const SchemeConfig& cfg) {
  return finance::compound_factor(cfg.interest_rate_r, cfg.lending_period_t) / cfg.instalment_count_x;
}

constexpr double kMaxGridPoints = 1e6;

} // namespace

double omega(const SchemeConfig& cfg) { return 1.0 - instalment_multiplier(cfg); }

double acceptance_probability(double c, const BidCapBelief& belief) {
  if (c <= belief.lo)
    return 1.0;
  if (c >= belief.hi)
    return 0.0;
  return (belief.hi - c) / (belief.hi - belief.lo);
}

double expected_payoff(double c, const SiteRecord& site, const LandownerProfile& owner, const SchemeConfig& cfg) {
  const double v1 = conservation_payment(site);
  const double bracket =
      -site.opportunity_cost_v0 + owner.amenity_gain() + c + instalment_multiplier(cfg) * (v1 - c);
  return bracket * acceptance_probability(c, BidCapBelief::deferred(cfg));
}

double closed_form_downpayment(const SiteRecord& site, const LandownerProfile& owner, const SchemeConfig& cfg) {
  const double v1 = conservation_payment(site);
  const double cost_term = site.opportunity_cost_v0 - v1 * instalment_multiplier(cfg) - owner.amenity_gain();
  return cfg.bid_cap_hi / 2.0 + cost_term / (2.0 * omega(cfg));
}

Bid optimal_downpayment(const SiteRecord& site, const LandownerProfile& owner, const SchemeConfig& cfg) {
  const double v1 = conservation_payment(site);
  Bid bid;
  bid.downpayment_c = std::max(closed_form_downpayment(site, owner, cfg), std::max(cfg.bid_cap_lo, 0.0));
  if (bid.downpayment_c > v1) {
    bid.total_revenue_r = bid.downpayment_c;
    return bid;
  }
  bid.instalment_m = finance::annual_instalment(v1, bid.downpayment_c, cfg.interest_rate_r, cfg.lending_period_t,
                                                cfg.instalment_count_x);
  bid.total_revenue_r = finance::total_revenue(v1, bid.downpayment_c, cfg.interest_rate_r, cfg.lending_period_t);
  bid.participates = participates(bid, site, owner, cfg);
  return bid;
}

NumericOptimum optimal_downpayment_numeric(const SiteRecord& site, const LandownerProfile& owner,
                                           const SchemeConfig& cfg, double grid_step) {
  if (!(grid_step > 0.0))
    throw std::invalid_argument("grid_step must be > 0");
  const double hi = cfg.bid_cap_hi;
  auto payoff = [&](double c) { return expected_payoff(c, site, owner, cfg); };

  const double step = std::max(grid_step, hi / kMaxGridPoints);
  const auto points = static_cast<long long>(std::ceil(hi / step));
  double best_c = 0.0;
  double best_j = payoff(0.0);
  for (long long i = 1; i <= points; ++i) {
    const double c = std::min(static_cast<double>(i) * step, hi);
    const double j = payoff(c);
    if (j > best_j) {
      best_j = j;
      best_c = c;
    }
  }

  // Golden-section refinement inside the neighbouring grid cells.
  double a = std::max(0.0, best_c - step);
  double b = std::min(hi, best_c + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = payoff(x1);
  double f2 = payoff(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-9 * std::max(1.0, std::abs(best_c)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = payoff(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = payoff(x1);
    }
  }
  const double refined = (a + b) / 2.0;
  if (payoff(refined) > best_j) {
    best_c = refined;
    best_j = payoff(refined);
  }
  return {best_c, best_j, best_j <= 0.0};
}

bool participates(const Bid& bid, const SiteRecord& site, const LandownerProfile& owner, const SchemeConfig& cfg) {
  if (bid.downpayment_c > conservation_payment(site))
    return false;
  const double received = bid.downpayment_c + finance::discounted_instalment_sum(
                                                  bid.instalment_m, cfg.instalment_count_x, cfg.landowner_discount_rate);
  return received > site.opportunity_cost_v0 - owner.amenity_gain();
}

UpfrontBid upfront_bid(const SiteRecord& site, const LandownerProfile& owner, double cap_hi) {
  if (!(cap_hi > 0.0))
    throw std::invalid_argument("up-front cap must be > 0");
  const double v1 = conservation_payment(site);
  const double reservation = site.opportunity_cost_v0 - owner.amenity_gain();
  UpfrontBid out;
  out.premium = std::max(0.0, cap_hi / 2.0 + (reservation - v1) / 2.0);
  out.total_payment = v1 + out.premium;
  out.participates = out.total_payment > reservation;
  return out;
}

} // namespace deferral::bidding
