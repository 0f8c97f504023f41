#pragma once

// Landowner bidding in the downpayment auction and its up-front counterpart.
//
// Owners believe the government's implicit cap on downpayments is uniform on
// [lo, hi]. A risk-neutral owner bidding c expects
//
//   J(c) = [-V0 + (A1 - A0) + c + (1+r)^t (V1 - c)/x] * (1 - F(c)),
//
// whose maximizer on a uniform belief is
//
//   c* = hi/2 + [V0 - V1 (1+r)^t / x - (A1 - A0)] / (2 Omega),
//   Omega = 1 - (1+r)^t / x.

#include "deferral/types.hpp"

namespace deferral::bidding {

struct BidCapBelief {
  double lo = 0.0;
  double hi = 0.0;

  static BidCapBelief deferred(const SchemeConfig& cfg) { return {cfg.bid_cap_lo, cfg.bid_cap_hi}; }
};

double omega(const SchemeConfig& cfg);

/// Probability that a bid of c is at or below the cap: 1 - F(c).
double acceptance_probability(double c, const BidCapBelief& belief);

double expected_payoff(double c, const SiteRecord& site, const LandownerProfile& owner, const SchemeConfig& cfg);

/// Unclamped closed-form maximizer c*.
double closed_form_downpayment(const SiteRecord& site, const LandownerProfile& owner, const SchemeConfig& cfg);

/// Optimal bid with instalment, revenue and participation filled in. c* is
/// clamped below at the belief's lower bound (never below 0); a c* above the
/// cap is kept as is.
Bid optimal_downpayment(const SiteRecord& site, const LandownerProfile& owner, const SchemeConfig& cfg);

struct NumericOptimum {
  double downpayment = 0.0;
  double payoff = 0.0;
  /// Set when the payoff is non-positive everywhere on [0, hi] so the best
  /// attainable is J -> 0 at the cap.
  bool degenerate = false;
};

/// Direct maximization of expected_payoff over [0, hi]: grid search with
/// spacing `grid_step` followed by golden-section refinement. Independent of
/// the closed form; used to cross-check it and for non-uniform extensions.
NumericOptimum optimal_downpayment_numeric(const SiteRecord& site, const LandownerProfile& owner,
                                           const SchemeConfig& cfg, double grid_step);

/// Participation constraint: c + PV(instalments) > V0 - (A1 - A0), and the
/// bid must not exceed the conservation payment.
bool participates(const Bid& bid, const SiteRecord& site, const LandownerProfile& owner, const SchemeConfig& cfg);

struct UpfrontBid {
  double premium = 0.0;
  double total_payment = 0.0;
  bool participates = false;
};

/// Up-front auction bid: the owner asks V1 plus a premium
/// b* = cap_hi/2 + [(V0 - V1) - (A1 - A0)]/2, clamped at 0.
UpfrontBid upfront_bid(const SiteRecord& site, const LandownerProfile& owner, double cap_hi);

} // namespace deferral::bidding
