#include "deferral/data_io.hpp"
#include "deferral/simulation.hpp"

#include "doctest.h"

#include <cmath>
#include <set>

using namespace deferral;
using namespace deferral::simulation;

namespace {

Offer offer(const std::string& id, std::size_t index, double elite, double cost_per_ha, double area = 10.0,
            Mechanism m = Mechanism::Upfront) {
  Offer o;
  o.site_id = id;
  o.site_index = index;
  o.mechanism = m;
  o.area_ha = area;
  o.elite = elite;
  o.stand_age = 100;
  if (m == Mechanism::Upfront) {
    o.upfront_payment = cost_per_ha;
  } else {
    o.bid.downpayment_c = cost_per_ha;
    o.bid.instalment_m = 50.0;
    o.bid.participates = true;
  }
  return o;
}

HarvestSchedule no_harvest(std::size_t n) {
  HarvestSchedule s;
  s.harvest_year.resize(n);
  return s;
}

std::vector<std::string> ids(const std::vector<Offer>& offers, const std::vector<std::size_t>& order) {
  std::vector<std::string> out;
  for (auto i : order)
    out.push_back(offers[i].site_id);
  return out;
}

std::set<std::string> conserved_ids(const RunOutcome& r) {
  std::set<std::string> out;
  for (const auto& c : r.conserved)
    out.insert(c.site_id);
  return out;
}

SiteRecord plain_site(const std::string& id, double v0, double v1, double age = 60, double rotation = 80) {
  SiteRecord s;
  s.id = id;
  s.timber_value = v1 - 400;
  s.opportunity_cost_v0 = v0;
  s.stand_age = age;
  s.commercial_rotation_age = rotation;
  s.deadwood = 10;
  return s;
}

} // namespace

TEST_CASE("ranking by benefit per euro") {
  // ratios 0.3, 0.2, 0.1 given out of order
  std::vector<Offer> offers = {offer("B", 1, 0.2, 1.0), offer("C", 2, 0.1, 1.0), offer("A", 0, 0.3, 1.0)};
  CHECK(ids(offers, rank_benefit_cost(offers)) == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("ranking ties go to the cheaper offer, then the smaller id") {
  // Both yield 0.05 units of elite*area per euro; X costs 100, Y costs 200.
  std::vector<Offer> offers = {offer("Y", 0, 1.0, 20.0), offer("X", 1, 0.5, 10.0)};
  CHECK(ids(offers, rank_benefit_cost(offers)) == std::vector<std::string>{"X", "Y"});

  std::vector<Offer> twins = {offer("Q", 0, 0.5, 10.0), offer("P", 1, 0.5, 10.0)};
  CHECK(ids(twins, rank_benefit_cost(twins)) == std::vector<std::string>{"P", "Q"});
}

TEST_CASE("zero elite ranks last, zero cost with positive elite ranks first") {
  std::vector<Offer> offers = {offer("zero", 0, 0.0, 1.0), offer("mid", 1, 0.5, 100.0), offer("free", 2, 0.1, 0.0)};
  CHECK(ids(offers, rank_benefit_cost(offers)) == std::vector<std::string>{"free", "mid", "zero"});
}

TEST_CASE("deferred run: slack budget, zero budget, skip-and-continue") {
  const SchemeConfig cfg;
  std::vector<Offer> offers = {offer("A", 0, 0.9, 60.0, 10, Mechanism::Deferred),
                               offer("B", 1, 0.6, 50.0, 10, Mechanism::Deferred),
                               offer("C", 2, 0.2, 30.0, 10, Mechanism::Deferred)};
  const auto rank = rank_benefit_cost(offers);
  REQUIRE(ids(offers, rank) == std::vector<std::string>{"A", "B", "C"});
  const auto none = no_harvest(3);

  const auto all = run_deferred(offers, rank, cfg, 1e6, none);
  CHECK(all.conserved.size() == 3);
  CHECK(all.lost.empty());
  for (const auto& c : all.conserved)
    CHECK(c.year == 0);

  const auto zero = run_deferred(offers, rank, cfg, 0.0, none);
  CHECK(zero.conserved.empty());
  CHECK(zero.summary.costs_npv == 0.0);

  const auto top2 = run_deferred(offers, rank, cfg, 1100.0, none);
  CHECK(conserved_ids(top2) == std::set<std::string>{"A", "B"});

  // A (600) fits, B (500) does not fit the remaining 300, C (300) does.
  const auto skip = run_deferred(offers, rank, cfg, 900.0, none);
  CHECK(conserved_ids(skip) == std::set<std::string>{"A", "C"});
  CHECK(skip.spending.at(0) == 900.0);
  for (int y = 1; y <= 10; ++y)
    CHECK(skip.spending.at(y) == doctest::Approx(50.0 * 20));
  CHECK(skip.spending.at(11) == 0.0);

  CHECK_THROWS_AS(run_deferred(offers, rank, cfg, -1.0, none), std::invalid_argument);
}

TEST_CASE("deferred run skips downpayments above the cap belief") {
  SchemeConfig cfg;
  cfg.bid_cap_hi = 100;
  std::vector<Offer> offers = {offer("A", 0, 0.9, 150.0, 10, Mechanism::Deferred),
                               offer("B", 1, 0.1, 80.0, 10, Mechanism::Deferred)};
  const auto r = run_deferred(offers, rank_benefit_cost(offers), cfg, 1e6, no_harvest(2));
  CHECK(conserved_ids(r) == std::set<std::string>{"B"});
}

TEST_CASE("deferred run never loses a funded site") {
  const SchemeConfig cfg;
  std::vector<Offer> offers = {offer("A", 0, 0.9, 60.0, 10, Mechanism::Deferred),
                               offer("B", 1, 0.6, 50.0, 10, Mechanism::Deferred)};
  HarvestSchedule h;
  h.harvest_year = {0, 0};
  const auto r = run_deferred(offers, rank_benefit_cost(offers), cfg, 1e6, h);
  CHECK(r.conserved.size() == 2);
  CHECK(r.lost.empty());
}

TEST_CASE("up-front run with slack budgets matches the deferred selection") {
  const SchemeConfig cfg;
  std::vector<Offer> offers;
  for (int i = 0; i < 6; ++i)
    offers.push_back(offer("S" + std::to_string(i), i, 0.1 * (i + 1), 100.0 + 37 * i, 10, Mechanism::Deferred));
  const auto rank = rank_benefit_cost(offers);
  const auto d = run_deferred(offers, rank, cfg, 1e9, no_harvest(6));
  const auto u = run_upfront(offers, rank, cfg, 1e9, no_harvest(6));
  CHECK(conserved_ids(d) == conserved_ids(u));
  for (const auto& c : u.conserved)
    CHECK(c.year == 0);
}

TEST_CASE("up-front run: one site per year, a harvested site is lost when its turn comes") {
  // Harvest in year y happens after year y's funding round.
  SchemeConfig cfg;
  std::vector<Offer> offers = {offer("A", 0, 0.9, 100.0), offer("B", 1, 0.6, 100.0), offer("C", 2, 0.3, 100.0)};
  const auto rank = rank_benefit_cost(offers);
  HarvestSchedule h;
  h.harvest_year = {std::nullopt, 0, std::nullopt};
  const auto r = run_upfront(offers, rank, cfg, 1000.0, h);

  REQUIRE(r.conserved.size() == 2);
  CHECK(r.conserved[0].site_id == "A");
  CHECK(r.conserved[0].year == 0);
  CHECK(r.conserved[1].site_id == "C");
  CHECK(r.conserved[1].year == 1);
  REQUIRE(r.lost.size() == 1);
  CHECK(r.lost[0].site_id == "B");
  CHECK(r.lost[0].harvest_year == 0);
  CHECK(r.harvested_in(0) == std::vector<std::string>{"B"});
  CHECK(r.conserved_in(1) == std::vector<std::string>{"C"});

  // Lost benefit is discounted to the harvest year; spending never exceeds the annual budget.
  CHECK(r.summary.lost_benefits == doctest::Approx(-5980.0 * 10));
  for (double s : r.spent_by_year())
    CHECK(s <= 1000.0);
}

TEST_CASE("a top-ranked site harvested in year 0 is still fundable in year 0") {
  SchemeConfig cfg;
  std::vector<Offer> offers = {offer("A", 0, 0.9, 100.0), offer("B", 1, 0.1, 100.0)};
  HarvestSchedule h;
  h.harvest_year = {0, std::nullopt};
  const auto r = run_upfront(offers, rank_benefit_cost(offers), cfg, 1000.0, h);
  CHECK(r.conserved_in(0) == std::vector<std::string>{"A"});
  CHECK(r.conserved_in(1) == std::vector<std::string>{"B"});
  CHECK(r.lost.empty());

  std::vector<Offer> pricey = {offer("A", 0, 0.9, 200.0)};
  const auto late = run_upfront(pricey, rank_benefit_cost(pricey), cfg, 1000.0, h);
  CHECK(late.lost.empty()); // never affordable, so never "would be selected"
}

TEST_CASE("harvested site that would not fit the budget is not recorded as lost") {
  SchemeConfig cfg;
  std::vector<Offer> offers = {offer("A", 0, 0.9, 100.0), offer("B", 1, 0.6, 100.0)};
  HarvestSchedule h;
  h.harvest_year = {std::nullopt, 0};
  // Budget covers one site per year: year 0 funds A, year 1 reaches B after harvest.
  const auto r = run_upfront(offers, rank_benefit_cost(offers), cfg, 1000.0, h);
  REQUIRE(r.lost.size() == 1);
  CHECK(r.lost[0].site_id == "B");
  // A smaller budget never reaches B at all.
  const auto small = run_upfront(offers, rank_benefit_cost(offers), cfg, 999.0, h);
  CHECK(small.conserved.empty());
  CHECK(small.lost.empty());
}

TEST_CASE("up-front budget does not roll over") {
  SchemeConfig cfg;
  std::vector<Offer> offers = {offer("A", 0, 0.9, 150.0)};
  const auto r = run_upfront(offers, rank_benefit_cost(offers), cfg, 1000.0, no_harvest(1));
  CHECK(r.conserved.empty());
  CHECK(r.summary.costs_npv == 0.0);
}

TEST_CASE("accounting") {
  SchemeConfig cfg;
  RunOutcome r;
  r.mechanism = Mechanism::Upfront;
  r.conserved.push_back({"S", 0, 5, 10.0, 120, 0.5, 1000.0, 0.0});
  r.spending.add(5, 10000.0);
  const auto s = account(r, cfg);
  CHECK(std::abs(s.benefits_npv - 51584.0) <= 10.0);
  CHECK(s.benefits_npv == doctest::Approx(5980.0 * 10 / std::pow(1.03, 5)));
  CHECK(s.ex_post_net_benefits == s.benefits_npv);
  CHECK(s.lost_benefits == 0.0);
  CHECK(s.costs_npv == doctest::Approx(10000.0 / std::pow(1.03, 5)));
  CHECK(s.absolute_costs == 10000.0);
  CHECK(s.bd_index_sum == 5.0);
  CHECK(s.avg_stand_age == 120.0);

  RunOutcome at0;
  at0.mechanism = Mechanism::Deferred;
  at0.conserved.push_back({"A", 0, 0, 10.0, 100, 0.5, 2000.0, 300.0});
  at0.conserved.push_back({"B", 1, 0, 30.0, 200, 1.0, 1000.0, 100.0});
  at0.spending.add(0, 50000.0);
  const auto a = account(at0, cfg);
  CHECK(a.benefits_npv == doctest::Approx(5980.0 * 40));
  CHECK(a.avg_stand_age == doctest::Approx(175.0));
  CHECK(a.avg_downpayment == doctest::Approx(1250.0));
  CHECK(a.avg_instalment == doctest::Approx(150.0));
  CHECK(a.instalment_cost_per_year == doctest::Approx(6000.0));
  double annuity = 0.0;
  for (int i = 1; i <= 10; ++i)
    annuity += 1.0 / std::pow(1.03, i);
  CHECK(a.avg_total_payment_npv == doctest::Approx(1250.0 + 150.0 * annuity));

  RunOutcome lost;
  lost.mechanism = Mechanism::Upfront;
  lost.lost.push_back({"L", 0, 3, 10.0, 100, 0.5});
  const auto l = account(lost, cfg);
  CHECK(l.lost_benefits == doctest::Approx(-59800.0 / std::pow(1.03, 3)));
  CHECK(l.ex_post_net_benefits == doctest::Approx(l.lost_benefits));
  CHECK(l.lost_area_ha == 10.0);
}

TEST_CASE("harvest schedule") {
  SchemeConfig cfg;
  Dataset young;
  for (int i = 0; i < 50; ++i)
    young.push_back(plain_site("Y" + std::to_string(i), 0, 1000, 10, 80)); // 70 years to rotation
  for (const auto& y : draw_harvest_schedule(young, cfg).harvest_year)
    CHECK_FALSE(y.has_value());

  CHECK(years_to_rotation(plain_site("a", 0, 1000, 100, 80)) == 0);
  CHECK(years_to_rotation(plain_site("a", 0, 1000, 60, 80)) == 20);
  CHECK(years_to_rotation(plain_site("a", 0, 1000, 60.5, 80)) == 20);

  Dataset old(100000, plain_site("O", 0, 1000, 120, 80));
  const auto h = draw_harvest_schedule(old, cfg);
  double sum = 0.0;
  int lo = 100, hi = -1;
  for (const auto& y : h.harvest_year) {
    REQUIRE(y.has_value());
    sum += *y;
    lo = std::min(lo, *y);
    hi = std::max(hi, *y);
  }
  CHECK(std::abs(sum / old.size() - 19.5) <= 0.2);
  CHECK(lo == 0);
  CHECK(hi == 39);

  Dataset soon(2000, plain_site("N", 0, 1000, 70, 80));
  for (const auto& y : draw_harvest_schedule(soon, cfg).harvest_year) {
    REQUIRE(y.has_value());
    CHECK(*y >= 10);
    CHECK(*y <= 39);
  }
}

TEST_CASE("phi draws are truncated and seeded") {
  SchemeConfig cfg;
  CHECK(draw_phi(cfg, 3) == draw_phi(cfg, 3));
  CHECK(draw_phi(cfg, 3) != draw_phi(cfg, 4));
  auto other = cfg;
  other.seed = 2;
  CHECK(draw_phi(cfg, 3) != draw_phi(other, 3));
  cfg.amenity.phi_sd = 5.0;
  for (std::size_t i = 0; i < 1000; ++i)
    CHECK(draw_phi(cfg, i) >= cfg.amenity.phi_floor);
}

TEST_CASE("phi draws follow the truncated normal") {
  SchemeConfig cfg;
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    sum += draw_phi(cfg, static_cast<std::size_t>(i));
  CHECK(std::abs(sum / n - 1.0) < 0.01);
}

TEST_CASE("offers") {
  SchemeConfig cfg;
  cfg.bid_cap_hi = 8000;
  const auto table = ecology::default_elite_table();

  // With nothing to lose and a cap below every payment, every owner offers.
  SchemeConfig low = cfg;
  low.bid_cap_hi = 1000;
  Dataset free;
  for (int i = 0; i < 20; ++i)
    free.push_back(plain_site("F" + std::to_string(i), 0.0, 2000 + 300 * i, 20 + 10 * i));
  CHECK(build_offers(free, low, Mechanism::Deferred, table).size() == free.size());
  CHECK(build_offers(free, low, Mechanism::Upfront, table).size() == free.size());

  // A high cap pushes young-stand bids above the payment itself: no loan, no offer.
  for (const auto& o : build_offers(free, cfg, Mechanism::Deferred, table))
    CHECK(o.bid.downpayment_c <= conservation_payment(free[o.site_index]));

  const Dataset one = {plain_site("F", 6000, 7000)};
  const auto offers = build_offers(one, cfg, Mechanism::Deferred, table);
  REQUIRE(offers.size() == 1);
  CHECK(std::abs(offers[0].bid.downpayment_c - 6922.37) <= 0.05);
  CHECK(offers[0].cost() == doctest::Approx(offers[0].bid.downpayment_c * 10));
}

TEST_CASE("offered area grows with the interest rate on synthetic data") {
  data_io::SyntheticProfile p;
  const auto table = ecology::default_elite_table();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto data = data_io::generate_synthetic(p, seed);
    double prev = -1.0;
    for (double r : {0.02, 0.03, 0.04}) {
      SchemeConfig cfg;
      cfg.seed = seed;
      cfg.interest_rate_r = r;
      const double area = offered_area(build_offers(data, cfg, Mechanism::Deferred, table));
      CHECK(area >= prev);
      prev = area;
    }
  }
}

TEST_CASE("old-growth filter keeps exactly the qualifying sites") {
  Dataset data;
  std::vector<Offer> offers;
  int i = 0;
  for (double age : {69.0, 70.0, 99.0, 100.0, 139.0, 140.0}) {
    for (SiteType t : kAllSiteTypes) {
      auto s = plain_site("S" + std::to_string(i), 0, 1000, age);
      s.site_type = t;
      data.push_back(s);
      offers.push_back(offer(s.id, static_cast<std::size_t>(i), 0.5, 100));
      ++i;
    }
  }
  const auto kept = select_old_growth(offers, data);
  std::set<std::size_t> kept_idx;
  for (const auto& o : kept)
    kept_idx.insert(o.site_index);
  for (std::size_t k = 0; k < data.size(); ++k)
    CHECK(kept_idx.count(k) == (ecology::is_old_growth(data[k]) ? 1u : 0u));

  CHECK(select_old_growth({}, data).empty());
  Dataset ancient(5, plain_site("A", 0, 1000, 230));
  std::vector<Offer> all;
  for (std::size_t k = 0; k < 5; ++k)
    all.push_back(offer("A" + std::to_string(k), k, 0.5, 100));
  CHECK(select_old_growth(all, ancient).size() == 5);
}

TEST_CASE("runs are deterministic and keep their accounting invariants") {
  data_io::SyntheticProfile p;
  const auto data = data_io::generate_synthetic(p, 9);
  SchemeConfig cfg;
  cfg.seed = 9;
  const auto table = ecology::default_elite_table();
  auto once = [&] {
    const auto schedule = draw_harvest_schedule(data, cfg);
    const auto d_offers = build_offers(data, cfg, Mechanism::Deferred, table);
    const auto u_offers = build_offers(data, cfg, Mechanism::Upfront, table);
    return std::pair{run_deferred(d_offers, rank_benefit_cost(d_offers), cfg, 5e6, schedule),
                     run_upfront(u_offers, rank_benefit_cost(u_offers), cfg, 2e6, schedule)};
  };
  const auto a = once();
  const auto b = once();
  for (const auto* pair : {&a, &b}) {
    for (const RunOutcome* r : {&pair->first, &pair->second}) {
      std::set<std::size_t> seen;
      for (const auto& c : r->conserved)
        CHECK(seen.insert(c.site_index).second);
      for (const auto& l : r->lost)
        CHECK(seen.insert(l.site_index).second);
      const auto spent = r->spent_by_year();
      for (std::size_t y = 0; y < spent.size(); ++y)
        CHECK(spent[y] <= (y < r->budget_by_year.size() ? r->budget_by_year[y] : 0.0) + 1e-6);
      CHECK(std::abs(r->summary.costs_npv - finance::npv(r->spending, cfg.discount_rate)) <= 0.01);
    }
  }
  CHECK(a.first.summary.costs_npv == b.first.summary.costs_npv);
  CHECK(a.second.summary.ex_post_net_benefits == b.second.summary.ex_post_net_benefits);
  CHECK(conserved_ids(a.second) == conserved_ids(b.second));
  CHECK(a.first.lost.empty());
}

TEST_CASE("national extrapolation") {
  SchemeConfig cfg;
  simulation::NationalInput in{54000, 4050, 681, 48e6 / 4910};
  const auto r = extrapolate_national(in, cfg);
  CHECK(r.deferred_downpayments == doctest::Approx(218.7e6));
  CHECK(r.deferred_instalments_per_year == doctest::Approx(36.774e6));
  CHECK(r.deferred_npv == doctest::Approx(218.7e6 + 36.774e6 * 8.530202837).epsilon(1e-9));
  CHECK(r.deferred_absolute == doctest::Approx(218.7e6 + 367.74e6));
  CHECK(r.upfront_area_per_year == doctest::Approx(54000.0 / 11));
  CHECK(r.harvest_loss_area == doctest::Approx(5022.0));

  const auto zero = extrapolate_national({0, 4050, 681, 7000}, cfg);
  CHECK(zero.deferred_npv == 0.0);
  CHECK(zero.upfront_npv == 0.0);

  cfg.discount_rate = 0.0;
  const auto flat = extrapolate_national(in, cfg);
  CHECK(flat.deferred_npv == doctest::Approx(flat.deferred_absolute));
  CHECK(flat.upfront_npv == doctest::Approx(flat.upfront_absolute));
}
