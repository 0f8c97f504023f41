#include "deferral/csv.hpp"
#include "deferral/scenario.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>

using namespace deferral;
using namespace deferral::scenario;
namespace fs = std::filesystem;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

Scenario small(std::size_t n_sites = 120) {
  Scenario s = parse_scenario("dataset = synthetic\nseed = 7\n");
  s.synthetic.n_sites = n_sites;
  return s;
}

bool same_summary(const simulation::Summary& a, const simulation::Summary& b) {
  return data_io::summary_cells(a) == data_io::summary_cells(b) && a.costs_npv == b.costs_npv &&
         a.area_ha == b.area_ha && a.benefits_npv == b.benefits_npv;
}

} // namespace

TEST_CASE("scenario parsing") {
  const auto s = parse_scenario(R"(
# comment line
interest_rate = 0.04   # trailing comment
lending_period = 15
instalment_count = 20
mechanisms = deferred
ranking = old_growth
initial_budget = 2500000
format = json
synthetic.n_sites = 50
amenity.phi_sd = 0.1
horizon_years = 25
)");
  CHECK(s.config.interest_rate_r == 0.04);
  CHECK(s.config.lending_period_t == 15);
  CHECK(s.config.instalment_count_x == 20);
  CHECK(s.mechanisms == MechanismSet::Deferred);
  CHECK(s.ranking == Ranking::OldGrowth);
  CHECK(s.initial_budget == 2.5e6);
  CHECK(s.format == data_io::ReportFormat::Json);
  CHECK(s.synthetic.n_sites == 50);
  CHECK(s.config.amenity.phi_sd == 0.1);
  CHECK(s.config.horizon_years == 25);
  CHECK(s.dataset.empty());
  CHECK_FALSE(s.upfront_budget.has_value());
}

TEST_CASE("defaults") {
  const auto s = parse_scenario("");
  CHECK(s.mechanisms == MechanismSet::Both);
  CHECK(s.ranking == Ranking::BenefitCost);
  CHECK(s.initial_budget == 5e6);
  CHECK(s.match_basis == MatchBasis::Spent);
  CHECK(s.config.interest_rate_r == 0.03);
  CHECK(s.config.lending_period_t == 10);
  CHECK(s.config.instalment_count_x == 10);
}

TEST_CASE("scenario errors name the line and the problem") {
  CHECK(error_of("seed = 1\nfoo = 2\n").find("line 2: unknown key 'foo'") != std::string::npos);
  CHECK(error_of("seed = 1\nseed = 2\n").find("given twice") != std::string::npos);
  CHECK(error_of("interest_rate = abc\n").find("line 1") != std::string::npos);
  CHECK(error_of("mechanisms = neither\n").find("mechanisms") != std::string::npos);
  CHECK(error_of("initial_budget =\n").find("no value") != std::string::npos);
  CHECK(error_of("just words\n").find("key = value") != std::string::npos);
  CHECK(error_of("initial_budget = -5\n") != "");
  CHECK(error_of("lending_period = 2.5\n") != "");
}

TEST_CASE("an infeasible loan is rejected") {
  const auto e = error_of("instalment_count = 5\ninterest_rate = 0.2\nlending_period = 10\n");
  CHECK(e.find("Omega") != std::string::npos);
}

TEST_CASE("npv-matched up-front budget needs the deferred run") {
  CHECK_THROWS_AS(parse_scenario("mechanisms = upfront\n"), ConfigError);
  CHECK_NOTHROW(parse_scenario("mechanisms = upfront\nupfront_budget = 1000000\n"));
}

TEST_CASE("relative paths resolve against the scenario directory") {
  const auto s = parse_scenario("dataset = sites.csv\nelite_table = tables/e.csv\n", "/data/run");
  CHECK(s.dataset == fs::path("/data/run/sites.csv"));
  CHECK(s.elite_table == fs::path("/data/run/tables/e.csv"));
  CHECK(parse_scenario("elite_table = default\n").elite_table.empty());
}

TEST_CASE("the shipped default scenario loads") {
  const auto s = load_scenario(fs::path(SCENARIO_DIR) / "default.scn");
  CHECK(s.config.bid_cap_hi == 3000);
  CHECK(s.config.upfront_cap_hi == 300);
  CHECK(s.synthetic.n_sites == 400);
  CHECK_THROWS_AS(load_scenario(fs::path(SCENARIO_DIR) / "missing.scn"), IoError);
}

TEST_CASE("manifests round-trip and reproduce the run") {
  auto s = small();
  s.config.interest_rate_r = 0.035;
  s.config.horizon_years = 30;
  s.config.amenity.d0 = 0.3;
  const auto j = manifest(s);
  const auto back = from_manifest(j);
  CHECK(manifest(back) == j);
  CHECK(back.config == s.config);
  CHECK(back.synthetic == s.synthetic);

  const auto a = execute(s);
  const auto b = execute(back);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i)
    CHECK(same_summary(a.runs[i].summary, b.runs[i].summary));

  CHECK_THROWS_AS(from_manifest(nlohmann::json::object()), ConfigError);
}

TEST_CASE("npv-matched up-front budget equals the deferred program's NPV") {
  const auto s = small();
  const auto e = execute(s);
  REQUIRE(e.matched_upfront_budget.has_value());
  const auto* d = e.run(simulation::Mechanism::Deferred);
  const auto* u = e.run(simulation::Mechanism::Upfront);
  REQUIRE(d != nullptr);
  REQUIRE(u != nullptr);
  const int horizon = s.config.horizon();
  const double a = finance::annuity_due_factor(horizon, s.config.discount_rate);
  CHECK(*e.matched_upfront_budget * a == doctest::Approx(d->summary.costs_npv).epsilon(1e-9));
  CHECK(u->budget == *e.matched_upfront_budget);
}

TEST_CASE("old-growth ranking with an ample budget funds every qualifying offer at year 0") {
  auto s = small(200);
  s.ranking = Ranking::OldGrowth;
  s.mechanisms = MechanismSet::Deferred;
  s.initial_budget = 1e12;
  const auto e = execute(s);
  const auto* d = e.run(simulation::Mechanism::Deferred);
  REQUIRE(d != nullptr);
  std::size_t expected = 0;
  for (const auto& ev : e.evaluations) {
    const auto& site = e.dataset[ev.site_index];
    if (ev.deferred.participates && ev.deferred.downpayment_c <= s.config.bid_cap_hi && ecology::is_old_growth(site))
      ++expected;
  }
  CHECK(expected > 0);
  CHECK(d->conserved.size() == expected);
  for (const auto& c : d->conserved) {
    CHECK(c.year == 0);
    CHECK(ecology::is_old_growth(e.dataset[c.site_index]));
  }
}

TEST_CASE("sweep rows match single runs of the same point") {
  const auto base = small(80);
  SweepAxes axes;
  axes.rates = {0.02, 0.04};
  axes.instalment_counts = {10, 20};
  axes.seeds = {3, 4};
  const auto rows = sweep(base, axes, 3);
  REQUIRE(rows.size() == 8);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].point.index == i);
    REQUIRE(rows[i].ok);
    const auto single = execute(apply(base, rows[i].point));
    REQUIRE(single.runs.size() == rows[i].runs.size());
    for (std::size_t m = 0; m < single.runs.size(); ++m)
      CHECK(same_summary(single.runs[m].summary, rows[i].runs[m].summary));
  }
  // Nesting order: rate, lending period, instalment count, cap scale, seed.
  CHECK(rows[0].point.rate == 0.02);
  CHECK(rows[1].point.seed == 4);
  CHECK(rows[2].point.instalment_count == 20);
  CHECK(rows[4].point.rate == 0.04);

  const auto serial = sweep(base, axes, 1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    CHECK(same_summary(serial[i].runs[0].summary, rows[i].runs[0].summary));
}

TEST_CASE("deferred supply in a sweep does not shrink as the interest rate rises") {
  const auto base = small(400);
  SweepAxes axes;
  axes.rates = {0.01, 0.02, 0.03, 0.04, 0.05};
  const auto rows = sweep(base, axes, 2);
  double prev = -1.0;
  for (const auto& row : rows) {
    REQUIRE(row.ok);
    const double offered = row.runs[0].summary.offered_area_ha;
    CHECK(offered >= prev);
    prev = offered;
  }
}

TEST_CASE("instalments per hectare fall as the loan is split into more payments") {
  const auto base = small(200);
  SweepAxes axes;
  axes.instalment_counts = {10, 15, 20};
  const auto rows = sweep(base, axes, 1);
  REQUIRE(rows.size() == 3);
  // Same site, same downpayment cap: m = (1+r)^t (V1 - c) / x falls with x for
  // any bid, and the optimal c rises with x, so the instalment falls too.
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& a = rows[i].runs[0];
    const auto& b = rows[i + 1].runs[0];
    CHECK(b.summary.avg_instalment < a.summary.avg_instalment);
  }
}

TEST_CASE("a failing sweep point is recorded, the others still run") {
  const auto base = small(60);
  SweepAxes axes;
  axes.rates = {0.03, 0.2};
  axes.instalment_counts = {5};
  const auto rows = sweep(base, axes, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ok);
  CHECK_FALSE(rows[1].ok);
  CHECK(rows[1].exit_code == 2);
  CHECK(rows[1].error.find("Omega") != std::string::npos);

  const auto dir = fs::temp_directory_path() / "deferral_test_sweep";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_sweep_csv(rows, dir / "sweep.csv");
  const auto table = csv::read_file(dir / "sweep.csv");
  const auto status = table.column("status");
  REQUIRE(status.has_value());
  CHECK(table.rows.back().cells[*status] == "failed");
}

TEST_CASE("exit codes by error kind") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(data_io::DataError("x")) == 2);
  CHECK(exit_code_for(std::invalid_argument("x")) == 2);
  CHECK(exit_code_for(IoError("x")) == 3);
  CHECK(exit_code_for(InternalError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 4);
}

TEST_CASE("outputs include the manifest") {
  auto s = small(40);
  const auto e = execute(s);
  const auto dir = fs::temp_directory_path() / "deferral_test_outputs";
  fs::remove_all(dir);
  const auto files = write_outputs(s, e, dir);
  CHECK(files.size() == 4);
  CHECK(fs::exists(dir / "manifest.json"));
  const auto again = load_scenario(dir / "manifest.json");
  CHECK(manifest(again) == manifest(s));
}
