#include "deferral/scenario.hpp"

#include "deferral/csv.hpp"
#include "deferral/finance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <set>
#include <sstream>

namespace deferral::scenario {

using simulation::Mechanism;
using simulation::RunOutcome;

std::string_view to_string(MechanismSet m) {
  switch (m) {
  case MechanismSet::Both:
    return "both";
  case MechanismSet::Deferred:
    return "deferred";
  case MechanismSet::Upfront:
    return "upfront";
  }
  return "both";
}

std::string_view to_string(Ranking r) { return r == Ranking::BenefitCost ? "benefit_cost" : "old_growth"; }

std::string_view to_string(MatchBasis b) { return b == MatchBasis::Spent ? "spent" : "allotted"; }

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_number(std::string_view key, std::string_view value) {
  const auto v = csv::to_double(value);
  if (!v || !std::isfinite(*v))
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, value));
  return *v;
}

template <class Int> Int to_integer(std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, value));
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value) {
  std::filesystem::path p{std::string(value)};
  if (p.is_relative() && !base.empty())
    p = base / p;
  return p.lexically_normal();
}

using Setter = std::function<void(Scenario&, std::string_view key, std::string_view value,
                                  const std::filesystem::path& base)>;

Setter number_into(double SchemeConfig::*field) {
  return [field](Scenario& s, std::string_view k, std::string_view v, const auto&) {
    s.config.*field = to_number(k, v);
  };
}

Setter int_into(int SchemeConfig::*field) {
  return [field](Scenario& s, std::string_view k, std::string_view v, const auto&) {
    s.config.*field = to_integer<int>(k, v);
  };
}

Setter amenity_into(double AmenityParams::*field) {
  return [field](Scenario& s, std::string_view k, std::string_view v, const auto&) {
    s.config.amenity.*field = to_number(k, v);
  };
}

Setter profile_into(double data_io::SyntheticProfile::*field) {
  return [field](Scenario& s, std::string_view k, std::string_view v, const auto&) {
    s.synthetic.*field = to_number(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"dataset",
       [](Scenario& s, std::string_view, std::string_view v, const std::filesystem::path& base) {
         s.dataset = v == "synthetic" ? std::filesystem::path{} : resolve(base, v);
       }},
      {"dataset_seed",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) {
         s.dataset_seed = to_integer<std::uint64_t>(k, v);
       }},
      {"synthetic.n_sites",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) {
         s.synthetic.n_sites = to_integer<std::size_t>(k, v);
       }},
      {"synthetic.age_min", profile_into(&data_io::SyntheticProfile::age_min)},
      {"synthetic.age_max", profile_into(&data_io::SyntheticProfile::age_max)},
      {"synthetic.timber_price", profile_into(&data_io::SyntheticProfile::timber_price)},
      {"elite_table",
       [](Scenario& s, std::string_view, std::string_view v, const std::filesystem::path& base) {
         s.elite_table = v == "default" ? std::filesystem::path{} : resolve(base, v);
       }},
      {"mechanisms",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) {
         if (v == "both")
           s.mechanisms = MechanismSet::Both;
         else if (v == "deferred")
           s.mechanisms = MechanismSet::Deferred;
         else if (v == "upfront")
           s.mechanisms = MechanismSet::Upfront;
         else
           throw ConfigError(fmt::format("{}: expected both, deferred or upfront, got '{}'", k, v));
       }},
      {"ranking",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) {
         if (v == "benefit_cost")
           s.ranking = Ranking::BenefitCost;
         else if (v == "old_growth")
           s.ranking = Ranking::OldGrowth;
         else
           throw ConfigError(fmt::format("{}: expected benefit_cost or old_growth, got '{}'", k, v));
       }},
      {"initial_budget",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) { s.initial_budget = to_number(k, v); }},
      {"upfront_budget",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) {
         if (v == "npv-matched")
           s.upfront_budget.reset();
         else
           s.upfront_budget = to_number(k, v);
       }},
      {"npv_match",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) {
         if (v == "spent")
           s.match_basis = MatchBasis::Spent;
         else if (v == "allotted")
           s.match_basis = MatchBasis::Allotted;
         else
           throw ConfigError(fmt::format("{}: expected spent or allotted, got '{}'", k, v));
       }},
      {"output_dir",
       [](Scenario& s, std::string_view, std::string_view v, const std::filesystem::path& base) {
         s.output_dir = resolve(base, v);
       }},
      {"format",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) {
         if (v == "csv")
           s.format = data_io::ReportFormat::Csv;
         else if (v == "json")
           s.format = data_io::ReportFormat::Json;
         else
           throw ConfigError(fmt::format("{}: expected csv or json, got '{}'", k, v));
       }},
      {"seed",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) {
         s.config.seed = to_integer<std::uint64_t>(k, v);
       }},
      {"interest_rate", number_into(&SchemeConfig::interest_rate_r)},
      {"lending_period", int_into(&SchemeConfig::lending_period_t)},
      {"instalment_count", int_into(&SchemeConfig::instalment_count_x)},
      {"bid_cap_lo", number_into(&SchemeConfig::bid_cap_lo)},
      {"bid_cap_hi", number_into(&SchemeConfig::bid_cap_hi)},
      {"upfront_cap_hi", number_into(&SchemeConfig::upfront_cap_hi)},
      {"discount_rate", number_into(&SchemeConfig::discount_rate)},
      {"landowner_discount_rate", number_into(&SchemeConfig::landowner_discount_rate)},
      {"benefit_per_ha", number_into(&SchemeConfig::benefit_per_ha)},
      {"horizon_years",
       [](Scenario& s, std::string_view k, std::string_view v, const auto&) {
         if (v == "auto")
           s.config.horizon_years.reset();
         else
           s.config.horizon_years = to_integer<int>(k, v);
       }},
      {"harvest_window", int_into(&SchemeConfig::harvest_window)},
      {"amenity.d0", amenity_into(&AmenityParams::d0)},
      {"amenity.d1", amenity_into(&AmenityParams::d1)},
      {"amenity.k_max", amenity_into(&AmenityParams::k_max)},
      {"amenity.phi_mean", amenity_into(&AmenityParams::phi_mean)},
      {"amenity.phi_sd", amenity_into(&AmenityParams::phi_sd)},
      {"amenity.phi_floor", amenity_into(&AmenityParams::phi_floor)},
  };
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  Scenario s;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
    if (!seen.emplace(key).second)
      throw ConfigError(fmt::format("line {}: key '{}' given twice", line_no, key));
    if (value.empty())
      throw ConfigError(fmt::format("line {}: key '{}' has no value", line_no, key));
    try {
      it->second(s, key, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("{}: not a valid manifest: {}", path.string(), e.what()));
    }
    return from_manifest(j);
  }
  return parse_scenario(text, path.parent_path());
}

void validate(const Scenario& s) {
  require_valid(s.config);
  if (!std::isfinite(s.initial_budget) || s.initial_budget < 0.0)
    throw ConfigError("initial_budget must be >= 0");
  if (s.upfront_budget && (!std::isfinite(*s.upfront_budget) || *s.upfront_budget < 0.0))
    throw ConfigError("upfront_budget must be >= 0 or npv-matched");
  if (s.runs_upfront() && !s.upfront_budget && !s.runs_deferred())
    throw ConfigError("upfront_budget = npv-matched needs the deferred mechanism in the same scenario");
  if (s.dataset.empty())
    data_io::validate(s.synthetic);
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

nlohmann::json profile_json(const data_io::SyntheticProfile& p) {
  return {
      {"n_sites", p.n_sites},
      {"age_min", p.age_min},
      {"age_max", p.age_max},
      {"age_beta_a", p.age_beta_a},
      {"age_beta_b", p.age_beta_b},
      {"site_type_mix", p.site_type_mix},
      {"rotation_age", p.rotation_age},
      {"max_volume", p.max_volume},
      {"volume_age_scale", p.volume_age_scale},
      {"volume_noise_sd", p.volume_noise_sd},
      {"timber_price", p.timber_price},
      {"price_noise_sd", p.price_noise_sd},
      {"v0_timber_share", p.v0_timber_share},
      {"v0_timber_noise_sd", p.v0_timber_noise_sd},
      {"bare_land_value", p.bare_land_value},
      {"bare_land_noise_sd", p.bare_land_noise_sd},
      {"deadwood_base", p.deadwood_base},
      {"deadwood_scale", p.deadwood_scale},
      {"deadwood_exponent", p.deadwood_exponent},
      {"deadwood_noise_sd", p.deadwood_noise_sd},
      {"fertile_broadleaf_beta", p.fertile_broadleaf_beta},
      {"other_broadleaf_beta", p.other_broadleaf_beta},
      {"area_ha", p.area_ha},
      {"land_payment", p.land_payment},
  };
}

data_io::SyntheticProfile profile_from(const nlohmann::json& j) {
  data_io::SyntheticProfile p;
  j.at("n_sites").get_to(p.n_sites);
  j.at("age_min").get_to(p.age_min);
  j.at("age_max").get_to(p.age_max);
  j.at("age_beta_a").get_to(p.age_beta_a);
  j.at("age_beta_b").get_to(p.age_beta_b);
  j.at("site_type_mix").get_to(p.site_type_mix);
  j.at("rotation_age").get_to(p.rotation_age);
  j.at("max_volume").get_to(p.max_volume);
  j.at("volume_age_scale").get_to(p.volume_age_scale);
  j.at("volume_noise_sd").get_to(p.volume_noise_sd);
  j.at("timber_price").get_to(p.timber_price);
  j.at("price_noise_sd").get_to(p.price_noise_sd);
  j.at("v0_timber_share").get_to(p.v0_timber_share);
  j.at("v0_timber_noise_sd").get_to(p.v0_timber_noise_sd);
  j.at("bare_land_value").get_to(p.bare_land_value);
  j.at("bare_land_noise_sd").get_to(p.bare_land_noise_sd);
  j.at("deadwood_base").get_to(p.deadwood_base);
  j.at("deadwood_scale").get_to(p.deadwood_scale);
  j.at("deadwood_exponent").get_to(p.deadwood_exponent);
  j.at("deadwood_noise_sd").get_to(p.deadwood_noise_sd);
  j.at("fertile_broadleaf_beta").get_to(p.fertile_broadleaf_beta);
  j.at("other_broadleaf_beta").get_to(p.other_broadleaf_beta);
  j.at("area_ha").get_to(p.area_ha);
  j.at("land_payment").get_to(p.land_payment);
  return p;
}

nlohmann::json config_json(const SchemeConfig& c) {
  return {
      {"interest_rate", c.interest_rate_r},
      {"lending_period", c.lending_period_t},
      {"instalment_count", c.instalment_count_x},
      {"bid_cap_lo", c.bid_cap_lo},
      {"bid_cap_hi", c.bid_cap_hi},
      {"upfront_cap_hi", c.upfront_cap_hi},
      {"discount_rate", c.discount_rate},
      {"landowner_discount_rate", c.landowner_discount_rate},
      {"benefit_per_ha", c.benefit_per_ha},
      {"horizon_years", c.horizon_years ? nlohmann::json(*c.horizon_years) : nlohmann::json()},
      {"harvest_window", c.harvest_window},
      {"amenity",
       {{"d0", c.amenity.d0},
        {"d1", c.amenity.d1},
        {"k_max", c.amenity.k_max},
        {"phi_mean", c.amenity.phi_mean},
        {"phi_sd", c.amenity.phi_sd},
        {"phi_floor", c.amenity.phi_floor}}},
  };
}

SchemeConfig config_from(const nlohmann::json& j) {
  SchemeConfig c;
  j.at("interest_rate").get_to(c.interest_rate_r);
  j.at("lending_period").get_to(c.lending_period_t);
  j.at("instalment_count").get_to(c.instalment_count_x);
  j.at("bid_cap_lo").get_to(c.bid_cap_lo);
  j.at("bid_cap_hi").get_to(c.bid_cap_hi);
  j.at("upfront_cap_hi").get_to(c.upfront_cap_hi);
  j.at("discount_rate").get_to(c.discount_rate);
  j.at("landowner_discount_rate").get_to(c.landowner_discount_rate);
  j.at("benefit_per_ha").get_to(c.benefit_per_ha);
  if (!j.at("horizon_years").is_null())
    c.horizon_years = j.at("horizon_years").get<int>();
  j.at("harvest_window").get_to(c.harvest_window);
  const auto& a = j.at("amenity");
  a.at("d0").get_to(c.amenity.d0);
  a.at("d1").get_to(c.amenity.d1);
  a.at("k_max").get_to(c.amenity.k_max);
  a.at("phi_mean").get_to(c.amenity.phi_mean);
  a.at("phi_sd").get_to(c.amenity.phi_sd);
  a.at("phi_floor").get_to(c.amenity.phi_floor);
  return c;
}

} // namespace

nlohmann::json manifest(const Scenario& s) {
  nlohmann::json j;
  j["tool_version"] = kVersion;
  j["seed"] = s.config.seed;
  if (s.dataset.empty())
    j["dataset"] = {{"synthetic", profile_json(s.synthetic)}, {"seed", s.data_seed()}};
  else
    j["dataset"] = {{"path", s.dataset.string()}};
  j["elite_table"] = s.elite_table.empty() ? nlohmann::json("default") : nlohmann::json(s.elite_table.string());
  j["config"] = config_json(s.config);
  j["mechanisms"] = to_string(s.mechanisms);
  j["ranking"] = to_string(s.ranking);
  j["initial_budget"] = s.initial_budget;
  j["upfront_budget"] = s.upfront_budget ? nlohmann::json(*s.upfront_budget) : nlohmann::json("npv-matched");
  j["npv_match"] = to_string(s.match_basis);
  j["format"] = data_io::to_string(s.format);
  return j;
}

Scenario from_manifest(const nlohmann::json& j) {
  // Reuse the text parser for enumerated fields so both inputs share one
  // set of rules.
  try {
    Scenario s;
    s.config = config_from(j.at("config"));
    s.config.seed = j.at("seed").get<std::uint64_t>();
    const auto& d = j.at("dataset");
    if (d.contains("path")) {
      s.dataset = d.at("path").get<std::string>();
    } else {
      s.synthetic = profile_from(d.at("synthetic"));
      s.dataset_seed = d.at("seed").get<std::uint64_t>();
    }
    const auto elite = j.at("elite_table").get<std::string>();
    const std::string budget = j.at("upfront_budget").is_string() ? j.at("upfront_budget").get<std::string>()
                                                                  : csv::exact(j.at("upfront_budget").get<double>());
    const std::string text = fmt::format("mechanisms = {}\nranking = {}\nupfront_budget = {}\nnpv_match = {}\nformat = {}\n",
                                         j.at("mechanisms").get<std::string>(), j.at("ranking").get<std::string>(),
                                         budget, j.at("npv_match").get<std::string>(),
                                         j.at("format").get<std::string>());
    const Scenario parsed = parse_scenario(text);
    s.mechanisms = parsed.mechanisms;
    s.ranking = parsed.ranking;
    s.upfront_budget = parsed.upfront_budget;
    s.match_basis = parsed.match_basis;
    s.format = parsed.format;
    s.initial_budget = j.at("initial_budget").get<double>();
    if (elite != "default")
      s.elite_table = elite;
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed manifest: {}", e.what()));
  }
}

// ---------------------------------------------------------------------------
// Pipeline

const RunOutcome* Execution::run(Mechanism m) const {
  for (const auto& r : runs) {
    if (r.mechanism == m)
      return &r;
  }
  return nullptr;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InternalError*>(&e) != nullptr)
    return 4;
  if (dynamic_cast<const IoError*>(&e) != nullptr)
    return 3;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr || dynamic_cast<const data_io::DataError*>(&e) != nullptr ||
      dynamic_cast<const std::invalid_argument*>(&e) != nullptr)
    return 2;
  return 4;
}

namespace {

void check(bool condition, const std::string& what) {
  if (!condition)
    throw InternalError("invariant breached: " + what);
}

void check_outcome(const RunOutcome& run, const SchemeConfig& cfg) {
  const std::string m(simulation::to_string(run.mechanism));
  std::set<std::size_t> seen;
  for (const auto& c : run.conserved)
    check(seen.insert(c.site_index).second, m + ": site " + c.site_id + " recorded twice");
  for (const auto& l : run.lost)
    check(seen.insert(l.site_index).second, m + ": site " + l.site_id + " recorded twice");

  const auto spent = run.spent_by_year();
  double npv = 0.0;
  for (std::size_t y = 0; y < spent.size(); ++y) {
    const double cap = y < run.budget_by_year.size() ? run.budget_by_year[y] : 0.0;
    check(spent[y] <= cap + 1e-6 * std::max(1.0, cap), fmt::format("{}: year {} spending exceeds budget", m, y));
    npv += spent[y] / std::pow(1.0 + cfg.discount_rate, static_cast<double>(y));
  }
  check(std::abs(npv - run.summary.costs_npv) <= 0.01, m + ": costs_npv disagrees with the spending stream");
  check(std::abs(run.summary.ex_post_net_benefits - (run.summary.benefits_npv + run.summary.lost_benefits)) <= 1e-6,
        m + ": net benefits do not add up");

  if (run.mechanism == Mechanism::Deferred) {
    check(run.lost.empty(), "deferred: a funded site was harvested");
    for (const auto& c : run.conserved)
      check(c.year == 0, "deferred: site " + c.site_id + " conserved after year 0");
  }
}

} // namespace

Execution execute(const Scenario& s) {
  validate(s);
  if (s.dataset.empty())
    return execute(s, data_io::generate_synthetic(s.synthetic, s.data_seed()));
  auto loaded = data_io::load_sites(s.dataset);
  auto e = execute(s, std::move(loaded.sites));
  e.rejected_rows = loaded.issues.size();
  return e;
}

Execution execute(const Scenario& s, simulation::Dataset dataset) {
  validate(s);
  const SchemeConfig& cfg = s.config;
  Execution e;
  e.dataset = std::move(dataset);
  e.elite_table = s.elite_table.empty() ? ecology::default_elite_table() : ecology::load_elite_table(s.elite_table);
  e.evaluations = simulation::evaluate_sites(e.dataset, cfg, e.elite_table);
  e.schedule = simulation::draw_harvest_schedule(e.dataset, cfg);

  auto offers_for = [&](Mechanism m) {
    auto offers = simulation::build_offers(e.dataset, e.evaluations, m);
    if (s.ranking == Ranking::OldGrowth)
      offers = simulation::select_old_growth(offers, e.dataset);
    return offers;
  };

  if (s.runs_deferred()) {
    const auto offers = offers_for(Mechanism::Deferred);
    e.runs.push_back(
        simulation::run_deferred(offers, simulation::rank_benefit_cost(offers), cfg, s.initial_budget, e.schedule));
  }
  if (s.runs_upfront()) {
    double budget = 0.0;
    if (s.upfront_budget) {
      budget = *s.upfront_budget;
    } else {
      const RunOutcome& d = e.runs.front();
      const double initial = s.match_basis == MatchBasis::Spent ? d.spending.at(0) : s.initial_budget;
      budget = finance::match_upfront_budget(initial, d.summary.instalment_cost_per_year, cfg.instalment_count_x,
                                             cfg.discount_rate, cfg.horizon());
      const double target =
          finance::npv(finance::deferred_stream(initial, d.summary.instalment_cost_per_year, cfg.instalment_count_x),
                       cfg.discount_rate);
      check(std::abs(budget * finance::annuity_due_factor(cfg.horizon(), cfg.discount_rate) - target) <= 0.01,
            "matched up-front budget does not reproduce the deferred NPV");
      e.matched_upfront_budget = budget;
    }
    const auto offers = offers_for(Mechanism::Upfront);
    e.runs.push_back(simulation::run_upfront(offers, simulation::rank_benefit_cost(offers), cfg, budget, e.schedule));
  }
  for (const auto& run : e.runs)
    check_outcome(run, cfg);
  return e;
}

std::vector<std::filesystem::path> write_outputs(const Scenario& s, const Execution& e,
                                                 const std::filesystem::path& dir) {
  data_io::ReportInput input;
  input.dataset = &e.dataset;
  input.evaluations = &e.evaluations;
  input.runs = e.runs;
  input.elite_table_source = e.elite_table.source;
  auto written = data_io::write_report(input, s.format, dir);

  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << manifest(s).dump(2) << '\n';
  if (!out)
    throw IoError(fmt::format("failed writing '{}'", path.string()));
  written.push_back(path);
  return written;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepAxes SweepAxes::defaults() {
  SweepAxes a;
  a.rates = {0.02, 0.03, 0.04};
  a.instalment_counts = {10, 20};
  return a;
}

std::vector<SweepPoint> expand(const Scenario& base, const SweepAxes& axes) {
  const auto or_base = [](const auto& axis, auto value) {
    using T = decltype(value);
    return axis.empty() ? std::vector<T>{value} : std::vector<T>(axis.begin(), axis.end());
  };
  const auto rates = or_base(axes.rates, base.config.interest_rate_r);
  const auto ts = or_base(axes.lending_periods, base.config.lending_period_t);
  const auto xs = or_base(axes.instalment_counts, base.config.instalment_count_x);
  const auto scales = or_base(axes.bid_cap_scales, 1.0);
  const auto seeds = or_base(axes.seeds, base.config.seed);

  std::vector<SweepPoint> points;
  for (double r : rates)
    for (int t : ts)
      for (int x : xs)
        for (double k : scales)
          for (std::uint64_t seed : seeds)
            points.push_back({points.size(), r, t, x, k, seed});
  return points;
}

Scenario apply(const Scenario& base, const SweepPoint& p) {
  Scenario s = base;
  s.config.interest_rate_r = p.rate;
  s.config.lending_period_t = p.lending_period;
  s.config.instalment_count_x = p.instalment_count;
  s.config.bid_cap_hi = base.config.bid_cap_hi * p.bid_cap_scale;
  s.config.seed = p.seed;
  return s;
}

std::vector<SweepRow> sweep(const Scenario& base, const SweepAxes& axes, unsigned jobs) {
  const auto points = expand(base, axes);
  std::vector<SweepRow> rows(points.size());
  auto work = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.point = points[i];
    try {
      row.runs = execute(apply(base, points[i])).runs;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.exit_code = exit_code_for(e);
    }
  };
  jobs = std::max(1u, jobs);
  std::size_t next = 0;
  while (next < points.size()) {
    std::vector<std::future<void>> batch;
    for (unsigned j = 0; j < jobs && next < points.size(); ++j, ++next)
      batch.push_back(std::async(std::launch::async, work, next));
    for (auto& f : batch)
      f.get();
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  std::vector<std::string> header{"point",       "interest_rate", "lending_period", "instalment_count",
                                  "bid_cap_scale", "seed",        "status",         "error",
                                  "mechanism"};
  for (auto& c : data_io::summary_columns())
    header.push_back(c);
  out << csv::join(header) << '\n';
  for (const auto& row : rows) {
    const auto& p = row.point;
    std::vector<std::string> lead{std::to_string(p.index), csv::exact(p.rate),
                                  std::to_string(p.lending_period), std::to_string(p.instalment_count),
                                  csv::exact(p.bid_cap_scale), std::to_string(p.seed),
                                  row.ok ? "ok" : "failed", row.error};
    if (!row.ok) {
      lead.emplace_back();
      lead.resize(header.size());
      out << csv::join(lead) << '\n';
      continue;
    }
    for (const auto& run : row.runs) {
      auto cells = lead;
      cells.emplace_back(simulation::to_string(run.mechanism));
      for (auto& c : data_io::summary_cells(run.summary))
        cells.push_back(c);
      out << csv::join(cells) << '\n';
    }
  }
  if (!out)
    throw IoError(fmt::format("failed writing '{}'", path.string()));
}

} // namespace deferral::scenario
