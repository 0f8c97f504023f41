// Command-line front end: run, sweep, gen-data, validate, extrapolate.

#include "deferral/csv.hpp"
#include "deferral/data_io.hpp"
#include "deferral/scenario.hpp"
#include "deferral/simulation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace deferral;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

void apply_globals(scenario::Scenario& s, const Globals& g) {
  if (g.seed)
    s.config.seed = *g.seed;
  if (g.out_dir)
    s.output_dir = *g.out_dir;
  if (g.format)
    s.format = *g.format == "json" ? data_io::ReportFormat::Json : data_io::ReportFormat::Csv;
}

fs::path out_dir(const Globals& g, const fs::path& fallback) { return g.out_dir ? fs::path(*g.out_dir) : fallback; }

int cmd_run(const std::string& file, const Globals& g) {
  auto s = scenario::load_scenario(file);
  apply_globals(s, g);
  scenario::validate(s);
  const auto e = scenario::execute(s);
  if (e.rejected_rows > 0)
    std::cerr << fmt::format("warning: {} invalid dataset rows were skipped (see `validate`)\n", e.rejected_rows);
  const auto written = scenario::write_outputs(s, e, s.output_dir);
  for (const auto& run : e.runs) {
    const auto& m = run.summary;
    std::cerr << fmt::format("{:>8}: offered {:.0f} ha, conserved {:.0f} ha, lost {:.0f} ha, costs NPV {:.2f}, "
                             "net benefits {:.2f}\n",
                             simulation::to_string(run.mechanism), m.offered_area_ha, m.area_ha, m.lost_area_ha,
                             m.costs_npv, m.ex_post_net_benefits);
  }
  if (e.matched_upfront_budget)
    std::cerr << fmt::format("npv-matched up-front budget: {:.2f} per year\n", *e.matched_upfront_budget);
  auto echo = scenario::manifest(s);
  echo["outputs"] = nlohmann::json::array();
  for (const auto& p : written)
    echo["outputs"].push_back(p.string());
  std::cout << echo.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const std::string& file, const scenario::SweepAxes& given, unsigned jobs, const Globals& g) {
  auto s = scenario::load_scenario(file);
  apply_globals(s, g);
  scenario::validate(s);
  scenario::SweepAxes axes = given;
  if (axes.rates.empty() && axes.lending_periods.empty() && axes.instalment_counts.empty() &&
      axes.bid_cap_scales.empty() && axes.seeds.empty())
    axes = scenario::SweepAxes::defaults();
  const auto rows = scenario::sweep(s, axes, jobs);

  std::error_code ec;
  fs::create_directories(s.output_dir, ec);
  if (ec)
    throw IoError(fmt::format("cannot create output directory '{}': {}", s.output_dir.string(), ec.message()));
  const auto table = s.output_dir / "sweep.csv";
  scenario::write_sweep_csv(rows, table);

  auto echo = scenario::manifest(s);
  echo["command"] = "sweep";
  echo["axes"] = {{"rates", axes.rates},
                  {"lending_periods", axes.lending_periods},
                  {"instalment_counts", axes.instalment_counts},
                  {"bid_cap_scales", axes.bid_cap_scales},
                  {"seeds", axes.seeds}};
  {
    const auto path = s.output_dir / "sweep_manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out << echo.dump(2) << '\n';
  }
  echo["outputs"] = {table.string(), (s.output_dir / "sweep_manifest.json").string()};
  std::cout << echo.dump(2) << '\n';

  int code = 0;
  for (const auto& row : rows) {
    if (!row.ok) {
      std::cerr << fmt::format("point {} failed: {}\n", row.point.index, row.error);
      code = std::max(code, row.exit_code);
    }
  }
  return code;
}

int cmd_gen_data(std::size_t n, std::optional<std::string> out, const Globals& g) {
  data_io::SyntheticProfile profile;
  profile.n_sites = n;
  const std::uint64_t seed = g.seed.value_or(1);
  const fs::path path = out ? fs::path(*out) : out_dir(g, ".") / "sites.csv";
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  data_io::write_sites(data_io::generate_synthetic(profile, seed), path);
  nlohmann::json echo{{"command", "gen-data"},
                      {"tool_version", scenario::kVersion},
                      {"n_sites", n},
                      {"seed", seed},
                      {"outputs", {path.string()}}};
  std::cout << echo.dump(2) << '\n';
  return 0;
}

int cmd_validate(const std::string& file) {
  const fs::path path(file);
  if (path.extension() == ".csv") {
    const auto result = data_io::load_sites(path);
    for (const auto& issue : result.issues) {
      for (const auto& p : issue.problems)
        std::cout << fmt::format("line {} ({}): {}\n", issue.line, issue.site_id, p);
    }
    std::cout << fmt::format("{} valid sites, {} rejected rows\n", result.sites.size(), result.issues.size());
    return result.issues.empty() ? 0 : 2;
  }
  const auto s = scenario::load_scenario(path);
  std::cout << scenario::manifest(s).dump(2) << '\n';
  return 0;
}

struct ExtrapolateArgs {
  double area = 54'000.0;
  std::optional<double> avg_downpayment;
  std::optional<double> avg_instalment;
  std::optional<double> avg_upfront;
  std::optional<std::string> from_run;
  double harvest_loss_share = 0.093;
  SchemeConfig cfg;
  std::optional<int> horizon;
};

int cmd_extrapolate(ExtrapolateArgs a, const Globals& g) {
  if (a.from_run) {
    std::ifstream in(*a.from_run, std::ios::binary);
    if (!in)
      throw IoError(fmt::format("cannot read '{}'", *a.from_run));
    nlohmann::json report;
    try {
      report = nlohmann::json::parse(in);
      for (const auto& run : report.at("runs")) {
        const auto& s = run.at("summary");
        if (run.at("mechanism") == "deferred") {
          if (!a.avg_downpayment)
            a.avg_downpayment = s.at("avg_downpayment").get<double>();
          if (!a.avg_instalment)
            a.avg_instalment = s.at("avg_instalment").get<double>();
        } else if (!a.avg_upfront) {
          a.avg_upfront = s.at("avg_downpayment").get<double>();
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("{}: not a JSON run report: {}", *a.from_run, e.what()));
    }
  }
  if (!a.avg_downpayment || !a.avg_instalment || !a.avg_upfront)
    throw ConfigError("extrapolate needs --avg-downpayment, --avg-instalment and --avg-upfront (or --from-run)");
  if (!(a.area > 0.0 && *a.avg_downpayment > 0.0 && *a.avg_instalment >= 0.0 && *a.avg_upfront > 0.0))
    throw ConfigError("extrapolation inputs must be positive");
  a.cfg.horizon_years = a.horizon;
  require_valid(a.cfg);

  simulation::NationalInput in{a.area, *a.avg_downpayment, *a.avg_instalment, *a.avg_upfront, a.harvest_loss_share};
  const auto r = simulation::extrapolate_national(in, a.cfg);
  if (g.format && *g.format == "json") {
    nlohmann::json j{{"area_ha", a.area},
                     {"discount_rate", a.cfg.discount_rate},
                     {"deferred",
                      {{"downpayments", r.deferred_downpayments},
                       {"instalments_per_year", r.deferred_instalments_per_year},
                       {"instalment_years", a.cfg.instalment_count_x},
                       {"npv", r.deferred_npv},
                       {"absolute", r.deferred_absolute}}},
                     {"upfront",
                      {{"area_per_year", r.upfront_area_per_year},
                       {"annual_budget", r.upfront_annual},
                       {"years", a.cfg.horizon()},
                       {"npv", r.upfront_npv},
                       {"absolute", r.upfront_absolute}}},
                     {"harvest_loss_area_ha", r.harvest_loss_area}};
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::cout << fmt::format("Area to conserve: {:.0f} ha, discount rate {:.2f}%\n", a.area, 100.0 * a.cfg.discount_rate);
  std::cout << fmt::format("Deferred:  downpayments {:.1f} M€ in year 0, instalments {:.2f} M€/yr for {} years\n",
                           r.deferred_downpayments / 1e6, r.deferred_instalments_per_year / 1e6,
                           a.cfg.instalment_count_x);
  std::cout << fmt::format("           NPV {:.1f} M€, absolute {:.1f} M€\n", r.deferred_npv / 1e6,
                           r.deferred_absolute / 1e6);
  std::cout << fmt::format("Up-front:  {:.0f} ha/yr at {:.1f} M€/yr for {} years\n", r.upfront_area_per_year,
                           r.upfront_annual / 1e6, a.cfg.horizon());
  std::cout << fmt::format("           NPV {:.1f} M€, absolute {:.1f} M€\n", r.upfront_npv / 1e6,
                           r.upfront_absolute / 1e6);
  std::cout << fmt::format("Harvest risk while waiting: about {:.0f} ha ({:.1f}% of the target) would be felled\n",
                           r.harvest_loss_area, 100.0 * a.harvest_loss_share);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deferred-payment conservation auction simulator"};
  app.set_version_flag("--version", scenario::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Master random seed");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"csv", "json"}));

  std::string file;
  auto* run = app.add_subcommand("run", "Run a scenario file or a manifest.json");
  run->add_option("scenario", file, "Scenario file or manifest")->required();

  scenario::SweepAxes axes;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
  sweep->add_option("scenario", file, "Scenario file")->required();
  sweep->add_option("--rates", axes.rates, "Interest rates")->delimiter(',');
  sweep->add_option("--lending-periods", axes.lending_periods, "Lending periods t")->delimiter(',');
  sweep->add_option("--instalment-counts", axes.instalment_counts, "Instalment counts x")->delimiter(',');
  sweep->add_option("--bid-cap-scales", axes.bid_cap_scales, "Multipliers on bid_cap_hi")->delimiter(',');
  sweep->add_option("--seeds", axes.seeds, "Seeds")->delimiter(',');
  sweep->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

  std::size_t n_sites = 400;
  std::optional<std::string> data_out;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic site dataset");
  gen->add_option("-n,--n-sites", n_sites, "Number of sites");
  gen->add_option("-o,--output", data_out, "CSV path (default <out-dir>/sites.csv)");

  auto* val = app.add_subcommand("validate", "Check a site CSV or a scenario file");
  val->add_option("file", file, "File to check")->required();

  ExtrapolateArgs ex;
  auto* extra = app.add_subcommand("extrapolate", "Scale per-hectare costs to a national target");
  extra->add_option("--area", ex.area, "Target area, ha");
  extra->add_option("--avg-downpayment", ex.avg_downpayment, "€/ha");
  extra->add_option("--avg-instalment", ex.avg_instalment, "€/ha/yr");
  extra->add_option("--avg-upfront", ex.avg_upfront, "€/ha");
  extra->add_option("--from-run", ex.from_run, "JSON report to take averages from");
  extra->add_option("--instalment-count", ex.cfg.instalment_count_x, "Instalment years x");
  extra->add_option("--lending-period", ex.cfg.lending_period_t, "Lending period t");
  extra->add_option("--interest-rate", ex.cfg.interest_rate_r, "Interest rate r");
  extra->add_option("--discount-rate", ex.cfg.discount_rate, "Government discount rate");
  extra->add_option("--horizon", ex.horizon, "Up-front programme length, years");
  extra->add_option("--harvest-loss-share", ex.harvest_loss_share, "Share of the target felled while waiting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run)
      return cmd_run(file, g);
    if (*sweep)
      return cmd_sweep(file, axes, jobs, g);
    if (*gen)
      return cmd_gen_data(n_sites, data_out, g);
    if (*val)
      return cmd_validate(file);
    if (*extra)
      return cmd_extrapolate(ex, g);
  } catch (const std::exception& e) {
    const int code = scenario::exit_code_for(e);
    std::cerr << (code == 4 ? "internal error: " : "error: ") << e.what() << '\n';
    return code;
  }
  return 0;
}
