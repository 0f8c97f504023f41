#include "deferral/data_io.hpp"

#include "deferral/csv.hpp"
#include "deferral/rng.hpp"

#include "json.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numeric>
#include <random>

namespace deferral::data_io {

using simulation::Dataset;
using simulation::Mechanism;
using simulation::RunOutcome;

// ---------------------------------------------------------------------------
// Site CSV

LoadResult load_sites(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);

  std::array<std::size_t, kRequiredColumns.size()> col{};
  for (std::size_t i = 0; i < kRequiredColumns.size(); ++i) {
    const auto idx = table.column(kRequiredColumns[i]);
    if (!idx)
      throw DataError(fmt::format("{}: missing required column '{}'", path.string(), kRequiredColumns[i]));
    col[i] = *idx;
  }
  const auto col_area = table.column("area_ha");
  const auto col_land = table.column("land_payment");

  LoadResult result;
  for (const auto& row : table.rows) {
    RowIssue issue;
    issue.line = row.line;
    SiteRecord site;
    site.id = row.cells[col[0]];
    issue.site_id = site.id;

    auto number = [&](std::size_t cell, const char* name, double& target) {
      const auto v = csv::to_double(row.cells[cell]);
      if (!v)
        issue.problems.push_back(fmt::format("{}: cannot parse '{}' as a number", name, row.cells[cell]));
      else
        target = *v;
    };

    if (const auto t = parse_site_type(row.cells[col[1]]))
      site.site_type = *t;
    else
      issue.problems.push_back(fmt::format("site_type: unknown value '{}'", row.cells[col[1]]));
    number(col[2], "stand_age", site.stand_age);
    number(col[3], "stand_volume", site.stand_volume);
    if (const auto s = parse_species(row.cells[col[4]]))
      site.dominant_species = *s;
    else
      issue.problems.push_back(fmt::format("dominant_species: unknown value '{}'", row.cells[col[4]]));
    number(col[5], "broadleaf_share", site.broadleaf_share);
    number(col[6], "deadwood", site.deadwood);
    number(col[7], "timber_value", site.timber_value);
    number(col[8], "opportunity_cost_v0", site.opportunity_cost_v0);
    number(col[9], "commercial_rotation_age", site.commercial_rotation_age);
    if (col_area && !row.cells[*col_area].empty())
      number(*col_area, "area_ha", site.area_ha);
    if (col_land && !row.cells[*col_land].empty())
      number(*col_land, "land_payment", site.land_payment);

    if (issue.problems.empty()) {
      for (const auto& v : validate_site(site))
        issue.problems.push_back(v.field + ": " + v.rule);
    }
    if (issue.problems.empty())
      result.sites.push_back(std::move(site));
    else
      result.issues.push_back(std::move(issue));
  }
  return result;
}

void write_sites(const Dataset& sites, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  std::vector<std::string> header(kRequiredColumns.begin(), kRequiredColumns.end());
  header.emplace_back("area_ha");
  header.emplace_back("land_payment");
  out << csv::join(header) << '\n';
  for (const auto& s : sites) {
    out << csv::join({
               s.id,
               std::string(to_string(s.site_type)),
               csv::exact(s.stand_age),
               csv::exact(s.stand_volume),
               std::string(to_string(s.dominant_species)),
               csv::exact(s.broadleaf_share),
               csv::exact(s.deadwood),
               csv::exact(s.timber_value),
               csv::exact(s.opportunity_cost_v0),
               csv::exact(s.commercial_rotation_age),
               csv::exact(s.area_ha),
               csv::exact(s.land_payment),
           })
        << '\n';
  }
  if (!out)
    throw IoError(fmt::format("failed writing '{}'", path.string()));
}

// ---------------------------------------------------------------------------
// Synthetic generator

void validate(const SyntheticProfile& p) {
  const double mix = std::accumulate(p.site_type_mix.begin(), p.site_type_mix.end(), 0.0);
  if (std::abs(mix - 1.0) > 1e-9)
    throw ConfigError(fmt::format("site_type_mix sums to {}, expected 1", mix));
  for (double w : p.site_type_mix) {
    if (w < 0.0)
      throw ConfigError("site_type_mix entries must be >= 0");
  }
  if (!(p.age_min >= 0.0 && p.age_max >= p.age_min))
    throw ConfigError("age range must satisfy 0 <= age_min <= age_max");
  if (!(p.age_beta_a > 0.0 && p.age_beta_b > 0.0))
    throw ConfigError("age beta parameters must be > 0");
  for (double r : p.rotation_age) {
    if (!(r > 0.0))
      throw ConfigError("rotation ages must be > 0");
  }
  if (!(p.volume_age_scale > 0.0 && p.timber_price >= 0.0 && p.area_ha > 0.0 && p.land_payment >= 0.0))
    throw ConfigError("volume scale, price, area and land payment must be positive");
  for (double sd : {p.volume_noise_sd, p.price_noise_sd, p.v0_timber_noise_sd, p.bare_land_noise_sd,
                    p.deadwood_noise_sd}) {
    if (!(sd >= 0.0))
      throw ConfigError("noise standard deviations must be >= 0");
  }
}

namespace {

double draw_beta(rng::Engine& eng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(eng);
  const double y = gb(eng);
  return x / (x + y);
}

double lognormal_factor(rng::Engine& eng, double sd) {
  if (sd == 0.0)
    return 1.0;
  std::normal_distribution<double> n(0.0, sd);
  return std::exp(n(eng));
}

bool fertile(SiteType t) { return t == SiteType::HerbRich || t == SiteType::HerbRichHeath; }

} // namespace

Dataset generate_synthetic(const SyntheticProfile& p, std::uint64_t seed) {
  validate(p);
  Dataset out;
  out.reserve(p.n_sites);
  const int width = std::max<int>(4, static_cast<int>(std::to_string(p.n_sites).size()));
  for (std::size_t i = 0; i < p.n_sites; ++i) {
    auto eng = rng::stream(seed, "site", i);
    SiteRecord s;
    s.id = fmt::format("S{:0{}}", i + 1, width);
    s.area_ha = p.area_ha;
    s.land_payment = p.land_payment;

    std::discrete_distribution<int> type_dist(p.site_type_mix.begin(), p.site_type_mix.end());
    s.site_type = static_cast<SiteType>(type_dist(eng));
    const auto t = static_cast<std::size_t>(s.site_type);

    s.stand_age = std::round(p.age_min + (p.age_max - p.age_min) * draw_beta(eng, p.age_beta_a, p.age_beta_b));
    s.commercial_rotation_age = p.rotation_age[t];

    const double growth = 1.0 - std::exp(-s.stand_age / p.volume_age_scale);
    s.stand_volume = p.max_volume[t] * growth * growth * lognormal_factor(eng, p.volume_noise_sd);
    s.timber_value = s.stand_volume * p.timber_price * lognormal_factor(eng, p.price_noise_sd);
    const double harvest_part = p.v0_timber_share * s.timber_value * lognormal_factor(eng, p.v0_timber_noise_sd);
    const double land_part = p.bare_land_value[t] * lognormal_factor(eng, p.bare_land_noise_sd);
    s.opportunity_cost_v0 = harvest_part + land_part;

    const double rel_age = p.age_max > 0.0 ? s.stand_age / p.age_max : 0.0;
    s.deadwood = (p.deadwood_base + p.deadwood_scale * std::pow(rel_age, p.deadwood_exponent)) *
                 lognormal_factor(eng, p.deadwood_noise_sd);

    const auto& beta = fertile(s.site_type) ? p.fertile_broadleaf_beta : p.other_broadleaf_beta;
    s.broadleaf_share = draw_beta(eng, beta[0], beta[1]);
    s.dominant_species = s.broadleaf_share >= 0.5 ? Species::Broadleaf : Species::Conifer;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string_view to_string(ReportFormat format) { return format == ReportFormat::Csv ? "csv" : "json"; }

std::vector<std::string> summary_columns() {
  return {"budget",          "instalment_cost_per_year", "offered_area_ha",  "area_ha",
          "lost_area_ha",    "bd_index_sum",             "avg_stand_age",    "avg_downpayment",
          "avg_instalment",  "avg_total_payment_npv",    "costs_npv",        "benefits_npv",
          "lost_benefits",   "ex_post_net_benefits",     "absolute_costs"};
}

std::vector<std::string> summary_cells(const simulation::Summary& s) {
  return {csv::cents(s.budget),          csv::cents(s.instalment_cost_per_year), csv::cents(s.offered_area_ha),
          csv::cents(s.area_ha),         csv::cents(s.lost_area_ha),             csv::cents(s.bd_index_sum),
          csv::cents(s.avg_stand_age),   csv::cents(s.avg_downpayment),          csv::cents(s.avg_instalment),
          csv::cents(s.avg_total_payment_npv), csv::cents(s.costs_npv),          csv::cents(s.benefits_npv),
          csv::cents(s.lost_benefits),   csv::cents(s.ex_post_net_benefits),     csv::cents(s.absolute_costs)};
}

namespace {

struct YearRow {
  int year = 0;
  double budget = 0.0;
  double annual_cost = 0.0;
  double cumulative_cost = 0.0;
  double conserved_area = 0.0;
  double cumulative_area = 0.0;
  double lost_area = 0.0;
};

std::vector<YearRow> time_series(const RunOutcome& run) {
  const auto spent = run.spent_by_year();
  std::vector<YearRow> rows(spent.size());
  for (std::size_t y = 0; y < rows.size(); ++y) {
    rows[y].year = static_cast<int>(y);
    rows[y].budget = y < run.budget_by_year.size() ? run.budget_by_year[y] : 0.0;
    rows[y].annual_cost = spent[y];
  }
  for (const auto& c : run.conserved)
    rows.at(static_cast<std::size_t>(c.year)).conserved_area += c.area_ha;
  for (const auto& l : run.lost) {
    if (static_cast<std::size_t>(l.harvest_year) < rows.size())
      rows[static_cast<std::size_t>(l.harvest_year)].lost_area += l.area_ha;
  }
  double cost = 0.0;
  double area = 0.0;
  for (auto& r : rows) {
    cost += r.annual_cost;
    area += r.conserved_area;
    r.cumulative_cost = cost;
    r.cumulative_area = area;
  }
  return rows;
}

struct SiteFate {
  std::string status = "not_offered";
  int year = -1;
};

std::vector<SiteFate> site_fates(const RunOutcome& run, const std::vector<simulation::SiteEvaluation>& evals) {
  std::vector<SiteFate> fates(evals.size());
  for (const auto& ev : evals) {
    const bool offered = run.mechanism == Mechanism::Deferred ? ev.deferred.participates : ev.upfront.participates;
    if (offered)
      fates[ev.site_index].status = "offered";
  }
  for (const auto& c : run.conserved)
    fates.at(c.site_index) = {"conserved", c.year};
  for (const auto& l : run.lost)
    fates.at(l.site_index) = {"lost", l.harvest_year};
  return fates;
}

nlohmann::json summary_json(const simulation::Summary& s) {
  return {
      {"budget", s.budget},
      {"instalment_cost_per_year", s.instalment_cost_per_year},
      {"offered_area_ha", s.offered_area_ha},
      {"area_ha", s.area_ha},
      {"lost_area_ha", s.lost_area_ha},
      {"bd_index_sum", s.bd_index_sum},
      {"avg_stand_age", s.avg_stand_age},
      {"avg_downpayment", s.avg_downpayment},
      {"avg_instalment", s.avg_instalment},
      {"avg_total_payment_npv", s.avg_total_payment_npv},
      {"costs_npv", s.costs_npv},
      {"benefits_npv", s.benefits_npv},
      {"lost_benefits", s.lost_benefits},
      {"ex_post_net_benefits", s.ex_post_net_benefits},
      {"absolute_costs", s.absolute_costs},
  };
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out)
    throw IoError(fmt::format("failed writing '{}'", path.string()));
}

} // namespace

std::vector<std::filesystem::path> write_report(const ReportInput& input, ReportFormat format,
                                                const std::filesystem::path& dir) {
  if (input.dataset == nullptr || input.evaluations == nullptr)
    throw std::invalid_argument("report input needs the dataset and site evaluations");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));

  const Dataset& sites = *input.dataset;
  const auto& evals = *input.evaluations;
  std::vector<std::vector<SiteFate>> fates;
  for (const auto& run : input.runs)
    fates.push_back(site_fates(run, evals));

  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::Csv) {
    {
      const auto path = dir / "summary.csv";
      auto out = open_for_write(path);
      std::vector<std::string> header{"mechanism"};
      for (auto& c : summary_columns())
        header.push_back(c);
      out << csv::join(header) << '\n';
      for (const auto& run : input.runs) {
        std::vector<std::string> row{std::string(simulation::to_string(run.mechanism))};
        for (auto& c : summary_cells(run.summary))
          row.push_back(c);
        out << csv::join(row) << '\n';
      }
      finish(out, path);
      written.push_back(path);
    }
    {
      const auto path = dir / "timeseries.csv";
      auto out = open_for_write(path);
      out << "mechanism,year,budget,annual_cost,cumulative_cost,conserved_area_ha,cumulative_area_ha,lost_area_ha\n";
      for (const auto& run : input.runs) {
        for (const auto& r : time_series(run)) {
          out << csv::join({std::string(simulation::to_string(run.mechanism)), std::to_string(r.year),
                            csv::cents(r.budget), csv::cents(r.annual_cost), csv::cents(r.cumulative_cost),
                            csv::cents(r.conserved_area), csv::cents(r.cumulative_area), csv::cents(r.lost_area)})
              << '\n';
        }
      }
      finish(out, path);
      written.push_back(path);
    }
    {
      const auto path = dir / "sites.csv";
      auto out = open_for_write(path);
      std::vector<std::string> header{"site_id",          "owner",          "payment",
                                      "opportunity_cost", "elite",          "downpayment",
                                      "instalment",       "deferred_offer", "upfront_payment",
                                      "upfront_offer"};
      for (const auto& run : input.runs) {
        const std::string m(simulation::to_string(run.mechanism));
        header.push_back(m + "_status");
        header.push_back(m + "_year");
      }
      out << csv::join(header) << '\n';
      for (const auto& ev : evals) {
        const SiteRecord& s = sites.at(ev.site_index);
        std::vector<std::string> row{s.id,
                                     std::string(to_string(ev.owner.kind)),
                                     csv::cents(conservation_payment(s)),
                                     csv::cents(s.opportunity_cost_v0),
                                     fmt::format("{:.4f}", ev.elite),
                                     csv::cents(ev.deferred.downpayment_c),
                                     csv::cents(ev.deferred.instalment_m),
                                     ev.deferred.participates ? "yes" : "no",
                                     csv::cents(ev.upfront.total_payment),
                                     ev.upfront.participates ? "yes" : "no"};
        for (const auto& f : fates) {
          const auto& fate = f[ev.site_index];
          row.push_back(fate.status);
          row.push_back(fate.year >= 0 ? std::to_string(fate.year) : "");
        }
        out << csv::join(row) << '\n';
      }
      finish(out, path);
      written.push_back(path);
    }
    return written;
  }

  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["elite_table"] = input.elite_table_source;
  doc["runs"] = nlohmann::json::array();
  for (const auto& run : input.runs) {
    nlohmann::json j;
    j["mechanism"] = simulation::to_string(run.mechanism);
    j["summary"] = summary_json(run.summary);
    j["timeseries"] = nlohmann::json::array();
    for (const auto& r : time_series(run)) {
      j["timeseries"].push_back({{"year", r.year},
                                 {"budget", r.budget},
                                 {"annual_cost", r.annual_cost},
                                 {"cumulative_cost", r.cumulative_cost},
                                 {"conserved_area_ha", r.conserved_area},
                                 {"cumulative_area_ha", r.cumulative_area},
                                 {"lost_area_ha", r.lost_area}});
    }
    doc["runs"].push_back(std::move(j));
  }
  doc["sites"] = nlohmann::json::array();
  for (const auto& ev : evals) {
    const SiteRecord& s = sites.at(ev.site_index);
    nlohmann::json j{{"site_id", s.id},
                     {"owner", to_string(ev.owner.kind)},
                     {"payment", conservation_payment(s)},
                     {"opportunity_cost", s.opportunity_cost_v0},
                     {"elite", ev.elite},
                     {"downpayment", ev.deferred.downpayment_c},
                     {"instalment", ev.deferred.instalment_m},
                     {"deferred_offer", ev.deferred.participates},
                     {"upfront_payment", ev.upfront.total_payment},
                     {"upfront_offer", ev.upfront.participates}};
    for (std::size_t r = 0; r < input.runs.size(); ++r) {
      const std::string m(simulation::to_string(input.runs[r].mechanism));
      const auto& fate = fates[r][ev.site_index];
      j[m] = {{"status", fate.status}, {"year", fate.year >= 0 ? nlohmann::json(fate.year) : nlohmann::json()}};
    }
    doc["sites"].push_back(std::move(j));
  }
  const auto path = dir / "report.json";
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
  written.push_back(path);
  return written;
}

} // namespace deferral::data_io
