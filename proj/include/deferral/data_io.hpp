#pragma once

// Dataset ingestion, synthetic stand generation and report output.

#include "deferral/ecology.hpp"
#include "deferral/simulation.hpp"
#include "deferral/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace deferral::data_io {

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<const char*, 10> kRequiredColumns = {
    "id",       "site_type",    "stand_age",           "stand_volume",           "dominant_species",
    "broadleaf_share", "deadwood", "timber_value", "opportunity_cost_v0", "commercial_rotation_age",
};

struct RowIssue {
  std::size_t line = 0;
  std::string site_id;
  std::vector<std::string> problems;
};

struct LoadResult {
  simulation::Dataset sites; ///< rows that parsed and validated
  std::vector<RowIssue> issues;
};

/// Reads a site CSV. Optional columns area_ha and land_payment default to
/// 10 ha and 400 €/ha. Rows with unparseable cells or invariant violations
/// are reported in `issues` and left out of `sites`. Throws DataError for a
/// missing required column and IoError for unreadable or malformed files.
LoadResult load_sites(const std::filesystem::path& path);

/// Writes sites in the same schema with round-trip exact numbers.
void write_sites(const simulation::Dataset& sites, const std::filesystem::path& path);

/// Parameters of the synthetic stand generator. Defaults are calibration
/// targets loosely matching a 400-stand regional survey (ages 6-230 years,
/// average conservation payment around 7 000 €/ha); they are not field data.
struct SyntheticProfile {
  std::size_t n_sites = 400;
  double age_min = 6.0;
  double age_max = 230.0;
  /// Stand age = age_min + (age_max - age_min) * Beta(a, b), rounded.
  double age_beta_a = 2.0;
  double age_beta_b = 2.6;
  /// Indexed by SiteType.
  std::array<double, 6> site_type_mix = {0.10, 0.15, 0.35, 0.25, 0.10, 0.05};
  std::array<double, 6> rotation_age = {70.0, 70.0, 80.0, 90.0, 100.0, 120.0};
  /// Volume curve: max_volume * (1 - exp(-age / volume_age_scale))^2, m³/ha.
  std::array<double, 6> max_volume = {380.0, 340.0, 300.0, 220.0, 160.0, 100.0};
  double volume_age_scale = 40.0;
  double volume_noise_sd = 0.3; ///< log-normal
  double timber_price = 30.0;   ///< €/m³
  double price_noise_sd = 0.1;
  /// Opportunity cost = timber share * timber value + bare land value, each with log-normal noise.
  double v0_timber_share = 0.85;
  double v0_timber_noise_sd = 0.15;
  std::array<double, 6> bare_land_value = {4800.0, 4000.0, 3000.0, 1800.0, 1000.0, 500.0};
  double bare_land_noise_sd = 0.3;
  /// Deadwood = (base + scale * (age / age_max)^exponent) * log-normal noise.
  double deadwood_base = 1.0;
  double deadwood_scale = 25.0;
  double deadwood_exponent = 1.5;
  double deadwood_noise_sd = 0.4;
  /// Broadleaf share ~ Beta on herb-rich types and on the rest.
  std::array<double, 2> fertile_broadleaf_beta = {2.0, 3.0};
  std::array<double, 2> other_broadleaf_beta = {1.0, 5.0};
  double area_ha = kDefaultAreaHa;
  double land_payment = kDefaultLandPayment;

  bool operator==(const SyntheticProfile&) const = default;
};

/// Throws ConfigError when the profile is unusable.
void validate(const SyntheticProfile& profile);

/// Deterministic: each site is drawn from its own stream keyed by (seed, index).
simulation::Dataset generate_synthetic(const SyntheticProfile& profile, std::uint64_t seed);

enum class ReportFormat { Csv, Json };

std::string_view to_string(ReportFormat format);

/// Everything a report needs about one scenario execution.
struct ReportInput {
  const simulation::Dataset* dataset = nullptr;
  const std::vector<simulation::SiteEvaluation>* evaluations = nullptr;
  std::vector<simulation::RunOutcome> runs;
  std::string elite_table_source;
};

inline constexpr int kReportSchemaVersion = 1;

/// CSV: summary.csv, timeseries.csv and sites.csv. JSON: report.json.
/// Returns the paths written. Throws IoError when the directory is unwritable.
std::vector<std::filesystem::path> write_report(const ReportInput& input, ReportFormat format,
                                                const std::filesystem::path& dir);

/// Column names shared by summary.csv and the sweep table.
std::vector<std::string> summary_columns();
std::vector<std::string> summary_cells(const simulation::Summary& s);

} // namespace deferral::data_io
