#pragma once

// Scenario files, manifests and the end-to-end experiment pipeline used by
// the command-line tool.
//
// A scenario file is plain text, one `key = value` per line, `#` starts a
// comment. See docs/scenario_format.md for the key list.

#include "deferral/data_io.hpp"
#include "deferral/ecology.hpp"
#include "deferral/simulation.hpp"
#include "deferral/types.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace deferral::scenario {

inline constexpr const char* kVersion = "1.0.0";

/// Raised when a run breaks an accounting invariant. Always a bug.
class InternalError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

enum class MechanismSet { Both, Deferred, Upfront };
enum class Ranking { BenefitCost, OldGrowth };
enum class MatchBasis { Spent, Allotted };

std::string_view to_string(MechanismSet m);
std::string_view to_string(Ranking r);
std::string_view to_string(MatchBasis b);

struct Scenario {
  /// Empty means a synthetic dataset drawn from `synthetic`.
  std::filesystem::path dataset;
  data_io::SyntheticProfile synthetic;
  /// Seed for the synthetic dataset; unset means the scenario seed.
  std::optional<std::uint64_t> dataset_seed;
  /// Empty means the built-in default ELITE table.
  std::filesystem::path elite_table;
  SchemeConfig config;
  MechanismSet mechanisms = MechanismSet::Both;
  Ranking ranking = Ranking::BenefitCost;
  double initial_budget = 5'000'000.0;
  /// Unset means "npv-matched".
  std::optional<double> upfront_budget;
  MatchBasis match_basis = MatchBasis::Spent;
  std::filesystem::path output_dir = "out";
  data_io::ReportFormat format = data_io::ReportFormat::Csv;

  bool runs_deferred() const { return mechanisms != MechanismSet::Upfront; }
  bool runs_upfront() const { return mechanisms != MechanismSet::Deferred; }
  std::uint64_t data_seed() const { return dataset_seed.value_or(config.seed); }
};

/// Throws ConfigError naming the first problem found (unknown key, bad value,
/// violated invariant). Relative paths are resolved against `base_dir`.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});

/// Reads a scenario file (IoError if unreadable) or, for a `.json` path, a manifest.
Scenario load_scenario(const std::filesystem::path& path);

/// Checks cross-field rules and the scheme config; throws ConfigError.
void validate(const Scenario& s);

/// Everything needed to reproduce a run, excluding where outputs go.
nlohmann::json manifest(const Scenario& s);
Scenario from_manifest(const nlohmann::json& j);

struct Execution {
  simulation::Dataset dataset;
  std::size_t rejected_rows = 0;
  ecology::EliteTable elite_table;
  std::vector<simulation::SiteEvaluation> evaluations;
  simulation::HarvestSchedule schedule;
  std::vector<simulation::RunOutcome> runs;
  std::optional<double> matched_upfront_budget;

  const simulation::RunOutcome* run(simulation::Mechanism m) const;
};

/// Exit code for an exception escaping the pipeline: 2 config, 3 I/O, 4 internal.
int exit_code_for(const std::exception& e);

/// Loads or generates the dataset and runs the selected mechanisms.
/// Throws InternalError if an outcome breaks an accounting invariant.
Execution execute(const Scenario& s);

/// Same pipeline on a dataset the caller already holds.
Execution execute(const Scenario& s, simulation::Dataset dataset);

/// Writes the report files plus manifest.json into `dir`; returns the paths.
std::vector<std::filesystem::path> write_outputs(const Scenario& s, const Execution& e,
                                                 const std::filesystem::path& dir);

/// Sensitivity sweep over the Cartesian product of the non-empty axes.
struct SweepAxes {
  std::vector<double> rates;
  std::vector<int> lending_periods;
  std::vector<int> instalment_counts;
  std::vector<double> bid_cap_scales;
  std::vector<std::uint64_t> seeds;

  /// r in {2%, 3%, 4%} crossed with x in {10, 20}.
  static SweepAxes defaults();
};

struct SweepPoint {
  std::size_t index = 0;
  double rate = 0.0;
  int lending_period = 0;
  int instalment_count = 0;
  double bid_cap_scale = 1.0;
  std::uint64_t seed = 0;
};

struct SweepRow {
  SweepPoint point;
  bool ok = false;
  std::string error;
  int exit_code = 0; ///< the code a single run of this point would exit with
  std::vector<simulation::RunOutcome> runs;
};

std::vector<SweepPoint> expand(const Scenario& base, const SweepAxes& axes);

/// The scenario a sweep point stands for; running it alone gives the same row.
Scenario apply(const Scenario& base, const SweepPoint& p);

/// Runs every point, `jobs` at a time. Failed points are kept with their error.
std::vector<SweepRow> sweep(const Scenario& base, const SweepAxes& axes, unsigned jobs);

/// One line per (point, mechanism), ordered by point index.
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

} // namespace deferral::scenario
