#pragma once

#include "usec/dense_matrix.hpp"
#include "usec/elastic_runtime.hpp"
#include "usec/placement.hpp"
#include "usec/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace usec {

/// Builds a named placement ("repetition", "cyclic", "man"). Repetition uses
/// G = N.
StoragePlacement named_placement(std::string_view name, std::size_t machines, std::size_t replication);

/// Speeds in trials and the CLI are quoted per q/reference_submatrices rows.
/// A placement with a different G sees them scaled by G / reference.
SpeedVector speeds_for_granularity(std::span<const double> speeds, std::size_t submatrices,
                                   std::size_t reference_submatrices);

struct SpeedDistribution {
  enum class Kind { Exponential, Uniform, Constant };
  Kind kind = Kind::Exponential;
  double a = 1.0;  // rate | low | value
  double b = 1.0;  // high (uniform only)

  /// "exponential", "exponential:2.0", "uniform:0.5:2", "constant:1".
  static SpeedDistribution parse(std::string_view text);
  std::string to_string() const;
};

inline constexpr double kMinTrialSpeed = 1e-6;

struct TrialOptions {
  std::size_t trials = 5000;
  std::uint64_t seed = 1;
  SpeedDistribution distribution;
  std::size_t machines = 6;
  std::size_t replication = 3;
  std::vector<std::string> placements{"repetition", "cyclic", "man"};
  std::size_t reference_submatrices = 0;  // 0: use machines
  std::size_t bins = 50;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string placement;
  Rational c_star;
  double c = 0.0;
};

struct PlacementSummary {
  std::string placement;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double min = 0.0;
  double max = 0.0;
};

/// For an ordered pair (a, b): trials where a was strictly slower than b,
/// strictly faster, and tied. The three add up to the trial count.
struct PairwiseCount {
  std::string a;
  std::string b;
  std::size_t a_worse = 0;
  std::size_t a_better = 0;
  std::size_t ties = 0;
};

struct HistogramBin {
  std::string placement;
  std::size_t bin = 0;
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

struct TrialReport {
  TrialOptions options;
  std::vector<TrialRecord> records;  // trial-major, placement order within a trial
  std::vector<PlacementSummary> summaries;
  std::vector<PairwiseCount> pairwise;
  std::vector<HistogramBin> histogram;
};

/// Per-trial seed derived from the base seed.
std::uint64_t trial_seed(std::uint64_t base, std::size_t trial);
std::vector<double> draw_speeds(const SpeedDistribution& distribution, std::size_t machines, std::uint64_t seed);

TrialReport run_trials(const TrialOptions& options);

/// Mean and unbiased variance from c values in trial order.
PlacementSummary summarize(std::string placement, std::span<const double> values);

/// 50 uniform bins over [0, p99] of the pooled values, plus a final
/// overflow bin per placement for values above p99.
std::vector<HistogramBin> histogram(const std::vector<TrialRecord>& records,
                                    const std::vector<std::string>& placements, std::size_t bins);

void write_trials_csv(std::ostream& out, const TrialReport& report);
void write_summary_csv(std::ostream& out, const TrialReport& report);
void write_histogram_csv(std::ostream& out, const TrialReport& report);

/// Scenario file plus its workload.
struct SimulationSetup {
  ElasticScenario scenario;
  DenseMatrix matrix;
  std::vector<double> start;
};

/// Parses the JSON scenario format (see docs/formats.md). Relative paths
/// are resolved against `base_dir`.
SimulationSetup parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir = {});
SimulationSetup load_scenario(const std::filesystem::path& path);

struct SimulationReport {
  PowerIterationResult heterogeneous;
  PowerIterationResult homogeneous;
  double total_time_heterogeneous = 0.0;
  double total_time_homogeneous = 0.0;
  double speedup() const { return total_time_homogeneous / total_time_heterogeneous; }
};

SimulationReport run_simulation(const SimulationSetup& setup);

/// step,mode,c_est,c_real,nmse
void write_simulation_csv(std::ostream& out, const SimulationReport& report);
/// Per-step details: completion time, stragglers, availability, loads.
void write_steps_csv(std::ostream& out, const SimulationReport& report);

std::string format_double(double value);

}  // namespace usec
