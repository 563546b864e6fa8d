// Config files, seed sweeps and CSV aggregation.
//
// Config files are line-oriented `key = value` text; `#` starts a comment.
// Ranges take two numbers, e.g. `speed_range = 10 30`. Sweep specs use the
// same syntax, with `protocol`, `variant`, `value` and `seed` repeatable.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "manet/core.hpp"
#include "manet/engine.hpp"

namespace manet {

/// Applies one `key = value` setting. Throws ConfigError naming the key.
void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);
/// Every key apply_setting accepts, in file order.
std::vector<std::string> config_keys();

/// Parses and validates config text. An empty text gives the defaults.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

enum class SweepAxis { NodeCount, PacketLoad };
std::string_view to_string(SweepAxis a);

struct SweepSpec {
  ScenarioConfig base;
  SweepAxis axis = SweepAxis::NodeCount;
  std::vector<int> axis_values;
  std::vector<Protocol> protocols;
  std::vector<Variant> variants{Variant::Classical, Variant::MinusHello};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int repetitions = 1;

  void validate() const;
  /// One config per run in sweep order: protocol, variant, axis value, seed, repetition.
  [[nodiscard]] std::vector<ScenarioConfig> expand() const;
};

/// Requires `axis` and at least one `value`; protocols default to all five.
SweepSpec parse_sweep(std::string_view text);
SweepSpec load_sweep(const std::filesystem::path& path);

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 with fewer than two samples
  int n = 0;
};
Stat summarize(const std::vector<double>& xs);

/// Metric names used in aggregates and CSV file names.
inline constexpr const char* kEnergy = "energy";          // total J
inline constexpr const char* kLifetime = "lifetime";      // first node death, ms
inline constexpr const char* kDelay = "delay";            // ms, runs with at least one complete session
inline constexpr const char* kThroughput = "throughput";  // delivered / offered, runs with load
inline constexpr const char* kCsvMetrics[] = {kEnergy, kLifetime, kDelay, kThroughput};

/// Extracts a named metric; empty when the run has no value for it.
std::optional<double> metric_value(const MetricsReport& r, std::string_view metric);
/// All metrics metric_value knows.
const std::vector<std::string>& metric_names();

struct AggregateRow {
  Protocol protocol = Protocol::AODV;
  Variant variant = Variant::Classical;
  int value = 0;
  int runs = 0;  // successful runs in the cell
  std::map<std::string, Stat> metrics;
};

struct RunRecord {
  ScenarioConfig config;
  std::optional<MetricsReport> report;
  std::string error;
};

struct SweepResult {
  std::vector<AggregateRow> rows;
  std::vector<RunRecord> runs;
  std::vector<std::string> failures;
};

struct SweepOptions {
  unsigned threads = 1;
  std::function<void(const RunRecord&)> on_run;  // called in sweep order
};

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& opts = {});

/// CSV for one metric, header `protocol,variant,axis,value,metric,mean,stddev,n`.
std::string aggregate_csv(const std::vector<AggregateRow>& rows, SweepAxis axis, std::string_view metric);
/// Writes energy.csv, lifetime.csv, delay.csv and throughput.csv; returns the paths.
std::vector<std::filesystem::path> write_csvs(const std::vector<AggregateRow>& rows, SweepAxis axis,
                                              const std::filesystem::path& dir);

struct Improvement {
  Protocol protocol = Protocol::AODV;
  int value = 0;
  std::string metric;
  std::optional<double> percent;  // empty when the classical mean is zero or a side is missing
};

/// Lower is better for energy and delay, higher for lifetime and throughput.
double improvement_percent(std::string_view metric, double classical, double minus_hello);
std::vector<Improvement> improvement_table(const std::vector<AggregateRow>& rows);
std::string improvement_csv(const std::vector<Improvement>& table, SweepAxis axis);

/// %.6g, or NA for non-finite values.
std::string format_number(double v);

}  // namespace manet
