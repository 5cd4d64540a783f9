#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hatk/attention.hpp"
#include "hatk/block_analysis.hpp"

namespace hatk {

struct TimingStat {
  double mean = 0;   // seconds
  double stdev = 0;  // seconds, sample standard deviation across runs
  friend bool operator==(const TimingStat&, const TimingStat&) = default;
};

struct StageTimings {
  TimingStat reshape;
  TimingStat projection;
  TimingStat attention;
  TimingStat total;
  std::size_t runs = 0;
  std::size_t iterations = 0;  // per run, warm-up included
  friend bool operator==(const StageTimings&, const StageTimings&) = default;
};

// NoReference: the case carries no expected value.
// Flagged: padded grid whose empty-tile ratio differs from the reference but
// whose area-normalised sparsity matches it; reported as a warning.
enum class Verdict : std::uint8_t { NoReference, Match, Flagged, Mismatch };

std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view text);

struct ReportRow {
  std::string id;
  std::string pattern;  // PatternSpec::describe()
  std::string blocks;   // "128x128"
  std::optional<SparsityReport> sparsity;
  std::optional<double> reference_percent;
  std::string source;
  Verdict verdict = Verdict::NoReference;
  std::optional<StageTimings> timings;
  std::optional<ExecStats> stats;
  std::optional<std::string> error;
  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Sparsity in percent, rounded half away from zero to two decimals and
/// returned as hundredths (87.84 -> 8784) so comparisons are exact.
std::int64_t hundredths_percent(double ratio);

/// Compares a sparsity report against a reference percentage.
Verdict judge(const SparsityReport& report, std::optional<double> reference_percent);

std::string report_to_json(const std::vector<ReportRow>& rows, int indent = 2);
std::vector<ReportRow> report_from_json(std::string_view text);
std::string report_to_csv(const std::vector<ReportRow>& rows);
std::string report_to_table(const std::vector<ReportRow>& rows);

}  // namespace hatk
