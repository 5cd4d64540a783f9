#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hatk/block_analysis.hpp"
#include "hatk/patterns.hpp"

namespace hatk {

enum class EngineDType : std::uint8_t { F32, F64 };

/// key=value fields describing one case, as written in a config line or
/// assembled from CLI options.
using FieldMap = std::map<std::string, std::string>;

/// A fully validated sweep case.
struct CaseSpec {
  std::string id;
  PatternSpec pattern;
  BlockSpec blocks;
  EngineDType dtype = EngineDType::F32;
  std::size_t repeats = 1;
  std::size_t iterations = 8;
  bool timing = false;
  std::size_t batch = 1;
  std::size_t heads = 2;
  std::size_t dim = 64;
  std::optional<double> expect_percent;  ///< reference sparsity, in percent
  std::string source;                    ///< where the reference value comes from
};

/// Builds a case from fields. Recognised keys: pattern, height, width, size
/// (HxW or N for square), window, kernel, radius, shift, block, dtype, repeats,
/// iterations, timing, batch, heads, dim, expect, source. Throws
/// ValidationError naming the offending field.
CaseSpec case_from_fields(const std::string& id, const FieldMap& fields);

/// A case line as parsed, before validation.
struct CaseEntry {
  std::string id;
  std::size_t line = 0;
  FieldMap fields;
};

enum class ReportFormat : std::uint8_t { Table, Json, Csv };

struct SweepConfig {
  std::vector<CaseEntry> cases;
  ReportFormat format = ReportFormat::Table;
  std::uint64_t seed = 0;
};

ReportFormat parse_report_format(const std::string& name);

/// Parses the line-based sweep format (see docs/config_format.md). Syntax
/// errors throw ValidationError with the line number; field problems inside
/// a case are deferred to case_from_fields so other cases still run.
SweepConfig parse_sweep_config(std::istream& in);
SweepConfig load_sweep_config(const std::string& path);

/// Splits `a,b` or `a` (meaning `a,a`) into two positive integers.
Extent2D parse_pair(const std::string& text, const std::string& what);

}  // namespace hatk
