#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hatk/report.hpp"
#include "hatk/sweep_config.hpp"

namespace hatk {

struct SweepOptions {
  std::size_t threads = 1;
  std::optional<bool> timing;          // overrides every case's timing flag
  std::optional<std::uint64_t> seed;   // overrides the config seed
};

/// Sparsity (and, if requested, stage timings) for one validated case.
ReportRow run_case(const CaseSpec& spec, std::uint64_t seed, std::size_t threads = 1);

/// Runs every case in config order. A case that fails validation yields a row
/// with `error` set; the others still run. Without timing, cases run in
/// parallel; the sparsity columns do not depend on the thread count.
std::vector<ReportRow> run_sweep(const SweepConfig& config, const SweepOptions& options = {});

/// Per-case seed derived from the sweep seed and the case id, so a case's
/// inputs do not depend on its position in the config.
std::uint64_t case_seed(std::uint64_t sweep_seed, const std::string& id);

/// 0 when every row matched or carried no reference, 2 on any mismatch,
/// 1 when some case was invalid but none mismatched.
int verify_exit_code(const std::vector<ReportRow>& rows);

}  // namespace hatk
