#include "hatk/sweep.hpp"

#include <algorithm>
#include <exception>

#include "hatk/parallel.hpp"
#include "hatk/stage_bench.hpp"

namespace hatk {

std::uint64_t case_seed(std::uint64_t sweep_seed, const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ sweep_seed;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

ReportRow run_case(const CaseSpec& spec, std::uint64_t seed, std::size_t threads) {
  ReportRow row;
  row.id = spec.id;
  row.pattern = spec.pattern.describe();
  row.blocks = std::to_string(spec.blocks.q) + "x" + std::to_string(spec.blocks.k);
  row.reference_percent = spec.expect_percent;
  row.source = spec.source;

  const Pattern pattern(spec.pattern);
  const BlockGrid grid = classify(pattern, spec.blocks, {ClassifyMethod::Intervals, threads});
  row.sparsity = sparsity(grid);
  row.verdict = judge(*row.sparsity, spec.expect_percent);
  if (spec.timing) {
    auto bench = stage_bench(spec, seed, threads);
    row.timings = bench.timings;
    row.stats = bench.stats;
  }
  return row;
}

std::vector<ReportRow> run_sweep(const SweepConfig& config, const SweepOptions& options) {
  const std::uint64_t seed = options.seed.value_or(config.seed);
  std::vector<ReportRow> rows(config.cases.size());
  std::vector<std::optional<CaseSpec>> specs(config.cases.size());
  bool any_timing = false;

  for (std::size_t i = 0; i < config.cases.size(); ++i) {
    const auto& entry = config.cases[i];
    try {
      specs[i] = case_from_fields(entry.id, entry.fields);
      if (options.timing) specs[i]->timing = *options.timing;
      any_timing = any_timing || specs[i]->timing;
    } catch (const std::exception& e) {
      rows[i].id = entry.id;
      auto it = entry.fields.find("pattern");
      if (it != entry.fields.end()) rows[i].pattern = it->second;
      rows[i].error = "case '" + entry.id + "' (line " + std::to_string(entry.line) + "): " + e.what();
    }
  }

  auto run_one = [&](std::size_t i, std::size_t inner_threads) {
    if (!specs[i]) return;
    try {
      rows[i] = run_case(*specs[i], case_seed(seed, specs[i]->id), inner_threads);
    } catch (const std::exception& e) {
      rows[i] = ReportRow{};
      rows[i].id = specs[i]->id;
      rows[i].pattern = specs[i]->pattern.describe();
      rows[i].error = "case '" + specs[i]->id + "': " + e.what();
    }
  };

  if (any_timing) {
    // Timed cases run one at a time so they do not compete for cores.
    for (std::size_t i = 0; i < rows.size(); ++i) run_one(i, options.threads);
  } else {
    parallel_for(rows.size(), options.threads, [&](std::size_t i) { run_one(i, 1); });
  }
  return rows;
}

int verify_exit_code(const std::vector<ReportRow>& rows) {
  const bool mismatch = std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) {
    return r.verdict == Verdict::Mismatch;
  });
  if (mismatch) return 2;
  const bool invalid = std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.error.has_value(); });
  return invalid ? 1 : 0;
}

}  // namespace hatk
