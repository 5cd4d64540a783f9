#include "hatk/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hatk/error.hpp"
#include "json.hpp"

namespace hatk {

using nlohmann::json;

namespace {

constexpr int kReportVersion = 1;

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  if (value) {
    j[key] = *value;
  } else {
    j[key] = nullptr;
  }
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::string format(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void to_json(json& j, const SparsityReport& r) {
  j = json{{"n", r.n},
           {"n_pad_q", r.n_pad_q},
           {"n_pad_k", r.n_pad_k},
           {"b_q", r.b_q},
           {"b_k", r.b_k},
           {"rows", r.rows},
           {"cols", r.cols},
           {"total_blocks", r.total_blocks},
           {"full_blocks", r.full_blocks},
           {"partial_blocks", r.partial_blocks},
           {"empty_blocks", r.empty_blocks},
           {"full_ratio", r.full_ratio},
           {"partial_ratio", r.partial_ratio},
           {"empty_ratio", r.empty_ratio},
           {"kernel_sparsity", r.kernel_sparsity}};
}

void from_json(const json& j, SparsityReport& r) {
  j.at("n").get_to(r.n);
  j.at("n_pad_q").get_to(r.n_pad_q);
  j.at("n_pad_k").get_to(r.n_pad_k);
  j.at("b_q").get_to(r.b_q);
  j.at("b_k").get_to(r.b_k);
  j.at("rows").get_to(r.rows);
  j.at("cols").get_to(r.cols);
  j.at("total_blocks").get_to(r.total_blocks);
  j.at("full_blocks").get_to(r.full_blocks);
  j.at("partial_blocks").get_to(r.partial_blocks);
  j.at("empty_blocks").get_to(r.empty_blocks);
  j.at("full_ratio").get_to(r.full_ratio);
  j.at("partial_ratio").get_to(r.partial_ratio);
  j.at("empty_ratio").get_to(r.empty_ratio);
  j.at("kernel_sparsity").get_to(r.kernel_sparsity);
}

void to_json(json& j, const TimingStat& t) { j = json{{"mean", t.mean}, {"stdev", t.stdev}}; }

void from_json(const json& j, TimingStat& t) {
  j.at("mean").get_to(t.mean);
  j.at("stdev").get_to(t.stdev);
}

void to_json(json& j, const StageTimings& t) {
  j = json{{"reshape", t.reshape},     {"projection", t.projection}, {"attention", t.attention},
           {"total", t.total},         {"runs", t.runs},             {"iterations", t.iterations}};
}

void from_json(const json& j, StageTimings& t) {
  j.at("reshape").get_to(t.reshape);
  j.at("projection").get_to(t.projection);
  j.at("attention").get_to(t.attention);
  j.at("total").get_to(t.total);
  j.at("runs").get_to(t.runs);
  j.at("iterations").get_to(t.iterations);
}

void to_json(json& j, const ExecStats& s) {
  j = json{{"blocks_visited", s.blocks_visited},
           {"block_visits", s.block_visits},
           {"empty_blocks_visited", s.empty_blocks_visited},
           {"pairs_evaluated", s.pairs_evaluated},
           {"elementwise_masks_applied", s.elementwise_masks_applied}};
}

void from_json(const json& j, ExecStats& s) {
  j.at("blocks_visited").get_to(s.blocks_visited);
  j.at("block_visits").get_to(s.block_visits);
  j.at("empty_blocks_visited").get_to(s.empty_blocks_visited);
  j.at("pairs_evaluated").get_to(s.pairs_evaluated);
  j.at("elementwise_masks_applied").get_to(s.elementwise_masks_applied);
}

void to_json(json& j, const ReportRow& r) {
  j = json{{"id", r.id},
           {"pattern", r.pattern},
           {"blocks", r.blocks},
           {"source", r.source},
           {"verdict", std::string(to_string(r.verdict))}};
  put_optional(j, "sparsity", r.sparsity);
  put_optional(j, "reference_percent", r.reference_percent);
  put_optional(j, "timings", r.timings);
  put_optional(j, "stats", r.stats);
  put_optional(j, "error", r.error);
}

void from_json(const json& j, ReportRow& r) {
  j.at("id").get_to(r.id);
  j.at("pattern").get_to(r.pattern);
  j.at("blocks").get_to(r.blocks);
  j.at("source").get_to(r.source);
  r.verdict = parse_verdict(j.at("verdict").get<std::string>());
  r.sparsity = get_optional<SparsityReport>(j, "sparsity");
  r.reference_percent = get_optional<double>(j, "reference_percent");
  r.timings = get_optional<StageTimings>(j, "timings");
  r.stats = get_optional<ExecStats>(j, "stats");
  r.error = get_optional<std::string>(j, "error");
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::NoReference: return "none";
    case Verdict::Match: return "match";
    case Verdict::Flagged: return "flagged";
    case Verdict::Mismatch: return "mismatch";
  }
  return "?";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "none") return Verdict::NoReference;
  if (text == "match") return Verdict::Match;
  if (text == "flagged") return Verdict::Flagged;
  if (text == "mismatch") return Verdict::Mismatch;
  throw ValidationError("unknown verdict '" + std::string(text) + "'");
}

std::int64_t hundredths_percent(double ratio) { return std::llround(ratio * 10000.0); }

Verdict judge(const SparsityReport& report, std::optional<double> reference_percent) {
  if (!reference_percent) return Verdict::NoReference;
  const std::int64_t want = std::llround(*reference_percent * 100.0);
  if (hundredths_percent(report.empty_ratio) == want) return Verdict::Match;
  if (report.padded() && hundredths_percent(report.kernel_sparsity) == want) return Verdict::Flagged;
  return Verdict::Mismatch;
}

std::string report_to_json(const std::vector<ReportRow>& rows, int indent) {
  json doc = {{"version", kReportVersion}, {"rows", rows}};
  return doc.dump(indent) + "\n";
}

std::vector<ReportRow> report_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("version").get<int>() != kReportVersion) {
      throw ValidationError("unsupported report version " + doc.at("version").dump());
    }
    return doc.at("rows").get<std::vector<ReportRow>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

std::string report_to_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "id,pattern,blocks,n,n_pad,total_blocks,full,partial,empty,sparsity_pct,kernel_sparsity_pct,"
         "reference_pct,verdict,reshape_s,projection_s,attention_s,total_s,total_stdev_s,error\n";
  for (const auto& r : rows) {
    out << csv_escape(r.id) << ',' << csv_escape(r.pattern) << ',' << r.blocks << ',';
    if (r.sparsity) {
      const auto& s = *r.sparsity;
      out << s.n << ',' << s.n_pad_q << ',' << s.total_blocks << ',' << s.full_blocks << ',' << s.partial_blocks
          << ',' << s.empty_blocks << ',' << format("%.4f", 100 * s.empty_ratio) << ','
          << format("%.4f", 100 * s.kernel_sparsity) << ',';
    } else {
      out << ",,,,,,,,";
    }
    out << (r.reference_percent ? format("%.2f", *r.reference_percent) : "") << ',' << to_string(r.verdict) << ',';
    if (r.timings) {
      const auto& t = *r.timings;
      out << format("%.6e", t.reshape.mean) << ',' << format("%.6e", t.projection.mean) << ','
          << format("%.6e", t.attention.mean) << ',' << format("%.6e", t.total.mean) << ','
          << format("%.6e", t.total.stdev) << ',';
    } else {
      out << ",,,,,";
    }
    out << csv_escape(r.error.value_or("")) << '\n';
  }
  return out.str();
}

std::string report_to_table(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-24s %-26s %-9s %8s %8s %8s %9s %9s %8s\n", "case", "pattern", "blocks", "full",
                "partial", "empty", "sparsity", "reference", "verdict");
  out << line;
  for (const auto& r : rows) {
    if (r.error) {
      std::snprintf(line, sizeof line, "%-24s ERROR: %s\n", r.id.c_str(), r.error->c_str());
      out << line;
      continue;
    }
    const auto& s = *r.sparsity;
    const std::string ref = r.reference_percent ? format("%.2f", *r.reference_percent) : "-";
    std::snprintf(line, sizeof line, "%-24s %-26s %-9s %8zu %8zu %8zu %9.2f %9s %8s\n", r.id.c_str(),
                  r.pattern.c_str(), r.blocks.c_str(), s.full_blocks, s.partial_blocks, s.empty_blocks,
                  100 * s.empty_ratio, ref.c_str(), std::string(to_string(r.verdict)).c_str());
    out << line;
    if (r.verdict == Verdict::Flagged) {
      std::snprintf(line, sizeof line, "%24s   warning: padded to %zu; empty-tile ratio %.2f, area-normalised %.2f\n",
                    "", s.n_pad_q, 100 * s.empty_ratio, 100 * s.kernel_sparsity);
      out << line;
    }
    if (r.timings) {
      const auto& t = *r.timings;
      std::snprintf(line, sizeof line,
                    "%24s   time ms: reshape %.3f  projection %.3f  attention %.3f  total %.3f (+/- %.3f)\n", "",
                    1e3 * t.reshape.mean, 1e3 * t.projection.mean, 1e3 * t.attention.mean, 1e3 * t.total.mean,
                    1e3 * t.total.stdev);
      out << line;
    }
  }
  return out.str();
}

}  // namespace hatk
