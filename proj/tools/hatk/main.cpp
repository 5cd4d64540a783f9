#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hatk/attention.hpp"
#include "hatk/block_analysis.hpp"
#include "hatk/cost_model.hpp"
#include "hatk/error.hpp"
#include "hatk/grid_curve.hpp"
#include "hatk/patterns.hpp"
#include "hatk/render.hpp"
#include "hatk/report.hpp"
#include "hatk/sweep.hpp"
#include "hatk/sweep_config.hpp"
#include "hatk/tensor.hpp"

#ifndef HATK_DATA_DIR
#define HATK_DATA_DIR ""
#endif

namespace {

using namespace hatk;

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
};

// Writes to --out when given, otherwise stdout.
void emit(const Globals& g, const std::string& bytes) {
  if (g.out.empty() || g.out == "-") {
    std::cout.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    std::cout.flush();
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + g.out + "'");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Pattern options shared by every subcommand that needs a pattern.
struct PatternOptions {
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    const std::pair<const char*, const char*> keys[] = {
        {"pattern", "wsa, sa, na2d, hwa, hswa, hsa or hna"},
        {"size", "grid as HxW, or N for a square grid"},
        {"height", "grid height"},
        {"width", "grid width"},
        {"window", "window as HxW or N (wsa, hwa, hswa)"},
        {"kernel", "kernel as HxW or N (sa, na2d; default radius for hsa, hna)"},
        {"radius", "1D radius (hsa, hna)"},
        {"shift", "1D window shift (hswa)"},
        {"block", "tile size as BQxBK or B (default 128)"},
    };
    for (const auto& [key, help] : keys) cmd->add_option("--" + std::string(key), values[key], help);
  }

  CaseSpec build() const {
    FieldMap fields;
    for (const auto& [key, value] : values) {
      if (!value.empty()) fields[key] = value;
    }
    return case_from_fields("cli", fields);
  }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Falls back to the bundled data directory for bare file names.
std::string resolve_config(const std::string& path) {
  if (std::filesystem::exists(path)) return path;
  const std::filesystem::path bundled = std::filesystem::path(HATK_DATA_DIR) / path;
  if (!std::string(HATK_DATA_DIR).empty() && std::filesystem::exists(bundled)) return bundled.string();
  const std::filesystem::path by_name = std::filesystem::path(HATK_DATA_DIR) / std::filesystem::path(path).filename();
  if (!std::string(HATK_DATA_DIR).empty() && std::filesystem::exists(by_name)) return by_name.string();
  return path;
}

char label_char(BlockLabel l) {
  switch (l) {
    case BlockLabel::Full: return '#';
    case BlockLabel::Partial: return '+';
    case BlockLabel::Empty: return '.';
  }
  return '?';
}

// ---- curve ---------------------------------------------------------------

int run_curve(const Globals& g, std::uint32_t height, std::uint32_t width, const std::string& kind,
              const std::string& format, const std::string& svg_path) {
  const GridShape shape{height, width};
  shape.validate();
  const auto mapping = cached_mapping(shape, parse_ordering(kind));
  std::ostringstream out;
  if (format == "json") {
    nlohmann::json cells = nlohmann::json::array();
    for (const Cell& c : mapping->order()) cells.push_back({c.row, c.col});
    out << nlohmann::json{{"shape", {height, width}}, {"kind", std::string(to_string(mapping->kind()))},
                          {"order", cells}}
               .dump()
        << "\n";
  } else if (format == "csv") {
    out << "seq,row,col\n";
    for (std::size_t i = 0; i < mapping->size(); ++i) {
      const Cell& c = mapping->cell(static_cast<std::uint32_t>(i));
      out << i << ',' << c.row << ',' << c.col << '\n';
    }
  } else if (format == "grid") {
    for (std::uint32_t r = 0; r < height; ++r) {
      for (std::uint32_t c = 0; c < width; ++c) out << (c ? " " : "") << mapping->index(r, c);
      out << '\n';
    }
  } else {
    throw ValidationError("curve format must be json, csv or grid");
  }
  if (!svg_path.empty()) {
    const std::string svg = render_curve(*mapping, ImageFormat::Svg);
    std::ofstream f(svg_path, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + svg_path + "'");
    f << svg;
  }
  emit(g, out.str());
  return 0;
}

// ---- mask ----------------------------------------------------------------

int run_mask(const Globals& g, const PatternOptions& po, const std::string& format, std::size_t cap) {
  const CaseSpec c = po.build();
  const Pattern pattern(c.pattern);
  const MaskMatrix mask = materialize_mask(pattern, cap);
  const std::size_t n = mask.size();
  if (format == "pgm") {
    RenderOptions ro;
    ro.cell_px = 1;
    ro.cap = cap;
    emit(g, render_mask(mask, ImageFormat::Pgm, ro));
  } else if (format == "json") {
    std::map<std::size_t, std::size_t> row_sums;
    for (std::size_t q = 0; q < n; ++q) ++row_sums[mask.row_count(q)];
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [sum, rows] : row_sums) hist[std::to_string(sum)] = rows;
    const nlohmann::json doc = {{"pattern", c.pattern.describe()},
                                {"n", n},
                                {"allowed", mask.count()},
                                {"symmetric", mask.symmetric()},
                                {"row_sums", hist}};
    emit(g, doc.dump(2) + "\n");
  } else if (format == "text") {
    std::string out;
    out.reserve(n * (n + 1));
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t k = 0; k < n; ++k) out.push_back(mask.get(q, k) ? '1' : '0');
      out.push_back('\n');
    }
    emit(g, out);
  } else if (format == "tensor") {
    std::vector<float> bits(n * n);
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t k = 0; k < n; ++k) bits[q * n + k] = mask.get(q, k) ? 1.0f : 0.0f;
    }
    std::ostringstream out(std::ios::binary);
    write_tensor(out, TensorFile{{n, n}, std::move(bits)});
    emit(g, out.str());
  } else {
    throw ValidationError("mask format must be pgm, json, text or tensor");
  }
  return 0;
}

// ---- report --------------------------------------------------------------

int run_report(const Globals& g, const PatternOptions& po, const std::string& format, bool labels,
               const std::string& method) {
  CaseSpec c = po.build();
  c.id = c.pattern.describe();
  ClassifyOptions opts{method == "predicate" ? ClassifyMethod::Predicate : ClassifyMethod::Intervals, g.threads};
  if (method != "predicate" && method != "intervals") throw ValidationError("method must be intervals or predicate");
  const Pattern pattern(c.pattern);
  const BlockGrid grid = classify(pattern, c.blocks, opts);

  ReportRow row;
  row.id = c.id;
  row.pattern = c.pattern.describe();
  row.blocks = std::to_string(c.blocks.q) + "x" + std::to_string(c.blocks.k);
  row.sparsity = sparsity(grid);
  std::string text;
  switch (parse_report_format(format)) {
    case ReportFormat::Json: text = report_to_json({row}); break;
    case ReportFormat::Csv: text = report_to_csv({row}); break;
    case ReportFormat::Table: {
      const auto& s = *row.sparsity;
      std::ostringstream out;
      out << "pattern      " << row.pattern << "\n"
          << "tokens       " << s.n << " (padded to " << s.n_pad_q << " x " << s.n_pad_k << ")\n"
          << "blocks       " << row.blocks << ", grid " << s.rows << " x " << s.cols << " = " << s.total_blocks << "\n"
          << "full         " << s.full_blocks << "\n"
          << "partial      " << s.partial_blocks << "\n"
          << "empty        " << s.empty_blocks << "\n";
      char buf[128];
      std::snprintf(buf, sizeof buf, "sparsity     %.2f%% (empty tiles / all tiles)\n", 100 * s.empty_ratio);
      out << buf;
      if (s.padded()) {
        std::snprintf(buf, sizeof buf, "area-normed  %.2f%% (1 - R*bq*bk / N^2)\n", 100 * s.kernel_sparsity);
        out << buf;
      }
      text = out.str();
      break;
    }
  }
  if (labels) {
    std::string grid_text;
    for (std::size_t r = 0; r < grid.rows(); ++r) {
      for (std::size_t col = 0; col < grid.cols(); ++col) grid_text.push_back(label_char(grid.label(r, col)));
      grid_text.push_back('\n');
    }
    text += grid_text;
  }
  emit(g, text);
  return 0;
}

// ---- attn ----------------------------------------------------------------

struct AttnArgs {
  std::size_t batch = 1, heads = 2, dim = 16;
  std::string dtype = "f64";
  std::string engine = "sparse";
  std::string q_path, k_path, v_path;
  bool rpb = false;
  bool backward = false;
  bool check = false;
};

template <typename T>
Tensor4<T> load_or_random(const std::string& path, const Shape4& shape, std::mt19937_64& rng) {
  if (path.empty()) return random_tensor<T>(shape, rng);
  Tensor4<T> t = from_file<T>(load_tensor(path));
  if (!(t.shape() == shape)) {
    throw ValidationError("tensor '" + path + "' does not have shape [" + std::to_string(shape.batch) + "," +
                          std::to_string(shape.heads) + "," + std::to_string(shape.tokens) + "," +
                          std::to_string(shape.dim) + "]");
  }
  return t;
}

template <typename T>
int run_attn_typed(const Globals& g, const CaseSpec& c, const AttnArgs& a) {
  const Pattern pattern(c.pattern);
  const Shape4 shape{a.batch, a.heads, pattern.tokens(), a.dim};
  std::mt19937_64 rng(g.seed);
  auto t = AttnTensors<T>::make(load_or_random<T>(a.q_path, shape, rng), load_or_random<T>(a.k_path, shape, rng),
                                load_or_random<T>(a.v_path, shape, rng));
  ScoreMod mod = ScoreMod::none();
  if (a.rpb) {
    const std::size_t size = a.heads * (2 * c.pattern.shape.height - 1) * (2 * c.pattern.shape.width - 1);
    std::vector<double> table(size);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    for (auto& x : table) x = unit(rng);
    mod = ScoreMod::global_rpb(pattern.mapping_ptr(), a.heads, std::move(table));
  }
  const ExecOptions opts{g.threads};
  const std::string engine = a.check ? "both" : a.engine;
  if (engine != "sparse" && engine != "dense" && engine != "both") {
    throw ValidationError("engine must be sparse, dense or both");
  }
  const bool want_sparse = engine != "dense";
  const bool want_dense = engine != "sparse";
  using Clock = std::chrono::steady_clock;
  auto ms_since = [](Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };

  std::ostringstream log;
  Tensor4<T> out;
  std::optional<BlockGrid> grid;
  if (want_sparse) {
    grid = classify(pattern, c.blocks, {ClassifyMethod::Intervals, g.threads});
    const auto t0 = Clock::now();
    auto r = sparse_forward(t, *grid, pattern, mod, opts);
    log << "sparse forward " << ms_since(t0) << " ms\n";
    log << "sparse: blocks_visited=" << r.stats.blocks_visited << " (R=" << grid->nonempty()
        << ") block_visits=" << r.stats.block_visits << " empty_blocks_visited=" << r.stats.empty_blocks_visited
        << " pairs=" << r.stats.pairs_evaluated << " masked_checks=" << r.stats.elementwise_masks_applied << "\n";
    out = std::move(r.out);
  }
  std::optional<MaskMatrix> mask;
  if (want_dense) {
    mask = materialize_mask(pattern);
    const auto t0 = Clock::now();
    auto d = dense_forward(t, *mask, mod, opts);
    log << "dense forward " << ms_since(t0) << " ms\n";
    if (want_sparse) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "max |dense - sparse| = %.3e\n", max_abs_diff(d, out));
      log << buf;
    } else {
      out = std::move(d);
    }
  }
  if (a.backward) {
    std::mt19937_64 grad_rng(g.seed ^ 0x9e3779b97f4a7c15ull);
    const Tensor4<T> grad_out = random_tensor<T>(shape, grad_rng);
    std::optional<AttnGrads<T>> gs, gd;
    if (want_sparse) gs = sparse_backward(t, *grid, pattern, mod, grad_out, opts);
    if (want_dense) gd = dense_backward(t, *mask, mod, grad_out, opts);
    if (gs && gd) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "backward max diff: dq %.3e dk %.3e dv %.3e\n", max_abs_diff(gs->dq, gd->dq),
                    max_abs_diff(gs->dk, gd->dk), max_abs_diff(gs->dv, gd->dv));
      log << buf;
    } else {
      log << "backward: computed " << (gs ? "sparse" : "dense") << " gradients\n";
    }
  }
  std::cerr << log.str();
  if (!g.out.empty()) {
    std::ostringstream bytes(std::ios::binary);
    write_tensor(bytes, to_file(out));
    emit(g, bytes.str());
  }
  return 0;
}

int run_attn(const Globals& g, const PatternOptions& po, const AttnArgs& given) {
  const CaseSpec c = po.build();
  AttnArgs a = given;
  // A query file fixes batch, heads, head_dim and dtype; k and v must agree.
  if (!a.q_path.empty()) {
    const TensorFile q = load_tensor(a.q_path);
    if (q.dims.size() != 4) throw ValidationError("tensor '" + a.q_path + "' is not rank 4");
    a.batch = q.dims[0];
    a.heads = q.dims[1];
    a.dim = q.dims[3];
    a.dtype = q.dtype() == DType::F32 ? "f32" : "f64";
  }
  if (a.batch == 0 || a.heads == 0 || a.dim == 0) throw ValidationError("batch, heads and dim must be >= 1");
  if (a.dtype == "f64") return run_attn_typed<double>(g, c, a);
  if (a.dtype == "f32") return run_attn_typed<float>(g, c, a);
  throw ValidationError("dtype must be f32 or f64");
}

// ---- cost ----------------------------------------------------------------

int run_cost(const Globals& g, const PatternOptions& po, const CostParams& params, std::size_t replicas,
             const std::string& versus) {
  const CaseSpec c = po.build();
  const Pattern pattern(c.pattern);
  const BlockGrid grid = classify(pattern, c.blocks, {ClassifyMethod::Intervals, g.threads});
  std::map<std::size_t, std::size_t> histogram;
  for (std::size_t i = 0; i < grid.cta_rows(); ++i) ++histogram[grid.row_nonempty(i)];

  std::ostringstream out;
  char buf[160];
  out << "pattern    " << c.pattern.describe() << "\n"
      << "ctas (M)   " << grid.cta_rows() * replicas << "\n"
      << "tiles (R)  " << grid.nonempty() * replicas << "\n";
  std::snprintf(buf, sizeof buf, "time       %.6g s (alpha=%g beta=%g p_eff=%g)\n",
                estimate_time(grid, params, replicas), params.alpha, params.beta, params.p_eff);
  out << buf << "tiles per row:\n";
  for (const auto& [r, count] : histogram) out << "  r=" << r << "  rows=" << count << "\n";
  if (!versus.empty()) {
    FieldMap fields;
    for (const auto& [key, value] : po.values) {
      if (!value.empty()) fields[key] = value;
    }
    fields["pattern"] = versus;
    const CaseSpec other = case_from_fields("versus", fields);
    const BlockGrid base = classify(Pattern(other.pattern), other.blocks, {ClassifyMethod::Intervals, g.threads});
    std::snprintf(buf, sizeof buf, "speedup    %.6g x over %s\n", predicted_speedup(base, grid, params),
                  other.pattern.describe().c_str());
    out << buf;
  }
  emit(g, out.str());
  return 0;
}

int run_calibrate(const Globals& g, const std::string& samples_path, double p_eff) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(slurp(samples_path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("cannot parse samples: " + std::string(e.what()));
  }
  const nlohmann::json& list = doc.is_array() ? doc : doc.at("samples");
  if (doc.is_object() && doc.contains("p_eff")) p_eff = doc.at("p_eff").get<double>();
  std::vector<CostSample> samples;
  for (const auto& s : list) {
    if (s.contains("case")) {
      FieldMap fields;
      for (const auto& [k, v] : s.at("case").items()) fields[k] = v.is_string() ? v.get<std::string>() : v.dump();
      const CaseSpec c = case_from_fields("sample", fields);
      const BlockGrid grid = classify(Pattern(c.pattern), c.blocks, {ClassifyMethod::Intervals, g.threads});
      samples.push_back(CostSample::from_grid(grid, s.at("seconds").get<double>(), s.value("replicas", std::size_t{1})));
    } else {
      samples.push_back({s.at("ctas").get<double>(), s.at("nonempty").get<double>(), s.at("seconds").get<double>()});
    }
  }
  const Calibration cal = calibrate(samples, p_eff);
  nlohmann::json result = {{"alpha", cal.params.alpha},
                           {"beta", cal.params.beta},
                           {"p_eff", cal.params.p_eff},
                           {"rms_residual", cal.rms_residual},
                           {"residuals", cal.residuals}};
  emit(g, result.dump(2) + "\n");
  return 0;
}

// ---- sweep ---------------------------------------------------------------

int run_sweep_cmd(const Globals& g, const std::string& config_path, bool verify, bool timing, bool seed_given,
                  const std::string& format) {
  const SweepConfig config = load_sweep_config(resolve_config(config_path));
  SweepOptions opts;
  opts.threads = g.threads;
  if (timing) opts.timing = true;
  if (seed_given) opts.seed = g.seed;
  const auto rows = run_sweep(config, opts);

  const ReportFormat fmt = format.empty() ? config.format : parse_report_format(format);
  switch (fmt) {
    case ReportFormat::Json: emit(g, report_to_json(rows)); break;
    case ReportFormat::Csv: emit(g, report_to_csv(rows)); break;
    case ReportFormat::Table: emit(g, report_to_table(rows)); break;
  }
  for (const auto& r : rows) {
    if (r.error) std::cerr << "error: " << *r.error << "\n";
    if (r.verdict == Verdict::Flagged) {
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "warning: %s: padded grid, empty-tile ratio %.2f%% vs reference %.2f%%; area-normalised %.2f%% "
                    "matches\n",
                    r.id.c_str(), 100 * r.sparsity->empty_ratio, *r.reference_percent,
                    100 * r.sparsity->kernel_sparsity);
      std::cerr << buf;
    }
    if (r.verdict == Verdict::Mismatch) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "mismatch: %s: got %.2f%%, reference %.2f%% (%s)\n", r.id.c_str(),
                    100 * r.sparsity->empty_ratio, *r.reference_percent, r.source.c_str());
      std::cerr << buf;
    }
  }
  if (!verify) return rows.empty() || std::none_of(rows.begin(), rows.end(), [](const ReportRow& r) {
                        return r.error.has_value();
                      })
                          ? 0
                          : 1;
  const int code = verify_exit_code(rows);
  std::size_t matched = 0, flagged = 0, mismatched = 0;
  for (const auto& r : rows) {
    matched += r.verdict == Verdict::Match;
    flagged += r.verdict == Verdict::Flagged;
    mismatched += r.verdict == Verdict::Mismatch;
  }
  std::cerr << "verify: " << matched << " matched, " << flagged << " flagged, " << mismatched << " mismatched, "
            << std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return r.error.has_value(); })
            << " invalid\n";
  return code;
}

// ---- render --------------------------------------------------------------

int run_render(const Globals& g, const std::string& what, const PatternOptions& po, const std::string& format,
               const std::string& order, std::uint32_t height, std::uint32_t width, RenderOptions ro) {
  const ImageFormat fmt = parse_image_format(format);
  if (what == "curve") {
    const GridShape shape{height, width};
    shape.validate();
    emit(g, render_curve(*cached_mapping(shape, parse_ordering(order)), fmt, ro));
    return 0;
  }
  const CaseSpec c = po.build();
  const Pattern pattern(c.pattern);
  if (what == "mask") {
    emit(g, render_mask(materialize_mask(pattern, ro.cap), fmt, ro));
  } else if (what == "grid") {
    emit(g, render_grid(classify(pattern, c.blocks, {ClassifyMethod::Intervals, g.threads}), fmt, ro));
  } else {
    throw ValidationError("render target must be curve, mask or grid");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hatk: block-sparse local attention toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "seed for random inputs and timing runs");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--out", g.out, "output file (default: stdout)");

  std::function<int()> action;

  // curve
  auto* curve = app.add_subcommand("curve", "print the cell visiting order of a grid curve");
  std::uint32_t c_height = 0, c_width = 0;
  std::string c_kind = "hilbert", c_format = "json", c_svg;
  curve->add_option("--height", c_height, "grid height")->required();
  curve->add_option("--width", c_width, "grid width")->required();
  curve->add_option("--kind,--order", c_kind, "hilbert or rowmajor");
  curve->add_option("--format", c_format, "json, csv or grid (sequence index per cell)");
  curve->add_option("--svg", c_svg, "also write the path as an SVG polyline");
  curve->callback([&] { action = [&] { return run_curve(g, c_height, c_width, c_kind, c_format, c_svg); }; });

  // mask
  auto* mask = app.add_subcommand("mask", "materialise the dense token mask of a pattern");
  PatternOptions m_po;
  m_po.attach(mask);
  std::string m_format = "pgm";
  std::size_t m_cap = kDefaultDenseCap;
  mask->add_option("--format", m_format, "pgm (white = allowed), json (row-sum summary), text or tensor");
  mask->add_option("--cap", m_cap, "largest N that may be materialised");
  mask->callback([&] { action = [&] { return run_mask(g, m_po, m_format, m_cap); }; });

  // report
  auto* report = app.add_subcommand("report", "classify tiles and report block sparsity");
  PatternOptions r_po;
  r_po.attach(report);
  std::string r_format = "table", r_method = "intervals", r_sweep;
  bool r_labels = false;
  report->add_option("--format", r_format, "table, json or csv");
  report->add_option("--method", r_method, "intervals or predicate");
  report->add_flag("--labels", r_labels, "also print the tile grid (# full, + partial, . empty)");
  report->add_option("--sweep", r_sweep, "report every case of a sweep config next to its reference value");
  report->callback([&] {
    action = [&] {
      if (!r_sweep.empty()) {
        return run_sweep_cmd(g, r_sweep, false, false, app.count("--seed") > 0, r_format == "table" ? "" : r_format);
      }
      return run_report(g, r_po, r_format, r_labels, r_method);
    };
  });

  // attn
  auto* attn = app.add_subcommand("attn", "run the attention engines on random or given tensors");
  PatternOptions a_po;
  a_po.attach(attn);
  AttnArgs a_args;
  attn->add_option("--batch", a_args.batch);
  attn->add_option("--heads", a_args.heads);
  attn->add_option("--dim", a_args.dim);
  attn->add_option("--dtype", a_args.dtype, "f32 or f64");
  attn->add_option("--engine", a_args.engine, "sparse, dense or both");
  attn->add_flag("--check", a_args.check, "run both engines and report their maximum deviation");
  attn->add_option("--q", a_args.q_path, "query tensor file (sets batch, heads, dim and dtype)");
  attn->add_option("--k", a_args.k_path, "key tensor file");
  attn->add_option("--v", a_args.v_path, "value tensor file");
  attn->add_flag("--rpb", a_args.rpb, "add a random global relative position bias");
  attn->add_flag("--backward", a_args.backward, "also run the backward pass");
  attn->callback([&] { action = [&] { return run_attn(g, a_po, a_args); }; });

  // cost
  auto* cost = app.add_subcommand("cost", "predict runtime from the tile grid");
  PatternOptions k_po;
  k_po.attach(cost);
  CostParams k_params;
  std::size_t k_replicas = 1;
  std::string k_versus;
  cost->add_option("--alpha", k_params.alpha, "seconds per CTA");
  cost->add_option("--beta", k_params.beta, "seconds per non-empty tile");
  cost->add_option("--peff", k_params.p_eff, "effective parallelism");
  cost->add_option("--replicas", k_replicas, "independent (batch x head) slices");
  cost->add_option("--versus", k_versus, "pattern kind to compare against on the same grid");
  auto* calib = cost->add_subcommand("calibrate", "fit alpha and beta from timing samples");
  std::string k_samples;
  double k_peff = 1.0;
  calib->add_option("--samples", k_samples, "JSON file of samples")->required();
  calib->add_option("--peff", k_peff, "effective parallelism held fixed during the fit");
  calib->callback([&] { action = [&] { return run_calibrate(g, k_samples, k_peff); }; });
  cost->callback([&] {
    if (!action) action = [&] { return run_cost(g, k_po, k_params, k_replicas, k_versus); };
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run every case of a sweep config");
  std::string s_config, s_format;
  bool s_verify = false, s_timing = false;
  sweep->add_option("config", s_config, "config file (bare names also resolve against the bundled data)")->required();
  sweep->add_flag("--verify", s_verify, "exit 2 if any sparsity differs from its reference");
  sweep->add_flag("--timing", s_timing, "time every case (reshape, projection, attention)");
  sweep->add_option("--format", s_format, "table, json or csv (default from config)");
  sweep->callback([&] {
    action = [&] { return run_sweep_cmd(g, s_config, s_verify, s_timing, app.count("--seed") > 0, s_format); };
  });

  // render
  auto* render = app.add_subcommand("render", "render a curve, mask or tile grid as SVG or PGM");
  PatternOptions v_po;
  v_po.attach(render);
  std::string v_what, v_format = "svg", v_order = "hilbert";
  std::uint32_t v_height = 0, v_width = 0;
  RenderOptions v_opts;
  render->add_option("what", v_what, "curve, mask or grid")->required();
  render->add_option("--format", v_format, "svg or pgm");
  render->add_option("--order", v_order, "curve ordering (curve only)");
  render->add_option("--grid-height", v_height, "curve grid height (curve only)");
  render->add_option("--grid-width", v_width, "curve grid width (curve only)");
  render->add_option("--cell-px", v_opts.cell_px, "pixels per cell");
  render->add_option("--cap", v_opts.cap, "largest side, in cells, that may be rendered");
  render->callback([&] {
    action = [&] { return run_render(g, v_what, v_po, v_format, v_order, v_height, v_width, v_opts); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return action ? action() : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
