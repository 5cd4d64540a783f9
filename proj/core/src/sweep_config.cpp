#include "hatk/sweep_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "hatk/error.hpp"

namespace hatk {

namespace {

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ValidationError(what + ": expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

std::uint32_t parse_u32(const std::string& text, const std::string& what) {
  const auto v = parse_uint(text, what);
  if (v > 0xffffffffull) throw ValidationError(what + ": value too large");
  return static_cast<std::uint32_t>(v);
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what + ": expected a number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "on" || text == "true" || text == "yes" || text == "1") return true;
  if (text == "off" || text == "false" || text == "no" || text == "0") return false;
  throw ValidationError(what + ": expected on/off, got '" + text + "'");
}

const std::set<std::string>& known_fields() {
  static const std::set<std::string> keys = {
      "pattern", "height", "width", "size",  "window", "kernel", "radius",  "shift", "block",
      "dtype",   "repeats", "iterations", "timing", "batch", "heads", "dim", "expect", "source"};
  return keys;
}

}  // namespace

Extent2D parse_pair(const std::string& text, const std::string& what) {
  const auto sep = text.find_first_of(",x");
  const Extent2D e = sep == std::string::npos
                         ? Extent2D{parse_u32(text, what), parse_u32(text, what)}
                         : Extent2D{parse_u32(text.substr(0, sep), what), parse_u32(text.substr(sep + 1), what)};
  if (e.rows == 0 || e.cols == 0) throw ValidationError(what + ": values must be >= 1, got '" + text + "'");
  return e;
}

CaseSpec case_from_fields(const std::string& id, const FieldMap& fields) {
  for (const auto& [key, value] : fields) {
    if (!known_fields().contains(key)) throw ValidationError("unknown field '" + key + "'");
  }
  auto get = [&fields](const char* key) -> const std::string* {
    auto it = fields.find(key);
    return it == fields.end() ? nullptr : &it->second;
  };

  CaseSpec c;
  c.id = id;
  const std::string* kind_text = get("pattern");
  if (kind_text == nullptr) throw ValidationError("missing field 'pattern'");
  const PatternKind kind = parse_pattern_kind(*kind_text);

  GridShape shape;
  if (const auto* size = get("size")) {
    const Extent2D e = parse_pair(*size, "size");
    shape = {e.rows, e.cols};
  }
  if (const auto* h = get("height")) shape.height = parse_u32(*h, "height");
  if (const auto* w = get("width")) shape.width = parse_u32(*w, "width");
  if (get("size") == nullptr && (get("height") == nullptr || get("width") == nullptr)) {
    throw ValidationError("grid needs 'size' or both 'height' and 'width'");
  }

  switch (kind) {
    case PatternKind::WSA:
    case PatternKind::HWA:
    case PatternKind::HSWA: {
      const auto* w = get("window");
      if (w == nullptr) throw ValidationError(std::string(to_string(kind)) + " needs 'window'");
      c.pattern = PatternSpec::windowed(kind, shape, parse_pair(*w, "window"));
      if (const auto* s = get("shift")) c.pattern.shift1d = parse_u32(*s, "shift");
      break;
    }
    case PatternKind::SA:
    case PatternKind::NA2D: {
      const auto* k = get("kernel");
      if (k == nullptr) throw ValidationError(std::string(to_string(kind)) + " needs 'kernel'");
      c.pattern = PatternSpec::kernelled(kind, shape, parse_pair(*k, "kernel"));
      break;
    }
    case PatternKind::HSA:
    case PatternKind::HNA: {
      if (const auto* r = get("radius")) {
        c.pattern = PatternSpec::banded_radius(kind, shape, parse_u32(*r, "radius"));
      } else if (const auto* k = get("kernel")) {
        c.pattern = PatternSpec::banded(kind, shape, parse_pair(*k, "kernel"));
      } else {
        throw ValidationError(std::string(to_string(kind)) + " needs 'radius' or 'kernel'");
      }
      break;
    }
  }
  c.pattern.validate();

  if (const auto* b = get("block")) {
    const Extent2D e = parse_pair(*b, "block");
    c.blocks = {e.rows, e.cols};
  }
  c.blocks.validate();

  if (const auto* d = get("dtype")) {
    if (*d == "f32") {
      c.dtype = EngineDType::F32;
    } else if (*d == "f64") {
      c.dtype = EngineDType::F64;
    } else {
      throw ValidationError("dtype must be f32 or f64, got '" + *d + "'");
    }
  }
  if (const auto* r = get("repeats")) c.repeats = parse_uint(*r, "repeats");
  if (c.repeats == 0) throw ValidationError("repeats must be >= 1");
  if (const auto* it = get("iterations")) c.iterations = parse_uint(*it, "iterations");
  if (c.iterations < 2) throw ValidationError("iterations must be >= 2");
  if (const auto* t = get("timing")) c.timing = parse_bool(*t, "timing");
  if (const auto* b = get("batch")) c.batch = parse_uint(*b, "batch");
  if (const auto* h = get("heads")) c.heads = parse_uint(*h, "heads");
  if (const auto* d = get("dim")) c.dim = parse_uint(*d, "dim");
  if (c.batch == 0 || c.heads == 0 || c.dim == 0) throw ValidationError("batch, heads and dim must be >= 1");
  if (const auto* e = get("expect")) c.expect_percent = parse_double(*e, "expect");
  if (const auto* s = get("source")) c.source = *s;
  return c;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw ValidationError("unknown report format '" + name + "'");
}

namespace {

// Splits a line into whitespace-separated tokens; double quotes group.
std::vector<std::string> tokenize(const std::string& line, std::size_t line_no) {
  std::vector<std::string> tokens;
  std::string cur;
  bool in_quotes = false, have = false;
  for (char ch : line) {
    if (ch == '"') {
      in_quotes = !in_quotes;
      have = true;
    } else if (!in_quotes && std::isspace(static_cast<unsigned char>(ch))) {
      if (have) tokens.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur.push_back(ch);
      have = true;
    }
  }
  if (in_quotes) throw ValidationError("line " + std::to_string(line_no) + ": unterminated quote");
  if (have) tokens.push_back(std::move(cur));
  return tokens;
}

std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quotes = !in_quotes;
    if (line[i] == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

void parse_fields(const std::vector<std::string>& tokens, std::size_t first, std::size_t line_no,
                  FieldMap& out) {
  for (std::size_t i = first; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected key=value, got '" + tokens[i] + "'");
    }
    out[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
  }
}

}  // namespace

SweepConfig parse_sweep_config(std::istream& in) {
  SweepConfig config;
  FieldMap defaults;
  std::set<std::string> ids;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto tokens = tokenize(strip_comment(raw), line_no);
    if (tokens.empty()) continue;
    const std::string& head = tokens[0];
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (head == "case") {
      if (tokens.size() < 2 || tokens[1].find('=') != std::string::npos) {
        throw ValidationError(where + "case needs an id");
      }
      if (!ids.insert(tokens[1]).second) throw ValidationError(where + "duplicate case id '" + tokens[1] + "'");
      CaseEntry entry{tokens[1], line_no, defaults};
      parse_fields(tokens, 2, line_no, entry.fields);
      config.cases.push_back(std::move(entry));
    } else if (head == "defaults") {
      parse_fields(tokens, 1, line_no, defaults);
    } else if (head == "reset") {
      defaults.clear();
    } else if (tokens.size() == 3 && tokens[1] == "=") {
      if (head == "seed") {
        config.seed = parse_uint(tokens[2], where + "seed");
      } else if (head == "format") {
        config.format = parse_report_format(tokens[2]);
      } else {
        throw ValidationError(where + "unknown setting '" + head + "'");
      }
    } else {
      throw ValidationError(where + "cannot parse '" + raw + "'");
    }
  }
  return config;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  return parse_sweep_config(in);
}

}  // namespace hatk
