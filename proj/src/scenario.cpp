#include "invar/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "invar/comparison.hpp"
#include "invar/errors.hpp"
#include "invar/expression.hpp"
#include "invar/invariance.hpp"
#include "invar/okamura.hpp"
#include "invar/polygon.hpp"
#include "invar/report.hpp"

namespace invar {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

const char* kKinds[] = {"nagumo", "lipschitz-majorant", "okamura", "thm4",
                        "thm7",   "thm8",               "perron-tube", "polygon"};

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_number(const std::string& value, const std::string& where, int line) {
  const std::string v = trim(value);
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
    throw ScenarioError(where + ": '" + value + "' is not a finite number", line);
  }
  return x;
}

long to_integer(const std::string& value, const std::string& where, int line) {
  double x = to_number(value, where, line);
  long n = std::lround(x);
  if (static_cast<double>(n) != x) {
    throw ScenarioError(where + ": '" + value + "' is not an integer", line);
  }
  return n;
}

bool to_flag(const std::string& value, const std::string& where, int line) {
  std::string v = lower(trim(value));
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ScenarioError(where + ": '" + value + "' is not a boolean (use 0/1/true/false)", line);
}

std::vector<double> to_numbers(const std::string& value, const std::string& where, int line) {
  std::vector<double> out;
  for (const std::string& tok : split_ws(value)) out.push_back(to_number(tok, where, line));
  return out;
}

// Section entries with order, line numbers and duplicate detection.  take()
// consumes; finish() rejects whatever was not consumed so typos in key names
// surface as errors instead of silently doing nothing.
class KeyBag {
 public:
  KeyBag(std::string where, int header_line) : where_(std::move(where)), line_(header_line) {}

  void add(const std::string& key, const std::string& value, int line) {
    if (kv_.count(key) != 0) {
      throw ScenarioError(where_ + ": duplicate key '" + key + "'", line);
    }
    kv_[key] = {value, line};
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::optional<std::string> take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    last_line_ = it->second.second;
    std::string v = it->second.first;
    kv_.erase(it);
    return v;
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) throw ScenarioError(where_ + ": missing required key '" + key + "'", line_);
    return *v;
  }

  double number(const std::string& key, double fallback) {
    auto v = take(key);
    if (!v) return fallback;
    return to_number(*v, where_ + " key '" + key + "'", last_line_);
  }

  double require_number(const std::string& key) {
    std::string v = require(key);
    return to_number(v, where_ + " key '" + key + "'", last_line_);
  }

  long integer(const std::string& key, long fallback) {
    auto v = take(key);
    if (!v) return fallback;
    return to_integer(*v, where_ + " key '" + key + "'", last_line_);
  }

  bool flag(const std::string& key, bool fallback) {
    auto v = take(key);
    if (!v) return fallback;
    return to_flag(*v, where_ + " key '" + key + "'", last_line_);
  }

  std::vector<double> require_numbers(const std::string& key) {
    std::string v = require(key);
    return to_numbers(v, where_ + " key '" + key + "'", last_line_);
  }

  // Line of the key consumed by the most recent take/require.
  int last_line() const { return last_line_; }
  int header_line() const { return line_; }
  const std::string& where() const { return where_; }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : kv_) out.push_back(k);
    return out;
  }

  void finish() {
    if (kv_.empty()) return;
    const auto& [key, entry] = *kv_.begin();
    throw ScenarioError(where_ + ": unknown key '" + key + "'", entry.second);
  }

 private:
  std::string where_;
  int line_ = 0;
  int last_line_ = 0;
  std::map<std::string, std::pair<std::string, int>> kv_;
};

struct RawSection {
  std::string type;
  std::string name;
  int line = 0;
  std::vector<std::tuple<std::string, std::string, int>> entries;
};

Expression parse_keyed_expression(const std::string& source, int dimension, const KeyBag& bag,
                                  const std::string& key, int line) {
  try {
    return parse_expression(source, dimension);
  } catch (const ParseError& e) {
    throw ScenarioError(bag.where() + " key '" + key + "': " + e.what(), line);
  }
}

Expression parse_keyed_rhs(const std::string& source, const KeyBag& bag, const std::string& key,
                           int line) {
  try {
    return parse_scalar_rhs(source);
  } catch (const ParseError& e) {
    throw ScenarioError(bag.where() + " key '" + key + "': " + e.what(), line);
  }
}

TimedPoint to_point(const std::vector<double>& v, int dimension, const std::string& where,
                    int line) {
  if (static_cast<int>(v.size()) != dimension + 1) {
    throw ScenarioError(where + ": expected " + std::to_string(dimension + 1) +
                            " numbers (t then x), got " + std::to_string(v.size()),
                        line);
  }
  return TimedPoint{v[0], Vec(v.begin() + 1, v.end())};
}

// ---------------------------------------------------------------------------
// Per-kind parameter builders.  Called once during parsing for validation and
// once more by the runner, so every diagnostic lands before anything runs.

struct NagumoParams {
  const ImplicitSet* set = nullptr;
  int t_samples = 5;
  int boundary_samples = 20;
  double margin = kDefaultMargin;
};

struct LipschitzParams {
  const SampledSet* set = nullptr;
  LipschitzOptions options;
};

struct OkamuraParams {
  int nt = 16;
  int nx = 33;
  TimedPoint p;
  TimedPoint q;
};

struct CompareParams {
  ComparisonProblem problem;
  int samples = 0;
};

struct PerronParams {
  const Tube* tube = nullptr;
  double x0 = 0.0;
  double step = 1e-3;
};

struct PolygonParams {
  const ImplicitSet* set = nullptr;
  Vec x0;
  double t0 = 0.0;
  double horizon = 1.0;
  std::vector<int> schedule;
};

const ImplicitSet* find_set(const Scenario& scn, const std::string& name, const KeyBag& bag,
                            int line) {
  auto it = scn.sets.find(name);
  if (it == scn.sets.end()) {
    throw ScenarioError(bag.where() + ": no [set " + name + "] in this scenario", line);
  }
  return &it->second;
}

NagumoParams build_nagumo(const Scenario& scn, KeyBag& bag) {
  NagumoParams p;
  std::string name = bag.require("set");
  p.set = find_set(scn, name, bag, bag.last_line());
  p.t_samples = static_cast<int>(bag.integer("t_samples", 5));
  p.boundary_samples = static_cast<int>(bag.integer("boundary_samples", 20));
  p.margin = bag.number("margin", kDefaultMargin);
  if (p.t_samples < 1 || p.boundary_samples < 1) {
    throw ScenarioError(bag.where() + ": t_samples and boundary_samples must be >= 1",
                        bag.header_line());
  }
  return p;
}

LipschitzParams build_lipschitz(const Scenario& scn, KeyBag& bag) {
  LipschitzParams p;
  std::string name = bag.require("set");
  auto it = scn.sampled.find(name);
  if (it == scn.sampled.end()) {
    throw ScenarioError(bag.where() + ": no [sampled " + name + "] in this scenario",
                        bag.last_line());
  }
  p.set = &it->second;
  if (auto k = bag.take("K")) {
    p.options.K = to_number(*k, bag.where() + " key 'K'", bag.last_line());
  }
  p.options.trials = static_cast<int>(bag.integer("trials", 20));
  p.options.horizon = bag.number("horizon", 1.0);
  p.options.perturb = bag.number("perturb", 1e-3);
  if (p.options.trials < 1 || p.options.horizon <= 0.0) {
    throw ScenarioError(bag.where() + ": trials must be >= 1 and horizon > 0",
                        bag.header_line());
  }
  return p;
}

OkamuraParams build_okamura(const Scenario& scn, KeyBag& bag) {
  OkamuraParams p;
  const int dim = scn.field.dimension;
  if (dim > 2) {
    throw ScenarioError(bag.where() + ": chain distances need a field of dimension 1 or 2",
                        bag.header_line());
  }
  p.nt = static_cast<int>(bag.integer("nt", 16));
  p.nx = static_cast<int>(bag.integer("nx", 33));
  if (p.nt < 2 || p.nx < 3) {
    throw ScenarioError(bag.where() + ": nt must be >= 2 and nx >= 3", bag.header_line());
  }
  p.p = to_point(bag.require_numbers("p"), dim, bag.where() + " key 'p'", bag.last_line());
  int p_line = bag.last_line();
  p.q = to_point(bag.require_numbers("q"), dim, bag.where() + " key 'q'", bag.last_line());
  const Window& w = scn.field.window;
  if (!w.contains(p.p.t, p.p.x)) {
    throw ScenarioError(bag.where() + " key 'p': point is outside the field window", p_line);
  }
  if (!w.contains(p.q.t, p.q.x)) {
    throw ScenarioError(bag.where() + " key 'q': point is outside the field window",
                        bag.last_line());
  }
  if (p.p.t > p.q.t) {
    throw ScenarioError(bag.where() + ": p must not come after q in time", bag.header_line());
  }
  return p;
}

CompareParams build_compare(const Scenario& scn, KeyBag& bag, ComparisonMode mode) {
  CompareParams p;
  p.problem.field = scn.field;
  p.problem.mode = mode;
  const int dim = scn.field.dimension;

  std::string s_src = bag.require("S");
  int s_line = bag.last_line();
  bool builtin = false;
  if (trim(s_src) == "norm") {
    p.problem.S = builtin_norm(dim);
    builtin = true;
  } else if (trim(s_src) == "max") {
    p.problem.S = builtin_max(dim);
    builtin = true;
  } else {
    p.problem.S = parse_keyed_expression(s_src, dim, bag, "S", s_line);
  }
  p.problem.kamke = bag.flag("kamke", builtin);

  if (mode == ComparisonMode::thm4) {
    std::string f_src = bag.take("F").value_or("0");
    p.problem.F = parse_keyed_rhs(f_src, bag, "F", bag.last_line());
  } else {
    std::string f_src = bag.require("F");
    p.problem.F = parse_keyed_rhs(f_src, bag, "F", bag.last_line());
  }
  std::string w_src = bag.require("omega");
  p.problem.omega = parse_keyed_expression(w_src, 0, bag, "omega", bag.last_line());

  const Window& w = scn.field.window;
  p.problem.a = bag.number("a", w.t_begin);
  p.problem.b = bag.number("b", w.t_end);
  if (!(p.problem.a < p.problem.b) || p.problem.a < w.t_begin - 1e-12 ||
      p.problem.b > w.t_end + 1e-12) {
    throw ScenarioError(bag.where() + ": need window.t_begin <= a < b <= window.t_end",
                        bag.header_line());
  }
  p.samples = static_cast<int>(
      bag.integer(mode == ComparisonMode::thm4 ? "surface_samples" : "domain_samples",
                  mode == ComparisonMode::thm4 ? 32 : 256));
  if (p.samples < 1) {
    throw ScenarioError(bag.where() + ": the sample count must be >= 1", bag.header_line());
  }
  return p;
}

PerronParams build_perron(const Scenario& scn, KeyBag& bag) {
  PerronParams p;
  if (scn.field.dimension != 1) {
    throw ScenarioError(bag.where() + ": tube solving needs a one-dimensional field",
                        bag.header_line());
  }
  std::string name = bag.require("tube");
  auto it = scn.tubes.find(name);
  if (it == scn.tubes.end()) {
    throw ScenarioError(bag.where() + ": no [tube " + name + "] in this scenario",
                        bag.last_line());
  }
  p.tube = &it->second;
  p.x0 = bag.require_number("x0");
  p.step = bag.number("step", 1e-3);
  if (!(p.step > 0.0)) {
    throw ScenarioError(bag.where() + ": step must be > 0", bag.header_line());
  }
  return p;
}

PolygonParams build_polygon_params(const Scenario& scn, KeyBag& bag) {
  PolygonParams p;
  std::string name = bag.require("set");
  p.set = find_set(scn, name, bag, bag.last_line());
  std::vector<double> x0 = bag.require_numbers("x0");
  if (static_cast<int>(x0.size()) != scn.field.dimension) {
    throw ScenarioError(bag.where() + " key 'x0': expected " +
                            std::to_string(scn.field.dimension) + " numbers",
                        bag.last_line());
  }
  p.x0 = x0;
  p.t0 = bag.number("t0", scn.field.window.t_begin);
  p.horizon = bag.number("horizon", 1.0);
  std::vector<double> sched =
      bag.has("schedule") ? bag.require_numbers("schedule") : std::vector<double>{10, 40, 160};
  for (double v : sched) {
    long n = std::lround(v);
    if (static_cast<double>(n) != v || n < 1) {
      throw ScenarioError(bag.where() + " key 'schedule': entries must be positive integers",
                          bag.last_line());
    }
    p.schedule.push_back(static_cast<int>(n));
  }
  if (p.schedule.size() < 2) {
    throw ScenarioError(bag.where() + ": the schedule needs at least two vertex counts",
                        bag.header_line());
  }
  if (!(p.horizon > 0.0)) {
    throw ScenarioError(bag.where() + ": horizon must be > 0", bag.header_line());
  }
  return p;
}

// Common tail keys every check accepts.
struct CommonKeys {
  std::uint64_t seed = 0;
  std::string expect;  // empty = no expectation
};

CommonKeys take_common(KeyBag& bag, const Scenario& scn) {
  CommonKeys c;
  c.seed = scn.seed;
  if (auto s = bag.take("seed")) {
    c.seed = static_cast<std::uint64_t>(
        to_integer(*s, bag.where() + " key 'seed'", bag.last_line()));
  }
  if (auto e = bag.take("expect")) {
    std::string v = lower(trim(*e));
    if (v != "pass" && v != "marginal" && v != "fail" && v != "error") {
      throw ScenarioError(bag.where() +
                              " key 'expect': must be pass, marginal, fail or error",
                          bag.last_line());
    }
    c.expect = v;
  }
  return c;
}

void validate_check(const Scenario& scn, const CheckSpec& spec) {
  KeyBag bag("[check " + spec.kind + "]", spec.line);
  for (const auto& [key, value] : spec.keys) {
    bag.add(key, value, spec.line);
  }
  take_common(bag, scn);
  if (spec.kind == "nagumo") {
    build_nagumo(scn, bag);
  } else if (spec.kind == "lipschitz-majorant") {
    build_lipschitz(scn, bag);
  } else if (spec.kind == "okamura") {
    build_okamura(scn, bag);
  } else if (spec.kind == "thm4") {
    build_compare(scn, bag, ComparisonMode::thm4);
  } else if (spec.kind == "thm7") {
    build_compare(scn, bag, ComparisonMode::thm7);
  } else if (spec.kind == "thm8") {
    build_compare(scn, bag, ComparisonMode::thm8);
  } else if (spec.kind == "perron-tube") {
    build_perron(scn, bag);
  } else if (spec.kind == "polygon") {
    build_polygon_params(scn, bag);
  }
  bag.finish();
}

// ---------------------------------------------------------------------------
// SVG scatter / line plots, small and dependency-free.

constexpr const char* kColorPass = "#2e8b57";
constexpr const char* kColorMarginal = "#d7881d";
constexpr const char* kColorFail = "#c33b3b";
constexpr const char* kColorCurve = "#2b5f9e";
constexpr const char* kColorGray = "#9a9a9a";

class SvgPlot {
 public:
  void line(double x1, double y1, double x2, double y2, const char* color, double width) {
    lines_.push_back({x1, y1, x2, y2, color, width});
    grow(x1, y1);
    grow(x2, y2);
  }

  void dot(double x, double y, const char* color) {
    dots_.push_back({x, y, color});
    grow(x, y);
  }

  bool empty() const { return lines_.empty() && dots_.empty(); }

  std::string render(const std::string& title) const {
    const double W = 640.0, H = 400.0, pad = 46.0;
    double xlo = xmin_, xhi = xmax_, ylo = ymin_, yhi = ymax_;
    if (!(xhi > xlo)) {
      xlo -= 1.0;
      xhi += 1.0;
    }
    if (!(yhi > ylo)) {
      ylo -= 1.0;
      yhi += 1.0;
    }
    auto sx = [&](double x) { return pad + (x - xlo) / (xhi - xlo) * (W - 2 * pad); };
    auto sy = [&](double y) { return H - pad - (y - ylo) / (yhi - ylo) * (H - 2 * pad); };
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W) << "\" height=\""
        << fmt(H) << "\" viewBox=\"0 0 " << fmt(W) << " " << fmt(H) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out << "<rect x=\"" << fmt(pad) << "\" y=\"" << fmt(pad) << "\" width=\"" << fmt(W - 2 * pad)
        << "\" height=\"" << fmt(H - 2 * pad)
        << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(pad) << "\" y=\"" << fmt(pad - 14.0)
        << "\" font-family=\"monospace\" font-size=\"13\">" << title << "</text>\n";
    out << "<text x=\"" << fmt(pad) << "\" y=\"" << fmt(H - pad + 16.0)
        << "\" font-family=\"monospace\" font-size=\"10\">" << fmt(xlo) << "</text>\n";
    out << "<text x=\"" << fmt(W - pad) << "\" y=\"" << fmt(H - pad + 16.0)
        << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">" << fmt(xhi)
        << "</text>\n";
    out << "<text x=\"" << fmt(pad - 4.0) << "\" y=\"" << fmt(H - pad)
        << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">" << fmt(ylo)
        << "</text>\n";
    out << "<text x=\"" << fmt(pad - 4.0) << "\" y=\"" << fmt(pad + 4.0)
        << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">" << fmt(yhi)
        << "</text>\n";
    for (const auto& l : lines_) {
      out << "<line x1=\"" << fmt(sx(l.x1)) << "\" y1=\"" << fmt(sy(l.y1)) << "\" x2=\""
          << fmt(sx(l.x2)) << "\" y2=\"" << fmt(sy(l.y2)) << "\" stroke=\"" << l.color
          << "\" stroke-width=\"" << fmt(l.width) << "\"/>\n";
    }
    for (const auto& d : dots_) {
      out << "<circle cx=\"" << fmt(sx(d.x)) << "\" cy=\"" << fmt(sy(d.y))
          << "\" r=\"3\" fill=\"" << d.color << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
  }

 private:
  struct Line {
    double x1, y1, x2, y2;
    const char* color;
    double width;
  };
  struct Dot {
    double x, y;
    const char* color;
  };

  void grow(double x, double y) {
    xmin_ = std::min(xmin_, x);
    xmax_ = std::max(xmax_, x);
    ymin_ = std::min(ymin_, y);
    ymax_ = std::max(ymax_, y);
  }

  double xmin_ = 1e308, xmax_ = -1e308, ymin_ = 1e308, ymax_ = -1e308;
  std::vector<Line> lines_;
  std::vector<Dot> dots_;
};

const char* verdict_color(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return kColorPass;
    case Verdict::marginal:
      return kColorMarginal;
    case Verdict::fail:
      return kColorFail;
  }
  return kColorFail;
}

// ---------------------------------------------------------------------------
// Check execution.

struct CheckOutput {
  std::string verdict;
  std::string error_message;
  long sample_count = 0;
  std::uint64_t seed = 0;
  ordered_json details = ordered_json::object();
  std::vector<std::string> notes;
  std::string csv;
  std::string svg;
};

std::string csv_from_report(const CheckReport& report, int dimension) {
  std::ostringstream out;
  out << "label,t";
  for (int c = 0; c < dimension; ++c) out << ",x" << (c + 1);
  out << ",raw,statistic,class\n";
  for (const SampleRecord& s : report.samples) {
    out << s.label << "," << fmt(s.t);
    for (int c = 0; c < dimension; ++c) {
      out << ",";
      if (c < static_cast<int>(s.x.size())) out << fmt(s.x[c]);
    }
    out << "," << fmt(s.raw) << "," << fmt(s.statistic) << "," << to_string(s.classification)
        << "\n";
  }
  return out.str();
}

std::string svg_from_report(const CheckReport& report, int dimension, const std::string& title) {
  if (dimension > 2) return {};
  SvgPlot plot;
  for (const SampleRecord& s : report.samples) {
    if (s.x.empty()) continue;
    double px = dimension == 2 ? s.x[0] : s.t;
    double py = dimension == 2 ? s.x[1] : s.x[0];
    plot.dot(px, py, verdict_color(s.classification));
  }
  if (plot.empty()) return {};
  return plot.render(title);
}

void fill_from_report(CheckOutput& out, const CheckReport& report, int dimension,
                      const std::string& title) {
  out.verdict = to_string(report.verdict);
  out.sample_count = static_cast<long>(report.samples.size());
  out.notes = report.notes;
  double worst_stat = -1e308, worst_raw = -1e308;
  ordered_json labels = ordered_json::object();
  for (const SampleRecord& s : report.samples) {
    worst_stat = std::max(worst_stat, s.statistic);
    worst_raw = std::max(worst_raw, s.raw);
    if (!labels.contains(s.label)) {
      labels[s.label] = {{"count", 0}, {"worst_statistic", -1e308}, {"worst_raw", -1e308}};
    }
    auto& row = labels[s.label];
    row["count"] = row["count"].get<long>() + 1;
    row["worst_statistic"] = std::max(row["worst_statistic"].get<double>(), s.statistic);
    row["worst_raw"] = std::max(row["worst_raw"].get<double>(), s.raw);
  }
  out.details["margin"] = report.margin;
  if (!report.samples.empty()) {
    out.details["worst_statistic"] = worst_stat;
    out.details["worst_raw"] = worst_raw;
  }
  out.details["labels"] = labels;
  out.csv = csv_from_report(report, dimension);
  out.svg = svg_from_report(report, dimension, title);
}

CheckOutput run_nagumo(const Scenario& scn, KeyBag& bag, const CommonKeys& common) {
  NagumoParams p = build_nagumo(scn, bag);
  CheckOutput out;
  CheckReport report = nagumo_check(*p.set, scn.field, p.t_samples, p.boundary_samples,
                                    common.seed, p.margin);
  fill_from_report(out, report, scn.field.dimension, "nagumo boundary samples");
  return out;
}

CheckOutput run_lipschitz(const Scenario& scn, KeyBag& bag, const CommonKeys& common) {
  LipschitzParams p = build_lipschitz(scn, bag);
  p.options.seed = common.seed;
  CheckOutput out;
  CheckReport report = lipschitz_majorant_check(*p.set, scn.field, p.options);
  fill_from_report(out, report, scn.field.dimension, "majorant premise and certificate");
  return out;
}

CheckOutput run_okamura(const Scenario& scn, KeyBag& bag) {
  OkamuraParams p = build_okamura(scn, bag);
  CheckOutput out;
  OkamuraGrid grid = build_grid(scn.field, scn.field.window, p.nt, p.nx);
  ChainValue cv = okamura_distance(grid, p.p, p.q);
  const double dx = grid_dx(grid);
  const double gap = std::abs(cv.refinement_gap);
  out.verdict = gap <= 2.0 * dx ? "pass" : (gap <= 4.0 * dx ? "marginal" : "fail");
  out.sample_count = static_cast<long>(cv.chain.size());
  out.details["nt"] = p.nt;
  out.details["nx"] = p.nx;
  out.details["dx"] = dx;
  out.details["value"] = cv.value;
  out.details["refinement_gap"] = cv.refinement_gap;
  out.details["segments"] = cv.chain.size();
  if (out.verdict != "pass") {
    out.notes.push_back("the refined twin grid moved the value by more than 2 dx; "
                        "increase nt/nx");
  }

  std::ostringstream csv;
  const int dim = scn.field.dimension;
  csv << "t";
  for (int c = 0; c < dim; ++c) csv << ",from" << (c + 1);
  for (int c = 0; c < dim; ++c) csv << ",to" << (c + 1);
  csv << ",jump\n";
  for (const JumpSegment& seg : cv.chain) {
    csv << fmt(seg.t);
    for (int c = 0; c < dim; ++c) csv << "," << fmt(seg.from[c]);
    for (int c = 0; c < dim; ++c) csv << "," << fmt(seg.to[c]);
    csv << "," << fmt(dist2(seg.from, seg.to)) << "\n";
  }
  out.csv = csv.str();

  SvgPlot plot;
  auto coords = [&](double t, const Vec& x) {
    return dim == 2 ? std::pair<double, double>{x[0], x[1]} : std::pair<double, double>{t, x[0]};
  };
  for (std::size_t i = 0; i < cv.chain.size(); ++i) {
    auto [ax, ay] = coords(cv.chain[i].t, cv.chain[i].from);
    auto [bx, by] = coords(cv.chain[i].t, cv.chain[i].to);
    plot.line(ax, ay, bx, by, kColorFail, 1.5);
    if (i + 1 < cv.chain.size()) {
      auto [cx, cy] = coords(cv.chain[i + 1].t, cv.chain[i + 1].from);
      plot.line(bx, by, cx, cy, kColorGray, 1.0);
    }
    plot.dot(ax, ay, kColorCurve);
    plot.dot(bx, by, kColorCurve);
  }
  if (!plot.empty()) out.svg = plot.render("chain witness (jumps in red)");
  return out;
}

CheckOutput run_compare(const Scenario& scn, KeyBag& bag, const CommonKeys& common,
                        ComparisonMode mode) {
  CompareParams p = build_compare(scn, bag, mode);
  CheckOutput out;
  CheckReport report;
  switch (mode) {
    case ComparisonMode::thm4:
      report = check_theorem4(p.problem, p.samples, common.seed);
      break;
    case ComparisonMode::thm7:
      report = check_theorem7(p.problem, p.samples, common.seed);
      break;
    case ComparisonMode::thm8:
      report = check_theorem8(p.problem, p.samples, common.seed);
      break;
  }
  fill_from_report(out, report, scn.field.dimension, to_string(mode) + " samples");
  return out;
}

CheckOutput run_perron(const Scenario& scn, KeyBag& bag) {
  PerronParams p = build_perron(scn, bag);
  CheckOutput out;
  PerronResult r = perron_tube_solve(scn.field, *p.tube, p.x0, p.step);
  out.verdict = to_string(r.verdict);
  out.sample_count = static_cast<long>(r.trajectory.times.size());
  out.details["max_clip"] = r.max_clip;
  out.details["premise_verdict"] = to_string(r.premise.verdict);
  out.details["premise_samples"] = r.premise.samples.size();
  for (const std::string& n : r.premise.notes) out.notes.push_back("premise: " + n);

  std::ostringstream csv;
  csv << "t,x,omega1,omega2\n";
  SvgPlot plot;
  double prev_t = 0.0, prev_x = 0.0, prev_w1 = 0.0, prev_w2 = 0.0;
  for (std::size_t i = 0; i < r.trajectory.times.size(); ++i) {
    const double t = r.trajectory.times[i];
    const double x = r.trajectory.states[i][0];
    const double w1 = eval_at(p.tube->omega1, t);
    const double w2 = eval_at(p.tube->omega2, t);
    csv << fmt(t) << "," << fmt(x) << "," << fmt(w1) << "," << fmt(w2) << "\n";
    if (i > 0) {
      plot.line(prev_t, prev_x, t, x, kColorCurve, 1.5);
      plot.line(prev_t, prev_w1, t, w1, kColorGray, 1.0);
      plot.line(prev_t, prev_w2, t, w2, kColorGray, 1.0);
    }
    prev_t = t;
    prev_x = x;
    prev_w1 = w1;
    prev_w2 = w2;
  }
  out.csv = csv.str();
  if (!plot.empty()) out.svg = plot.render("clipped solution inside the tube");
  return out;
}

CheckOutput run_polygon(const Scenario& scn, KeyBag& bag) {
  PolygonParams p = build_polygon_params(scn, bag);
  CheckOutput out;
  PolygonLimit lim = polygon_limit(SetView(*p.set), scn.field, p.t0, p.x0, p.schedule, p.horizon);
  out.verdict = lim.stalled ? "fail" : (lim.monotone ? "pass" : "marginal");
  const PolygonRun& finest = lim.runs.back();
  out.sample_count = static_cast<long>(finest.vertices.size());
  out.details["schedule"] = p.schedule;
  out.details["sup_distances"] = lim.sup_distances;
  out.details["monotone"] = lim.monotone;
  out.details["stalled"] = lim.stalled;
  out.details["epsilon"] = finest.epsilon;
  out.details["lipschitz_cert"] = finest.lipschitz_cert;
  if (lim.stalled) {
    out.notes.push_back("a polygon stalled before the horizon: no admissible step was found");
  } else if (!lim.monotone) {
    out.notes.push_back("consecutive polygons did not contract; the limit is not certified");
  }

  std::ostringstream csv;
  const int dim = scn.field.dimension;
  csv << "t";
  for (int c = 0; c < dim; ++c) csv << ",x" << (c + 1);
  csv << "\n";
  SvgPlot plot;
  for (std::size_t i = 0; i < finest.vertices.size(); ++i) {
    const TimedPoint& v = finest.vertices[i];
    csv << fmt(v.t);
    for (int c = 0; c < dim; ++c) csv << "," << fmt(v.x[c]);
    csv << "\n";
    if (dim <= 2 && i > 0) {
      const TimedPoint& u = finest.vertices[i - 1];
      double ax = dim == 2 ? u.x[0] : u.t;
      double ay = dim == 2 ? u.x[1] : u.x[0];
      double bx = dim == 2 ? v.x[0] : v.t;
      double by = dim == 2 ? v.x[1] : v.x[0];
      plot.line(ax, ay, bx, by, kColorCurve, 1.5);
    }
  }
  out.csv = csv.str();
  if (!plot.empty()) out.svg = plot.render("finest polygon");
  return out;
}

CheckOutput run_check(const Scenario& scn, const CheckSpec& spec) {
  KeyBag bag("[check " + spec.kind + "]", spec.line);
  for (const auto& [key, value] : spec.keys) bag.add(key, value, spec.line);
  CommonKeys common = take_common(bag, scn);
  CheckOutput out;
  try {
    if (spec.kind == "nagumo") {
      out = run_nagumo(scn, bag, common);
    } else if (spec.kind == "lipschitz-majorant") {
      out = run_lipschitz(scn, bag, common);
    } else if (spec.kind == "okamura") {
      out = run_okamura(scn, bag);
    } else if (spec.kind == "thm4") {
      out = run_compare(scn, bag, common, ComparisonMode::thm4);
    } else if (spec.kind == "thm7") {
      out = run_compare(scn, bag, common, ComparisonMode::thm7);
    } else if (spec.kind == "thm8") {
      out = run_compare(scn, bag, common, ComparisonMode::thm8);
    } else if (spec.kind == "perron-tube") {
      out = run_perron(scn, bag);
    } else if (spec.kind == "polygon") {
      out = run_polygon(scn, bag);
    }
  } catch (const Error& e) {
    out = CheckOutput{};
    out.verdict = "error";
    out.error_message = e.what();
  }
  out.seed = common.seed;
  return out;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Scenario parse_scenario_text(
    const std::string& text, const std::string& name,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<RawSection> sections;
  std::vector<std::tuple<std::string, std::string, int>> top;
  RawSection* current = nullptr;

  std::istringstream in(text);
  std::string raw;
  int ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ScenarioError("section header does not end with ']'", ln);
      }
      std::string inner = trim(line.substr(1, line.size() - 2));
      std::string type = inner, sname;
      if (auto sp = inner.find_first_of(" \t"); sp != std::string::npos) {
        type = trim(inner.substr(0, sp));
        sname = trim(inner.substr(sp + 1));
      }
      if (type != "field" && type != "set" && type != "sampled" && type != "tube" &&
          type != "check") {
        throw ScenarioError("unknown section type '" + type + "'", ln);
      }
      if (type == "field" && !sname.empty()) {
        throw ScenarioError("[field] does not take a name", ln);
      }
      if (type != "field" && sname.empty()) {
        throw ScenarioError("[" + type + "] needs a name", ln);
      }
      sections.push_back(RawSection{type, sname, ln, {}});
      current = &sections.back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ScenarioError("expected 'key = value' or a [section] header", ln);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ScenarioError("empty key before '='", ln);
    if (value.empty()) throw ScenarioError("empty value for key '" + key + "'", ln);
    if (current == nullptr) {
      top.emplace_back(key, value, ln);
    } else {
      current->entries.emplace_back(key, value, ln);
    }
  }

  Scenario scn;
  scn.name = name;

  KeyBag top_bag("top level", 0);
  for (const auto& [key, value, line] : top) top_bag.add(key, value, line);
  for (const auto& [key, value] : overrides) {
    if (top_bag.has(key)) top_bag.take(key);
    top_bag.add(key, value, 0);
  }
  if (auto v = top_bag.take("name")) scn.name = *v;
  if (auto v = top_bag.take("seed")) {
    scn.seed = static_cast<std::uint64_t>(
        to_integer(*v, "top level key 'seed'", top_bag.last_line()));
  }
  if (auto v = top_bag.take("comparison")) {
    scn.comparison = to_flag(*v, "top level key 'comparison'", top_bag.last_line());
  }
  top_bag.finish();

  const RawSection* field_section = nullptr;
  for (const RawSection& s : sections) {
    if (s.type == "field") {
      if (field_section != nullptr) {
        throw ScenarioError("only one [field] section is allowed", s.line);
      }
      field_section = &s;
    }
  }
  if (field_section == nullptr) {
    throw ScenarioError("a [field] section is required", 0);
  }

  {
    KeyBag bag("[field]", field_section->line);
    for (const auto& [key, value, line] : field_section->entries) bag.add(key, value, line);
    std::vector<std::string> components;
    for (int i = 1;; ++i) {
      auto src = bag.take("f" + std::to_string(i));
      if (!src) break;
      components.push_back(*src);
    }
    const int k = static_cast<int>(components.size());
    if (k == 0) throw ScenarioError("[field]: needs at least f1", field_section->line);
    for (const std::string& key : bag.keys()) {
      if (key.size() > 1 && key[0] == 'f' &&
          std::all_of(key.begin() + 1, key.end(),
                      [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw ScenarioError("[field]: components must be f1..f" + std::to_string(k) +
                                " with no gaps ('" + key + "' breaks the sequence)",
                            field_section->line);
      }
    }
    for (int i = 0; i < k; ++i) {
      parse_keyed_expression(components[i], k, bag, "f" + std::to_string(i + 1),
                             field_section->line);
    }
    std::vector<double> w = bag.require_numbers("window");
    int w_line = bag.last_line();
    Window window;
    if (static_cast<int>(w.size()) == 4 && k != 1) {
      window = box_window(w[0], w[1], w[2], w[3], k);
    } else if (static_cast<int>(w.size()) == 2 + 2 * k) {
      window = Window{w[0], w[1], Vec(w.begin() + 2, w.begin() + 2 + k),
                      Vec(w.begin() + 2 + k, w.end())};
    } else {
      throw ScenarioError("[field] key 'window': expected 4 numbers (t0 t1 lo hi) or " +
                              std::to_string(2 + 2 * k) + " (t0 t1 lo1..lo" + std::to_string(k) +
                              " hi1..hi" + std::to_string(k) + ")",
                          w_line);
    }
    std::optional<double> M, K;
    if (bag.has("M")) M = bag.require_number("M");
    if (bag.has("K")) K = bag.require_number("K");
    bool left = false;
    if (auto d = bag.take("direction")) {
      std::string v = lower(trim(*d));
      if (v == "left") {
        left = true;
      } else if (v != "right") {
        throw ScenarioError("[field] key 'direction': must be right or left", bag.last_line());
      }
    }
    bag.finish();
    try {
      scn.field = make_field(components, window, M, K);
    } catch (const Error& e) {
      throw ScenarioError(std::string("[field]: ") + e.what(), field_section->line);
    }
    if (left) scn.field = reverse_time(scn.field);
    scn.has_field = true;
  }

  for (const RawSection& s : sections) {
    if (s.type == "field") continue;
    KeyBag bag("[" + s.type + " " + s.name + "]", s.line);
    for (const auto& [key, value, line] : s.entries) bag.add(key, value, line);
    if (s.type == "set") {
      if (scn.sets.count(s.name) != 0) {
        throw ScenarioError("duplicate [set " + s.name + "]", s.line);
      }
      std::string phi = bag.require("phi");
      int phi_line = bag.last_line();
      double alpha = bag.number("alpha", 1.0);
      bag.finish();
      try {
        scn.sets.emplace(s.name, make_implicit_set(phi, alpha, scn.field.window));
      } catch (const ParseError& e) {
        throw ScenarioError(bag.where() + " key 'phi': " + e.what(), phi_line);
      } catch (const Error& e) {
        throw ScenarioError(bag.where() + ": " + e.what(), s.line);
      }
    } else if (s.type == "sampled") {
      if (scn.sampled.count(s.name) != 0) {
        throw ScenarioError("duplicate [sampled " + s.name + "]", s.line);
      }
      double hull_M = bag.number("M", scn.field.bound_M);
      SampledSet set;
      set.hull_M = hull_M;
      if (bag.has("points")) {
        std::string pts = bag.require("points");
        int pts_line = bag.last_line();
        bag.finish();
        std::istringstream groups(pts);
        std::string group;
        while (std::getline(groups, group, ';')) {
          if (trim(group).empty()) continue;
          std::vector<double> v = to_numbers(group, bag.where() + " key 'points'", pts_line);
          set.points.push_back(
              to_point(v, scn.field.dimension, bag.where() + " key 'points'", pts_line));
        }
        if (set.points.empty()) {
          throw ScenarioError(bag.where() + " key 'points': no points given", pts_line);
        }
      } else {
        if (scn.field.dimension != 2) {
          throw ScenarioError(bag.where() + ": the disk generator needs a two-dimensional field",
                              s.line);
        }
        std::vector<double> radii = bag.require_numbers("radii");
        int angles = static_cast<int>(bag.integer("angles", 8));
        std::vector<double> times = bag.require_numbers("times");
        bag.finish();
        if (radii.empty() || times.empty() || angles < 1) {
          throw ScenarioError(bag.where() + ": radii and times must be nonempty, angles >= 1",
                              s.line);
        }
        set = sample_disk(radii, angles, times, hull_M);
      }
      scn.sampled.emplace(s.name, std::move(set));
    } else if (s.type == "tube") {
      if (scn.tubes.count(s.name) != 0) {
        throw ScenarioError("duplicate [tube " + s.name + "]", s.line);
      }
      std::string o1 = bag.require("omega1");
      int o1_line = bag.last_line();
      std::string o2 = bag.require("omega2");
      int o2_line = bag.last_line();
      double t0 = bag.number("from", scn.field.window.t_begin);
      double t1 = bag.number("to", scn.field.window.t_end);
      bag.finish();
      parse_keyed_expression(o1, 0, bag, "omega1", o1_line);
      parse_keyed_expression(o2, 0, bag, "omega2", o2_line);
      try {
        scn.tubes.emplace(s.name, make_tube(o1, o2, t0, t1));
      } catch (const Error& e) {
        throw ScenarioError(bag.where() + ": " + e.what(), s.line);
      }
    } else {
      const std::string kind = s.name;
      if (std::find_if(std::begin(kKinds), std::end(kKinds),
                       [&](const char* k) { return kind == k; }) == std::end(kKinds)) {
        throw ScenarioError("unknown check kind '" + kind + "' (see `invar list`)", s.line);
      }
      CheckSpec spec;
      spec.kind = kind;
      spec.line = s.line;
      for (const auto& [key, value, line] : s.entries) {
        if (spec.keys.count(key) != 0) {
          throw ScenarioError("[check " + kind + "]: duplicate key '" + key + "'", line);
        }
        spec.keys[key] = value;
      }
      scn.checks.push_back(std::move(spec));
    }
  }

  if (scn.checks.empty()) {
    throw ScenarioError("a scenario needs at least one [check] section", 0);
  }

  std::map<std::string, int> kind_counts;
  for (CheckSpec& spec : scn.checks) {
    int n = ++kind_counts[spec.kind];
    spec.label = n == 1 ? spec.kind : spec.kind + "-" + std::to_string(n);
  }
  for (const CheckSpec& spec : scn.checks) validate_check(scn, spec);
  return scn;
}

Scenario parse_scenario(const std::string& path,
                        const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'", 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), std::filesystem::path(path).stem().string(), overrides);
}

RunOutcome run_scenario(const Scenario& scenario, std::string out_dir, bool parallel) {
  if (out_dir.empty()) {
    const char* env = std::getenv("INVAR_OUT_DIR");
    out_dir = env != nullptr && *env != '\0' ? env : ".";
  }
  std::filesystem::create_directories(out_dir);

  const std::size_t n = scenario.checks.size();
  std::vector<CheckOutput> outputs(n);
  if (parallel && n > 1) {
    std::vector<std::future<CheckOutput>> futures;
    futures.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      futures.push_back(std::async(std::launch::async, run_check, std::cref(scenario),
                                   std::cref(scenario.checks[i])));
    }
    for (std::size_t i = 0; i < n; ++i) outputs[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < n; ++i) outputs[i] = run_check(scenario, scenario.checks[i]);
  }

  RunOutcome outcome;
  bool mismatch = false;
  bool unexpected_error = false;

  ordered_json root;
  root["tool"] = "invar";
  root["version"] = tool_version();
  root["scenario"] = scenario.name;
  root["seed"] = scenario.seed;
  if (!scenario.comparison) root["timestamp"] = utc_timestamp();
  root["checks"] = ordered_json::array();

  for (std::size_t i = 0; i < n; ++i) {
    const CheckSpec& spec = scenario.checks[i];
    const CheckOutput& out = outputs[i];

    std::string expect;
    if (auto it = spec.keys.find("expect"); it != spec.keys.end()) expect = lower(trim(it->second));

    if (out.verdict == "error" && expect != "error") unexpected_error = true;
    if (!expect.empty() && expect != out.verdict) mismatch = true;

    ordered_json check;
    check["kind"] = spec.kind;
    check["name"] = spec.label;
    check["line"] = spec.line;
    check["seed"] = out.seed;
    check["sample_count"] = out.sample_count;
    check["verdict"] = out.verdict;
    if (!expect.empty()) {
      check["expected"] = expect;
      check["matched"] = expect == out.verdict;
    }
    if (!out.error_message.empty()) check["error"] = out.error_message;
    check["details"] = out.details;
    check["notes"] = out.notes;

    ordered_json artifacts = ordered_json::array();
    auto write_artifact = [&](const std::string& ext, const std::string& content) {
      if (content.empty()) return;
      std::string base = scenario.name + "." + spec.label + "." + ext;
      std::filesystem::path path = std::filesystem::path(out_dir) / base;
      std::ofstream f(path, std::ios::binary);
      f << content;
      artifacts.push_back(base);
      outcome.files.push_back(path.string());
    };
    write_artifact("csv", out.csv);
    write_artifact("svg", out.svg);
    check["artifacts"] = artifacts;
    root["checks"].push_back(std::move(check));
  }

  outcome.exit_code = unexpected_error ? 3 : (mismatch ? 1 : 0);
  root["exit"] = outcome.exit_code;

  outcome.report_json = root.dump(2) + "\n";
  std::filesystem::path report_path =
      std::filesystem::path(out_dir) / (scenario.name + ".report.json");
  {
    std::ofstream f(report_path, std::ios::binary);
    f << outcome.report_json;
  }
  outcome.report_path = report_path.string();
  outcome.files.push_back(outcome.report_path);
  return outcome;
}

std::string list_checks(const std::string& filter) {
  static const std::pair<const char*, const char*> rows[] = {
      {"nagumo",
       "set (required); t_samples = 5; boundary_samples = 20; margin = 1e-5; seed; expect"},
      {"lipschitz-majorant",
       "set (required, sampled); K; trials = 20; horizon = 1; perturb = 0.001; seed; expect"},
      {"okamura", "p (required); q (required); nt = 16; nx = 33; seed; expect"},
      {"thm4",
       "S (required); omega (required); F = 0; a; b; surface_samples = 32; kamke; seed; expect"},
      {"thm7",
       "S (required); F (required); omega (required); a; b; domain_samples = 256; kamke; seed; "
       "expect"},
      {"thm8",
       "S (required); F (required); omega (required); a; b; domain_samples = 256; kamke; seed; "
       "expect"},
      {"perron-tube", "tube (required); x0 (required); step = 0.001; seed; expect"},
      {"polygon",
       "set (required); x0 (required); t0; horizon = 1; schedule = 10 40 160; seed; expect"},
  };
  const std::string needle = lower(filter);
  std::ostringstream out;
  out << "kind                keys\n";
  for (const auto& [kind, keys] : rows) {
    if (!needle.empty() && std::string(kind).find(needle) == std::string::npos) continue;
    out << kind;
    for (std::size_t i = std::string(kind).size(); i < 20; ++i) out << ' ';
    out << keys << "\n";
  }
  return out.str();
}

std::string tool_version() { return kVersion; }

}  // namespace invar
