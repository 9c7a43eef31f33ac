#include "summix/bench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "summix/numcore/error.hpp"

namespace summix {

using nlohmann::json;

TimingStats summarize_timings(std::vector<double> samples) {
  if (samples.empty()) throw ConfigError("summarize_timings: no samples");
  const double n = static_cast<double>(samples.size());
  TimingStats s;
  s.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var = 0;
  for (double v : samples) var += (v - s.mean_ms) * (v - s.mean_ms);
  s.std_ms = std::sqrt(var / n);
  std::sort(samples.begin(), samples.end());
  const std::size_t m = samples.size() / 2;
  s.median_ms = samples.size() % 2 ? samples[m] : 0.5 * (samples[m - 1] + samples[m]);
  return s;
}

double fit_exponent(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw ConfigError("fit_exponent: need at least 3 points, got " + std::to_string(points.size()));
  }
  double sx = 0, sy = 0;
  for (const auto& [t, m] : points) {
    if (!(t > 0) || !(m > 0)) {
      throw ConfigError("fit_exponent: non-positive point (" + std::to_string(t) + ", " + std::to_string(m) + ")");
    }
    sx += std::log(t);
    sy += std::log(m);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [t, m] : points) {
    sxx += (std::log(t) - mx) * (std::log(t) - mx);
    sxy += (std::log(t) - mx) * (std::log(m) - my);
  }
  if (sxx == 0) throw ConfigError("fit_exponent: all points share one T");
  return sxy / sxx;
}

std::vector<std::pair<double, double>> largest_half(std::vector<std::pair<double, double>> points) {
  std::sort(points.begin(), points.end());
  const std::size_t keep = std::min(points.size(), std::max<std::size_t>(3, (points.size() + 1) / 2));
  points.erase(points.begin(), points.end() - static_cast<std::ptrdiff_t>(keep));
  return points;
}

std::vector<std::string> measure_names() {
  return {"flops", "activation_floats", "peak_model_floats", "wall_ms_mean", "wall_ms_median", "rtf"};
}

std::optional<double> measure_value(const BenchRow& row, const std::string& measure) {
  if (measure == "flops") return static_cast<double>(row.flops);
  if (measure == "activation_floats") return static_cast<double>(row.activation_floats);
  if (measure == "peak_model_floats") {
    if (row.peak_model_floats == 0) return std::nullopt;
    return static_cast<double>(row.peak_model_floats);
  }
  if (measure == "wall_ms_mean") return row.wall ? std::optional(row.wall->mean_ms) : std::nullopt;
  if (measure == "wall_ms_median") return row.wall ? std::optional(row.wall->median_ms) : std::nullopt;
  if (measure == "rtf") return row.rtf;
  throw ConfigError("unknown measure '" + measure + "'");
}

std::map<std::string, std::map<std::string, double>> exponents_from_rows(const std::vector<BenchRow>& rows) {
  std::map<std::string, std::vector<const BenchRow*>> groups;
  for (const auto& r : rows) groups[r.config_id].push_back(&r);
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& [id, group] : groups) {
    for (const auto& measure : measure_names()) {
      std::vector<std::pair<double, double>> pts;
      for (const BenchRow* r : group) {
        const auto v = measure_value(*r, measure);
        if (v && *v > 0) pts.emplace_back(static_cast<double>(r->frames), *v);
      }
      if (pts.size() < 3 || pts.size() != group.size()) continue;
      out[id][measure] = fit_exponent(largest_half(pts));
    }
  }
  return out;
}

void compute_exponents(BenchReport& report) { report.exponents = exponents_from_rows(report.rows); }

namespace {

std::vector<const BenchRow*> timed_by_duration(const std::vector<BenchRow>& rows, const std::string& id) {
  std::vector<const BenchRow*> out;
  for (const auto& r : rows)
    if (r.config_id == id && r.rtf) out.push_back(&r);
  std::sort(out.begin(), out.end(), [](const BenchRow* a, const BenchRow* b) { return a->seconds < b->seconds; });
  return out;
}

}  // namespace

std::optional<double> rtf_growth(const std::vector<BenchRow>& rows, const std::string& config_id) {
  const auto r = timed_by_duration(rows, config_id);
  if (r.size() < 2) return std::nullopt;
  return *r.back()->rtf / *r.front()->rtf;
}

bool rtf_strictly_increasing(const std::vector<BenchRow>& rows, const std::string& config_id) {
  const auto r = timed_by_duration(rows, config_id);
  if (r.size() < 2) return false;
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(*r[i]->rtf > *r[i - 1]->rtf)) return false;
  return true;
}

void evaluate_rtf_properties(BenchReport& report) {
  std::vector<std::string> seen;
  for (const auto& row : report.rows) {
    if (std::find(seen.begin(), seen.end(), row.config_id) != seen.end()) continue;
    seen.push_back(row.config_id);
    const auto growth = rtf_growth(report.rows, row.config_id);
    if (!growth) continue;
    if (row.mixer == "summary_mixing" || row.mixer == "summary_mixing_lite") {
      report.properties.push_back({"rtf_flatness", row.config_id, *growth, kRtfFlatnessLimit, *growth <= kRtfFlatnessLimit});
    } else if (row.mixer == "mhsa") {
      const bool inc = rtf_strictly_increasing(report.rows, row.config_id);
      report.properties.push_back({"rtf_increasing", row.config_id, *growth, 1.0, inc});
    }
  }
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("csv line " + std::to_string(line) + ": '" + s + "' is not a number");
  }
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("csv line " + std::to_string(line) + ": '" + s + "' is not an unsigned integer");
  }
}

}  // namespace

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    if (r.config_id.find_first_of(",\n\"") != std::string::npos) {
      throw ConfigError("config id '" + r.config_id + "' cannot be written to csv");
    }
    out << r.config_id << ',' << r.mixer << ',' << r.block << ',' << r.model_dim << ',' << r.depth << ','
        << fmt(r.seconds) << ',' << r.frames << ',' << r.flops << ',' << r.activation_floats << ',';
    if (r.wall) {
      out << fmt(r.wall->mean_ms) << ',' << fmt(r.wall->std_ms) << ',' << fmt(r.wall->median_ms) << ',';
    } else {
      out << ",,,";
    }
    if (r.rtf) out << fmt(*r.rtf);
    out << '\n';
  }
  return out.str();
}

std::vector<BenchRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError("csv: header does not match '" + std::string(kCsvHeader) + "'");
  }
  std::vector<BenchRow> rows;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 13) {
      throw ConfigError("csv line " + std::to_string(n) + ": expected 13 fields, got " + std::to_string(f.size()));
    }
    BenchRow r;
    r.config_id = f[0];
    r.mixer = f[1];
    r.block = f[2];
    r.model_dim = parse_uint(f[3], n);
    r.depth = parse_uint(f[4], n);
    r.seconds = parse_double(f[5], n);
    r.frames = parse_uint(f[6], n);
    r.flops = parse_uint(f[7], n);
    r.activation_floats = parse_uint(f[8], n);
    const bool any_wall = !f[9].empty() || !f[10].empty() || !f[11].empty();
    if (any_wall) {
      if (f[9].empty() || f[10].empty() || f[11].empty()) {
        throw ConfigError("csv line " + std::to_string(n) + ": wall columns must be all present or all empty");
      }
      r.wall = TimingStats{parse_double(f[9], n), parse_double(f[10], n), parse_double(f[11], n)};
    }
    if (!f[12].empty()) r.rtf = parse_double(f[12], n);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string to_json(const BenchReport& report) {
  json env = {{"precision", report.environment.precision},
              {"threads", report.environment.threads},
              {"repeats", report.environment.repeats},
              {"warmup", report.environment.warmup},
              {"seed", report.environment.seed},
              {"batch", report.environment.batch},
              {"target_tokens", report.environment.target_tokens},
              {"vocab", report.environment.vocab},
              {"timed_region", report.environment.timed_region}};
  json rows = json::array();
  for (const auto& r : report.rows) {
    json j = {{"config_id", r.config_id}, {"mixer", r.mixer},
              {"block", r.block},         {"D", r.model_dim},
              {"depth", r.depth},         {"L_seconds", r.seconds},
              {"T_frames", r.frames},     {"flops", r.flops},
              {"activation_floats", r.activation_floats},
              {"peak_model_floats", r.peak_model_floats}};
    if (r.wall) {
      j["wall_ms_mean"] = r.wall->mean_ms;
      j["wall_ms_std"] = r.wall->std_ms;
      j["wall_ms_median"] = r.wall->median_ms;
    }
    if (r.rtf) j["rtf"] = *r.rtf;
    rows.push_back(std::move(j));
  }
  json props = json::array();
  for (const auto& p : report.properties) {
    props.push_back({{"name", p.name}, {"config_id", p.config_id}, {"value", p.value}, {"threshold", p.threshold},
                     {"passed", p.passed}});
  }
  json out = {{"kind", report.kind},
              {"environment", env},
              {"rows", rows},
              {"fitted_exponent", report.exponents},
              {"properties", props}};
  return out.dump(2) + "\n";
}

BenchReport report_from_json(const std::string& text) {
  BenchReport report;
  try {
    const json j = json::parse(text);
    report.kind = j.at("kind").get<std::string>();
    const json& env = j.at("environment");
    auto& e = report.environment;
    e.precision = env.at("precision").get<std::string>();
    e.threads = env.at("threads").get<std::size_t>();
    e.repeats = env.at("repeats").get<std::size_t>();
    e.warmup = env.at("warmup").get<std::size_t>();
    e.seed = env.at("seed").get<std::uint64_t>();
    e.batch = env.at("batch").get<std::size_t>();
    e.target_tokens = env.at("target_tokens").get<std::size_t>();
    e.vocab = env.at("vocab").get<std::size_t>();
    e.timed_region = env.at("timed_region").get<std::string>();
    for (const json& r : j.at("rows")) {
      BenchRow row;
      row.config_id = r.at("config_id").get<std::string>();
      row.mixer = r.at("mixer").get<std::string>();
      row.block = r.at("block").get<std::string>();
      row.model_dim = r.at("D").get<std::size_t>();
      row.depth = r.at("depth").get<std::size_t>();
      row.seconds = r.at("L_seconds").get<double>();
      row.frames = r.at("T_frames").get<std::size_t>();
      row.flops = r.at("flops").get<std::uint64_t>();
      row.activation_floats = r.at("activation_floats").get<std::uint64_t>();
      row.peak_model_floats = r.at("peak_model_floats").get<std::uint64_t>();
      if (r.contains("wall_ms_mean")) {
        row.wall = TimingStats{r.at("wall_ms_mean").get<double>(), r.at("wall_ms_std").get<double>(),
                               r.at("wall_ms_median").get<double>()};
      }
      if (r.contains("rtf")) row.rtf = r.at("rtf").get<double>();
      report.rows.push_back(std::move(row));
    }
    report.exponents = j.at("fitted_exponent").get<std::map<std::string, std::map<std::string, double>>>();
    for (const json& p : j.value("properties", json::array())) {
      report.properties.push_back({p.at("name").get<std::string>(), p.at("config_id").get<std::string>(),
                                   p.at("value").get<double>(), p.at("threshold").get<double>(),
                                   p.at("passed").get<bool>()});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report json: ") + e.what());
  }
  return report;
}

std::vector<ChartSeries> chart_series(const std::vector<BenchRow>& rows, const std::string& measure) {
  std::vector<ChartSeries> out;
  for (const auto& r : rows) {
    const auto v = measure_value(r, measure);
    if (!v || !(*v > 0)) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const ChartSeries& s) { return s.label == r.config_id; });
    if (it == out.end()) it = out.insert(out.end(), ChartSeries{r.config_id, {}});
    it->points.emplace_back(static_cast<double>(r.frames), *v);
  }
  for (auto& s : out) std::sort(s.points.begin(), s.points.end());
  return out;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string loglog_svg(const std::vector<ChartSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  constexpr double W = 720, H = 480, left = 80, right = 200, top = 40, bottom = 60;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!(x > 0) || !(y > 0)) throw ConfigError("loglog_svg: non-positive point in '" + s.label + "'");
      x0 = std::min(x0, std::log10(x));
      x1 = std::max(x1, std::log10(x));
      y0 = std::min(y0, std::log10(y));
      y1 = std::max(y1, std::log10(y));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1);
  y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1);
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (std::log10(x) - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + ph - (std::log10(y) - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
    << "</text>\n";
  for (double d = x0; d <= x1; ++d) {
    const double x = left + (d - x0) / (x1 - x0) * pw;
    o << "<line x1=\"" << px(x) << "\" y1=\"" << px(top) << "\" x2=\"" << px(x) << "\" y2=\"" << px(top + ph)
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << px(x) << "\" y=\"" << px(top + ph + 18) << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (double d = y0; d <= y1; ++d) {
    const double y = top + ph - (d - y0) / (y1 - y0) * ph;
    o << "<line x1=\"" << px(left) << "\" y1=\"" << px(y) << "\" x2=\"" << px(left + pw) << "\" y2=\"" << px(y)
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << px(left - 8) << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  o << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << px(left + pw / 2) << "\" y=\"" << px(H - 16) << "\" text-anchor=\"middle\">"
    << escape_xml(x_label) << "</text>\n";
  o << "<text transform=\"translate(20 " << px(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape_xml(y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* colour = palette[i % std::size(palette)];
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      o << (k ? " " : "") << px(sx(s.points[k].first)) << ',' << px(sy(s.points[k].second));
    }
    o << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      o << "<circle cx=\"" << px(sx(x)) << "\" cy=\"" << px(sy(y)) << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    const double ly = top + 16 + 18 * static_cast<double>(i);
    o << "<line x1=\"" << px(left + pw + 12) << "\" y1=\"" << px(ly - 4) << "\" x2=\"" << px(left + pw + 32)
      << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << px(left + pw + 38) << "\" y=\"" << px(ly) << "\">" << escape_xml(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace summix
