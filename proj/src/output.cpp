#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "envlab/experiments.hpp"
#include "envlab/version.hpp"
#include "util.hpp"

namespace envlab {

namespace {

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_report(const ConvergenceReport& r) {
  std::string out = "series,eps,value\n";
  for (const auto& s : r.series) {
    for (const auto& p : s.points) {
      out += s.name + "," + detail::format_double(p.eps) + "," + detail::format_double(p.value) + "\n";
    }
  }
  return out;
}

std::string csv_table(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + detail::format_double(row[c]);
    out += "\n";
  }
  return out;
}

// Single-panel log-log plot: markers, fitted line (solid), predicted slope (dashed).
std::string svg_report(const ConvergenceReport& r) {
  const double W = 640, H = 420, ml = 70, mr = 200, mt = 30, mb = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : r.series) {
    for (const auto& p : s.points) {
      if (!(p.eps > 0.0 && p.value > 0.0)) continue;
      x0 = std::min(x0, std::log10(p.eps));
      x1 = std::max(x1, std::log10(p.eps));
      y0 = std::min(y0, std::log10(p.value));
      y1 = std::max(y1, std::log10(p.value));
    }
  }
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << ml << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << r.study << "</text>\n";
  if (!(x1 >= x0)) {
    o << "<text x=\"" << ml << "\" y=\"" << H / 2 << "\" font-family=\"sans-serif\">no positive data</text>\n</svg>\n";
    return o.str();
  }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };

  o << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
    << "\" height=\"" << H - mt - mb << "\"/></g>\n";
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
    << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">log10 eps</text>\n";
  o << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
    << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " << (mt + H - mb) / 2
    << ")\" text-anchor=\"middle\">log10 value</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double lx = x0 + (x1 - x0) * k / 4.0, ly = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << short_num(px(lx)) << "\" y=\"" << H - mb + 16
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << short_num(lx) << "</text>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << short_num(py(ly) + 3)
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << short_num(ly) << "</text>\n";
  }

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::size_t ci = 0;
  for (const auto& s : r.series) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : s.points) {
      if (p.eps > 0.0 && p.value > 0.0) pts.emplace_back(std::log10(p.eps), std::log10(p.value));
    }
    if (pts.empty()) continue;
    const char* col = colors[ci % std::size(colors)];
    for (const auto& [lx, ly] : pts) {
      o << "<circle cx=\"" << short_num(px(lx)) << "\" cy=\"" << short_num(py(ly)) << "\" r=\"4\" fill=\"" << col
        << "\"/>\n";
    }
    double mx = 0, my = 0;
    for (const auto& [lx, ly] : pts) {
      mx += lx;
      my += ly;
    }
    mx /= pts.size();
    my /= pts.size();
    auto line = [&](double slope, const char* dash) {
      const double ya = my + slope * (x0 - mx), yb = my + slope * (x1 - mx);
      o << "<line x1=\"" << short_num(px(x0)) << "\" y1=\"" << short_num(py(ya)) << "\" x2=\"" << short_num(px(x1))
        << "\" y2=\"" << short_num(py(yb)) << "\" stroke=\"" << col << "\"" << dash << "/>\n";
    };
    o << "<clipPath id=\"c" << ci << "\"><rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
      << "\" height=\"" << H - mt - mb << "\"/></clipPath><g clip-path=\"url(#c" << ci << ")\">\n";
    if (s.slope) line(*s.slope, "");
    if (s.predicted) line(*s.predicted, " stroke-dasharray=\"6 4\"");
    o << "</g>\n";
    std::string label = s.name;
    if (s.slope) label += " slope " + short_num(*s.slope);
    if (s.predicted) label += " (pred " + short_num(*s.predicted) + ")";
    o << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 14 + 16 * ci << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\""
      << col << "\">" << label << "</text>\n";
    ++ci;
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace

std::vector<OutputFormat> parse_formats(const std::string& list) {
  std::vector<OutputFormat> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "csv") {
      out.push_back(OutputFormat::csv);
    } else if (item == "json") {
      out.push_back(OutputFormat::json);
    } else if (item == "svg") {
      out.push_back(OutputFormat::svg);
    } else if (!item.empty()) {
      throw ConfigError("unknown output format '" + item + "' (expected csv, json, svg)");
    }
  }
  return out;
}

std::filesystem::path emit_outputs(const ConvergenceReport& report, const std::vector<OutputFormat>& formats,
                                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  std::vector<Artifact> artifacts;
  auto put = [&](const std::string& name, const std::string& text) {
    const auto path = dir / name;
    detail::write_file_atomic(path, text);
    artifacts.push_back({name, detail::sha256_hex(text), text.size()});
  };

  const bool has_data = !report.series.empty() || !report.tables.empty();
  const std::string base = report.study.empty() ? "report" : report.study;
  if (has_data) {
    auto wants = [&](OutputFormat f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };
    if (wants(OutputFormat::csv)) {
      put(base + ".csv", csv_report(report));
      for (const auto& t : report.tables) put(base + "_" + t.name + ".csv", csv_table(t));
    }
    if (wants(OutputFormat::json)) put(base + ".json", report.to_json_text());
    if (wants(OutputFormat::svg)) put(base + ".svg", svg_report(report));
  }

  nlohmann::ordered_json m;
  m["study"] = report.study;
  m["version"] = version_string;
  m["config_hash"] = report.config_hash;
  m["passed"] = report.passed();
  nlohmann::ordered_json arts = nlohmann::ordered_json::array();
  for (const auto& a : artifacts) {
    arts.push_back({{"path", a.path.generic_string()}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  }
  m["artifacts"] = arts;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& [e, s] : report.runtime.per_eps_seconds) per.push_back({{"eps", e}, {"seconds", s}});
  m["runtime"] = {{"wall_seconds", report.runtime.wall_seconds},
                  {"threads", report.runtime.threads},
                  {"per_eps", per}};
  const auto path = dir / (base + "_manifest.json");
  detail::write_file_atomic(path, m.dump(2) + "\n");
  return path;
}

}  // namespace envlab
