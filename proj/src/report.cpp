#include "nlspike/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace nlspike {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

nlohmann::ordered_json json_opt(const std::optional<double>& v) {
  return v ? json_number(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string reports_to_csv(std::span<const ErrorReport> rows) {
  std::ostringstream os;
  os << kReportCsvHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.op) << ',' << r.kind << ',' << r.d << ',' << format_number(r.H) << ',' << r.K << ',' << r.T
       << ',' << r.L << ',' << r.samples << ',' << r.seed << ',' << format_number(r.mean_abs) << ','
       << format_number(r.max_abs) << ',' << format_number(r.mean_rel) << ',' << format_number(r.max_rel) << ','
       << opt_number(r.bound) << ',' << opt_number(r.slack) << ',' << (r.pass ? (*r.pass ? "1" : "0") : "")
       << '\n';
  }
  return os.str();
}

std::string reports_to_json(std::span<const ErrorReport> rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["operator"] = std::string(to_string(r.op));
    o["kind"] = r.kind;
    o["d"] = r.d;
    o["H"] = json_number(r.H);
    o["K"] = r.K;
    o["T"] = r.T;
    o["L"] = r.L;
    o["samples"] = r.samples;
    o["seed"] = r.seed;
    o["mean_abs"] = json_number(r.mean_abs);
    o["max_abs"] = json_number(r.max_abs);
    o["mean_rel"] = json_number(r.mean_rel);
    o["max_rel"] = json_number(r.max_rel);
    o["bound"] = json_opt(r.bound);
    o["slack"] = json_opt(r.slack);
    o["pass"] = r.pass ? nlohmann::ordered_json(*r.pass) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::string opcounts_to_csv(std::span<const OpCountReport> rows) {
  std::ostringstream os;
  os << kOpCountCsvHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.op) << ',' << r.d << ',' << r.T << ',' << r.macs << ',' << r.acs << ',' << r.shifts << '\n';
  }
  return os.str();
}

std::string opcounts_to_json(std::span<const OpCountReport> rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["operator"] = std::string(to_string(r.op));
    o["d"] = r.d;
    o["T"] = r.T;
    o["macs"] = r.macs;
    o["acs"] = r.acs;
    o["shifts"] = r.shifts;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::string reports_to_svg(std::span<const ErrorReport> rows, const std::string& x_key, const std::string& title) {
  constexpr double W = 720, Hh = 440, ml = 80, mr = 170, mt = 40, mb = 50;
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const bool log_x = x_key == "d";

  std::map<std::string, std::vector<const ErrorReport*>> series;
  std::vector<std::string> order;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& r : rows) {
    if (!series.count(r.kind)) order.push_back(r.kind);
    series[r.kind].push_back(&r);
    const double x = log_x ? std::log2(r.d) : r.H;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    for (double y : {r.mean_abs, r.max_abs}) {
      if (y > 0) {
        ymin = std::min(ymin, std::log10(y));
        ymax = std::max(ymax, std::log10(y));
      }
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (!std::isfinite(ymin)) ymin = -1, ymax = 0;
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax == ymin) ymax = ymin + 1;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) {
    const double ly = y > 0 ? std::log10(y) : ymin;
    return Hh - mb - (ly - ymin) / (ymax - ymin) * (Hh - mt - mb);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << Hh - mb << "\" x2=\"" << W - mr << "\" y2=\"" << Hh - mb
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << Hh - mb
     << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); ++e) {
    const double y = py(std::pow(10.0, e));
    os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << W - mr << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  std::vector<double> ticks;
  for (const auto& r : rows) ticks.push_back(log_x ? std::log2(r.d) : r.H);
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (double t : ticks) {
    const double label = log_x ? std::exp2(t) : t;
    os << "<text x=\"" << px(t) << "\" y=\"" << Hh - mb + 18 << "\" text-anchor=\"middle\">"
       << format_number(label) << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << Hh - 12 << "\" text-anchor=\"middle\">" << x_key
     << "</text>\n";
  os << "<text transform=\"translate(18," << (mt + Hh - mb) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">abs error (solid mean, dashed max)</text>\n";

  std::size_t ci = 0;
  for (const auto& kind : order) {
    const char* color = palette[ci++ % 10];
    auto pts = series[kind];
    std::sort(pts.begin(), pts.end(), [&](const ErrorReport* a, const ErrorReport* b) {
      return log_x ? a->d < b->d : a->H < b->H;
    });
    for (int which = 0; which < 2; ++which) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\""
         << (which ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
      for (const auto* r : pts) {
        const double x = px(log_x ? std::log2(r->d) : r->H);
        os << x << ',' << py(which ? r->max_abs : r->mean_abs) << ' ';
      }
      os << "\"/>\n";
    }
    const double ly = mt + 16.0 * static_cast<double>(ci);
    os << "<line x1=\"" << W - mr + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 34 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - mr + 40 << "\" y=\"" << ly + 4 << "\">" << kind << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace nlspike
