#include "platoon/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "platoon/error.hpp"

namespace platoon {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double x, int digits) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << x;
  return o.str();
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_timeseries_csv(std::ostream& out, const SimOutput& sim) {
  const std::size_t vehicles = sim.x.size();
  out << 't';
  for (std::size_t j = 0; j < vehicles; ++j) {
    out << ",x_" << j << ",v_" << j << ",a_" << j;
    if (j > 0) out << ",e_" << j;
  }
  out << '\n';
  for (std::size_t k = 0; k < sim.time.size(); ++k) {
    out << format_double(sim.time[k]);
    for (std::size_t j = 0; j < vehicles; ++j) {
      out << ',' << format_double(sim.x[j][k]) << ',' << format_double(sim.v[j][k]) << ','
          << format_double(sim.a[j][k]);
      if (j > 0) out << ',' << format_double(sim.e[j - 1][k]);
    }
    out << '\n';
  }
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::vector<std::string> cells;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    boost::algorithm::split(cells, line, boost::is_any_of(","));
    if (first) {
      table.header = cells;
      first = false;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::kIo, "CSV row width does not match its header");
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& s = cells[c];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), row[c]);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::kIo, "CSV cell is not a number: '" + s + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_peaks_csv(std::ostream& out, const std::vector<PeakRow>& rows) {
  out << "panel,vehicle,peak_abs_e\n";
  for (const auto& r : rows) {
    out << r.panel << ',' << r.vehicle << ',' << format_double(r.peak) << '\n';
  }
}

void write_svg_plot(std::ostream& out, const std::string& title, const std::vector<double>& t,
                    const std::vector<PlotSeries>& series, const std::string& y_label) {
  const double width = 720, height = 400, left = 70, right = 150, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  double t0 = t.empty() ? 0.0 : t.front(), t1 = t.empty() ? 1.0 : t.back();
  if (!(t1 > t0)) t1 = t0 + 1.0;
  double lo = 0.0, hi = 0.0;
  for (const auto& s : series) {
    for (double y : s.y) {
      if (std::isfinite(y)) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
  }
  if (!(hi > lo)) { lo -= 1.0; hi += 1.0; }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto px = [&](double x) { return left + (x - t0) / (t1 - t0) * pw; };
  auto py = [&](double y) { return top + (hi - y) / (hi - lo) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = lo + (hi - lo) * i / 4.0;
    const double tv = t0 + (t1 - t0) * i / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(yv) + 4, 1)
        << "\" text-anchor=\"end\">" << fixed(yv, 2) << "</text>\n";
    out << "<text x=\"" << fixed(px(tv), 1) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << fixed(tv, 1) << "</text>\n";
  }
  if (lo < 0.0 && hi > 0.0) {
    out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << fixed(py(0), 2)
        << "\" y2=\"" << fixed(py(0), 2) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">t [s]</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";

  // Thin long series to about one point per horizontal pixel.
  const std::size_t stride = std::max<std::size_t>(1, t.size() / static_cast<std::size_t>(pw));
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const auto n = std::min(t.size(), series[s].y.size());
    for (std::size_t k = 0; k < n; k += stride) {
      out << fixed(px(t[k]), 2) << ',' << fixed(py(series[s].y[k]), 2) << ' ';
    }
    if (n > 0 && (n - 1) % stride != 0) {
      out << fixed(px(t[n - 1]), 2) << ',' << fixed(py(series[s].y[n - 1]), 2);
    }
    out << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 32 << "\" y1=\"" << ly - 4
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">"
        << xml_escape(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::error_code ec;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + parent.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace platoon
