#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "platoon/platoon_sim.hpp"

namespace platoon {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// Columns: t, then x_i, v_i, a_i per vehicle, with e_i after a_i for every
/// follower (the lead has no spacing error).
void write_timeseries_csv(std::ostream& out, const SimOutput& sim);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header name, or -1.
  int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);

struct PeakRow {
  std::string panel;
  int vehicle = 0;
  double peak = 0.0;
};

void write_peaks_csv(std::ostream& out, const std::vector<PeakRow>& rows);

struct PlotSeries {
  std::string name;
  std::vector<double> y;
};

/// Line plot of several series against a shared time axis.
void write_svg_plot(std::ostream& out, const std::string& title, const std::vector<double>& t,
                    const std::vector<PlotSeries>& series, const std::string& y_label);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace platoon
