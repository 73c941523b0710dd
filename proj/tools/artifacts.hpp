#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace subeq::app {

/// Column-major table, one header per column, %.17g so values round-trip.
void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

struct Series {
  std::string name;
  std::vector<double> x, y;
};

void svg_line_plot(const std::filesystem::path& file, const std::string& title, const std::string& xlabel,
                   const std::string& ylabel, const std::vector<Series>& series);

/// values[iy * nx + ix] over [x0, x1] x [y0, y1]; non-finite cells are left blank.
void svg_heatmap(const std::filesystem::path& file, const std::string& title, int nx, int ny,
                 const std::vector<double>& values, double x0, double x1, double y0, double y1);

}  // namespace subeq::app
