#pragma once

#include <string>
#include <vector>

#include "tsrep/common.hpp"

namespace tsrep {

struct Point2D {
  double x;
  double y;
};

// n_side x n_side occupancy grid over the joint bounding box of two point
// sets, each side expanded by a 1e-9 relative margin. Cells are half-open
// with the top edge clamped into the last cell.
struct Grid {
  int n_side = 30;
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  std::string tag_a, tag_b;
  std::vector<std::size_t> counts_a;  // n_side * n_side, row-major by cell_y
  std::vector<std::size_t> counts_b;

  std::size_t cell_index(double x, double y) const;
};

Grid build_grid(const std::vector<Point2D>& points_a, const std::vector<Point2D>& points_b,
                int n_side = 30, const std::string& tag_a = "A", const std::string& tag_b = "B");

// (1/n_side^2) * sum over cells of (1 - I_a) * I_b: the fraction of grid
// cells occupied by b but not by a.
double miscoverage(const Grid& g, const std::string& a, const std::string& b);

// Fraction of a's points lying in cells where b has no points.
double nor(const Grid& g, const std::string& a, const std::string& b);

struct CoverageReport {
  std::string tag_a, tag_b;
  double miscoverage_ab = 0.0;
  double miscoverage_ba = 0.0;
  double nor_ab = 0.0;
  double nor_ba = 0.0;
  std::size_t occupied_a = 0;
  std::size_t occupied_b = 0;
};

CoverageReport coverage_report(const Grid& g);

// Occupancy dump: cell_x, cell_y, count_a, count_b (occupied cells only).
void write_cells_csv(const Grid& g, const std::string& path);

}  // namespace tsrep
