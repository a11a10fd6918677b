#include "tsrep/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tsrep {

std::size_t Grid::cell_index(double x, double y) const {
  const double wx = (x_hi - x_lo) / n_side;
  const double wy = (y_hi - y_lo) / n_side;
  auto clamp_cell = [&](double v, double lo, double w) {
    auto c = static_cast<long>(std::floor((v - lo) / w));
    if (c < 0) c = 0;
    if (c >= n_side) c = n_side - 1;
    return static_cast<std::size_t>(c);
  };
  return clamp_cell(y, y_lo, wy) * static_cast<std::size_t>(n_side) + clamp_cell(x, x_lo, wx);
}

Grid build_grid(const std::vector<Point2D>& points_a, const std::vector<Point2D>& points_b,
                int n_side, const std::string& tag_a, const std::string& tag_b) {
  if (points_a.empty() || points_b.empty())
    throw ParamError("build_grid: both point sets must be nonempty");
  if (n_side < 1) throw ParamError("build_grid: n_side must be positive");

  Grid g;
  g.n_side = n_side;
  g.tag_a = tag_a;
  g.tag_b = tag_b;
  double x_lo = points_a[0].x, x_hi = points_a[0].x;
  double y_lo = points_a[0].y, y_hi = points_a[0].y;
  for (const auto* pts : {&points_a, &points_b}) {
    for (const auto& p : *pts) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y);
      y_hi = std::max(y_hi, p.y);
    }
  }
  if (!std::isfinite(x_lo) || !std::isfinite(x_hi) || !std::isfinite(y_lo) ||
      !std::isfinite(y_hi))
    throw ParamError("build_grid: degenerate bounding box");
  // relative margin; a zero span falls back to the coordinate magnitude so
  // coincident points still land in a valid box
  auto margin_of = [](double lo, double hi) {
    const double span = hi - lo;
    return 1e-9 * (span > 0.0 ? span : std::max({std::fabs(lo), std::fabs(hi), 1.0}));
  };
  const double margin_x = margin_of(x_lo, x_hi);
  const double margin_y = margin_of(y_lo, y_hi);
  g.x_lo = x_lo - margin_x;
  g.x_hi = x_hi + margin_x;
  g.y_lo = y_lo - margin_y;
  g.y_hi = y_hi + margin_y;
  if (!(g.x_hi > g.x_lo) || !(g.y_hi > g.y_lo))
    throw ParamError("build_grid: degenerate bounding box");

  g.counts_a.assign(static_cast<std::size_t>(n_side) * n_side, 0);
  g.counts_b.assign(static_cast<std::size_t>(n_side) * n_side, 0);
  for (const auto& p : points_a) g.counts_a[g.cell_index(p.x, p.y)] += 1;
  for (const auto& p : points_b) g.counts_b[g.cell_index(p.x, p.y)] += 1;
  return g;
}

namespace {

const std::vector<std::size_t>& side_counts(const Grid& g, const std::string& tag) {
  if (tag == g.tag_a) return g.counts_a;
  if (tag == g.tag_b) return g.counts_b;
  throw ParamError("unknown dataset tag '" + tag + "' for this grid");
}

}  // namespace

double miscoverage(const Grid& g, const std::string& a, const std::string& b) {
  const auto& ca = side_counts(g, a);
  const auto& cb = side_counts(g, b);
  std::size_t cells_b_only = 0;
  for (std::size_t i = 0; i < ca.size(); ++i)
    if (ca[i] == 0 && cb[i] > 0) ++cells_b_only;
  return static_cast<double>(cells_b_only) / static_cast<double>(ca.size());
}

double nor(const Grid& g, const std::string& a, const std::string& b) {
  const auto& ca = side_counts(g, a);
  const auto& cb = side_counts(g, b);
  std::size_t total = 0, outside = 0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    total += ca[i];
    if (cb[i] == 0) outside += ca[i];
  }
  return total > 0 ? static_cast<double>(outside) / static_cast<double>(total) : 0.0;
}

CoverageReport coverage_report(const Grid& g) {
  CoverageReport r;
  r.tag_a = g.tag_a;
  r.tag_b = g.tag_b;
  r.miscoverage_ab = miscoverage(g, g.tag_a, g.tag_b);
  r.miscoverage_ba = miscoverage(g, g.tag_b, g.tag_a);
  r.nor_ab = nor(g, g.tag_a, g.tag_b);
  r.nor_ba = nor(g, g.tag_b, g.tag_a);
  for (std::size_t c : g.counts_a)
    if (c > 0) ++r.occupied_a;
  for (std::size_t c : g.counts_b)
    if (c > 0) ++r.occupied_b;
  return r;
}

void write_cells_csv(const Grid& g, const std::string& path) {
  std::ostringstream out;
  out << "cell_x,cell_y,count_" << g.tag_a << ",count_" << g.tag_b << "\n";
  for (int cy = 0; cy < g.n_side; ++cy)
    for (int cx = 0; cx < g.n_side; ++cx) {
      const std::size_t i = static_cast<std::size_t>(cy) * g.n_side + cx;
      if (g.counts_a[i] == 0 && g.counts_b[i] == 0) continue;
      out << cx << "," << cy << "," << g.counts_a[i] << "," << g.counts_b[i] << "\n";
    }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << out.str();
}

}  // namespace tsrep
