#include "tsrep/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tsrep {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void write_svg(const Embedding2D& e, const std::vector<std::string>& tags_to_draw,
               const std::vector<std::string>& all_tags, const std::string& path) {
  constexpr double kCanvas = 800.0;
  constexpr double kMargin = 60.0;
  double x_lo = e.x[0], x_hi = e.x[0], y_lo = e.y[0], y_hi = e.y[0];
  for (std::size_t i = 0; i < e.x.size(); ++i) {
    x_lo = std::min(x_lo, e.x[i]);
    x_hi = std::max(x_hi, e.x[i]);
    y_lo = std::min(y_lo, e.y[i]);
    y_hi = std::max(y_hi, e.y[i]);
  }
  const double span_x = x_hi > x_lo ? x_hi - x_lo : 1.0;
  const double span_y = y_hi > y_lo ? y_hi - y_lo : 1.0;
  auto sx = [&](double x) { return kMargin + (x - x_lo) / span_x * (kCanvas - 2 * kMargin); };
  auto sy = [&](double y) {
    return kCanvas - kMargin - (y - y_lo) / span_y * (kCanvas - 2 * kMargin);
  };
  auto color_of = [&](const std::string& tag) {
    const auto it = std::find(all_tags.begin(), all_tags.end(), tag);
    const std::size_t idx = it == all_tags.end() ? 0 : (it - all_tags.begin());
    return std::string(kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))]);
  };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
         "viewBox=\"0 0 800 800\">\n"
      << "  <rect width=\"800\" height=\"800\" fill=\"white\"/>\n"
      << "  <rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
      << kCanvas - 2 * kMargin << "\" height=\"" << kCanvas - 2 * kMargin
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "  <text x=\"400\" y=\"790\" text-anchor=\"middle\" font-size=\"14\">dim1 ["
      << fmt(x_lo) << ", " << fmt(x_hi) << "]</text>\n";
  out << "  <text x=\"15\" y=\"400\" text-anchor=\"middle\" font-size=\"14\" "
         "transform=\"rotate(-90 15 400)\">dim2 ["
      << fmt(y_lo) << ", " << fmt(y_hi) << "]</text>\n";
  double legend_y = kMargin;
  for (const auto& tag : tags_to_draw) {
    out << "  <text x=\"" << kCanvas - kMargin + 5 << "\" y=\"" << legend_y
        << "\" font-size=\"12\" fill=\"" << color_of(tag) << "\">" << xml_escape(tag)
        << "</text>\n";
    legend_y += 16.0;
  }
  for (std::size_t i = 0; i < e.x.size(); ++i) {
    const std::string tag = i < e.dataset_tags.size() ? e.dataset_tags[i] : "";
    if (std::find(tags_to_draw.begin(), tags_to_draw.end(), tag) == tags_to_draw.end())
      continue;
    out << "  <circle cx=\"" << fmt(sx(e.x[i])) << "\" cy=\"" << fmt(sy(e.y[i]))
        << "\" r=\"2\" fill=\"" << color_of(tag) << "\" fill-opacity=\"0.6\"/>\n";
  }
  out << "</svg>\n";

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << out.str();
}

std::string sanitize(const std::string& tag) {
  std::string out;
  for (char c : tag) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out.empty() ? "untagged" : out;
}

}  // namespace

std::vector<std::string> render_scatter(const Embedding2D& e, const std::string& out_prefix) {
  if (e.x.empty()) throw ParamError("render_scatter: empty embedding");
  std::vector<std::string> tags;
  for (const auto& t : e.dataset_tags)
    if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
  if (tags.empty()) tags.push_back("");

  std::vector<std::string> written;
  for (const auto& tag : tags) {
    const std::string path = out_prefix + "_" + sanitize(tag) + ".svg";
    write_svg(e, {tag}, tags, path);
    written.push_back(path);
  }
  const std::string overlay = out_prefix + "_overlay.svg";
  write_svg(e, tags, tags, overlay);
  written.push_back(overlay);
  return written;
}

}  // namespace tsrep
