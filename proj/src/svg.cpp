#include "citypulse/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace citypulse {

namespace {

constexpr int kWhite[3] = {255, 255, 255};
constexpr int kBlue[3] = {8, 48, 107};

const char* kSeriesPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                                "#76b7b2", "#edc948", "#b07aa1", "#9c755f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void open_svg(std::ostringstream& out, int w, int h) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
}

void text(std::ostringstream& out, double x, double y, const std::string& s,
          int size = 11, const char* anchor = "start",
          const std::string& extra = "") {
  out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\""
      << size << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor
      << "\"" << extra << ">" << s << "</text>\n";
}

// A few round tick values up to max.
std::vector<double> nice_ticks(double max) {
  if (max <= 0) return {0.0};
  double raw = max / 4.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = std::ceil(raw / mag) * mag;
  std::vector<double> ticks;
  for (double t = 0; t <= max + 1e-9; t += step) ticks.push_back(t);
  return ticks;
}

} // namespace

std::string value_color(double v) {
  v = std::clamp(v, 0.0, 1.0);
  char buf[8];
  int rgb[3];
  for (int i = 0; i < 3; ++i)
    rgb[i] = int(std::lround(kWhite[i] + v * (kBlue[i] - kWhite[i])));
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string render_grouped_bars(const std::string& title,
                                const std::vector<std::string>& group_labels,
                                const std::vector<std::string>& series_labels,
                                const std::vector<std::vector<double>>& values,
                                const std::string& y_label) {
  const int n_groups = int(group_labels.size());
  const int n_series = int(series_labels.size());
  const double bar_w = 14, gap = 18, left = 70, top = 50, plot_h = 300;
  const double group_w = n_series * bar_w + gap;
  const int width = int(left + n_groups * group_w + 160);
  const int height = int(top + plot_h + 60);

  double vmax = 0;
  for (const auto& row : values)
    for (double v : row) vmax = std::max(vmax, v);
  if (vmax <= 0) vmax = 1;
  auto ticks = nice_ticks(vmax);
  double scale_max = std::max(vmax, ticks.back());

  std::ostringstream out;
  open_svg(out, width, height);
  text(out, left, 24, title, 14);
  text(out, 16, top + plot_h / 2, y_label, 11, "middle",
       " transform=\"rotate(-90 16 " + fmt(top + plot_h / 2) + ")\"");

  for (double t : ticks) {
    double y = top + plot_h - t / scale_max * plot_h;
    out << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(y) << "\" x2=\""
        << fmt(left + n_groups * group_w) << "\" y2=\"" << fmt(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    text(out, left - 8, y + 4, fmt(t), 10, "end");
  }

  for (int g = 0; g < n_groups; ++g) {
    double gx = left + g * group_w;
    for (int s = 0; s < n_series; ++s) {
      double v = values[g][s];
      double h = v / scale_max * plot_h;
      out << "<rect x=\"" << fmt(gx + s * bar_w) << "\" y=\""
          << fmt(top + plot_h - h) << "\" width=\"" << fmt(bar_w - 2)
          << "\" height=\"" << fmt(h) << "\" fill=\""
          << kSeriesPalette[s % 8] << "\"/>\n";
    }
    text(out, gx + (n_series * bar_w) / 2, top + plot_h + 16, group_labels[g],
         10, "middle");
  }

  double lx = left + n_groups * group_w + 20;
  for (int s = 0; s < n_series; ++s) {
    double ly = top + s * 18;
    out << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly)
        << "\" width=\"12\" height=\"12\" fill=\"" << kSeriesPalette[s % 8]
        << "\"/>\n";
    text(out, lx + 18, ly + 10, series_labels[s], 10);
  }

  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\""
      << fmt(left) << "\" y2=\"" << fmt(top + plot_h)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + plot_h)
      << "\" x2=\"" << fmt(left + n_groups * group_w) << "\" y2=\""
      << fmt(top + plot_h) << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out << "</svg>\n";
  return out.str();
}

std::string render_heatmap(const std::string& title,
                           const std::vector<CommuneId>& commune_ids,
                           const std::vector<std::vector<double>>& matrix) {
  const int n = int(commune_ids.size());
  const double cell = 28, left = 70, top = 60;
  const int width = int(left + n * cell + 120);
  const int height = int(top + n * cell + 50);

  std::ostringstream out;
  open_svg(out, width, height);
  text(out, left, 24, title, 14);
  text(out, left + n * cell / 2, 44, "home commune", 11, "middle");
  text(out, 20, top + n * cell / 2, "present commune", 11, "middle",
       " transform=\"rotate(-90 20 " + fmt(top + n * cell / 2) + ")\"");

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out << "<rect x=\"" << fmt(left + j * cell) << "\" y=\""
          << fmt(top + i * cell) << "\" width=\"" << fmt(cell) << "\" height=\""
          << fmt(cell) << "\" fill=\"" << value_color(matrix[i][j])
          << "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
    }
    text(out, left - 6, top + i * cell + cell / 2 + 4,
         std::to_string(commune_ids[i]), 10, "end");
    text(out, left + i * cell + cell / 2, top + n * cell + 14,
         std::to_string(commune_ids[i]), 10, "middle");
  }

  // Vertical color legend 1.0 -> 0.0.
  double lx = left + n * cell + 30, lh = n * cell;
  const int steps = 64;
  for (int s = 0; s < steps; ++s) {
    double v = 1.0 - double(s) / (steps - 1);
    out << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(top + s * lh / steps)
        << "\" width=\"16\" height=\"" << fmt(lh / steps + 0.5) << "\" fill=\""
        << value_color(v) << "\"/>\n";
  }
  text(out, lx + 22, top + 10, "1.0", 10);
  text(out, lx + 22, top + lh, "0.0", 10);
  out << "</svg>\n";
  return out.str();
}

std::string render_choropleth(const std::vector<CommuneGeometry>& geoms,
                              const std::vector<double>& values,
                              CommuneId target, double scale_max) {
  double min_lon = 1e300, max_lon = -1e300, min_lat = 1e300, max_lat = -1e300;
  for (const auto& g : geoms) {
    min_lon = std::min(min_lon, g.min_lon);
    max_lon = std::max(max_lon, g.max_lon);
    min_lat = std::min(min_lat, g.min_lat);
    max_lat = std::max(max_lat, g.max_lat);
  }
  const double pad = 20, box = 480;
  double span = std::max(max_lon - min_lon, max_lat - min_lat);
  if (span <= 0) span = 1;
  double px_per_deg = box / span;
  auto sx = [&](double lon) { return pad + (lon - min_lon) * px_per_deg; };
  auto sy = [&](double lat) { return pad + (max_lat - lat) * px_per_deg; };
  const int width = int(2 * pad + (max_lon - min_lon) * px_per_deg) + 1;
  const int height = int(2 * pad + (max_lat - min_lat) * px_per_deg) + 1;

  std::ostringstream out;
  open_svg(out, width, height);
  if (scale_max <= 0) scale_max = 1;

  auto emit = [&](const CommuneGeometry& g, size_t idx, bool is_target) {
    std::string path;
    for (const auto& poly : g.polygons)
      for (const auto& ring : poly.rings) {
        for (size_t i = 0; i + 1 < ring.size(); ++i)
          path += (i == 0 ? "M" : "L") + fmt(sx(ring[i].lon)) + " " +
                  fmt(sy(ring[i].lat)) + " ";
        path += "Z ";
      }
    out << "<path d=\"" << path << "\" fill=\""
        << value_color(values[idx] / scale_max) << "\" stroke=\""
        << (is_target ? "#8a2be2" : "#666666") << "\" stroke-width=\""
        << (is_target ? "3" : "1") << "\" fill-rule=\"evenodd\"/>\n";
  };
  // Target drawn last so its violet outline stays on top.
  for (size_t i = 0; i < geoms.size(); ++i)
    if (geoms[i].id != target) emit(geoms[i], i, false);
  for (size_t i = 0; i < geoms.size(); ++i)
    if (geoms[i].id == target) emit(geoms[i], i, true);
  out << "</svg>\n";
  return out.str();
}

std::string render_scale_legend(double scale_max, const std::string& unit) {
  const int steps = 64;
  const double top = 20, lh = 300, lx = 20;
  std::ostringstream out;
  open_svg(out, 140, int(top + lh + 30));
  if (scale_max <= 0) scale_max = 1;
  for (int s = 0; s < steps; ++s) {
    double v = 1.0 - double(s) / (steps - 1);
    out << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(top + s * lh / steps)
        << "\" width=\"20\" height=\"" << fmt(lh / steps + 0.5) << "\" fill=\""
        << value_color(v) << "\"/>\n";
  }
  for (double frac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double y = top + (1.0 - frac) * lh;
    text(out, lx + 26, y + 4, fmt(frac * scale_max), 10);
  }
  text(out, lx, top + lh + 22, unit, 10);
  out << "</svg>\n";
  return out.str();
}

} // namespace citypulse
