#pragma once

#include <string>
#include <vector>

#include "citypulse/geomap.hpp"

namespace citypulse {

// White (v=0) to dark blue (v=1); each 8-bit channel is
// lround(white + v * (blue - white)), v clamped to [0,1].
std::string value_color(double v);

// Grouped bar chart: one cluster per group label, one bar per series label.
// values[group][series]. Output has no timestamps or generated ids.
std::string render_grouped_bars(const std::string& title,
                                const std::vector<std::string>& group_labels,
                                const std::vector<std::string>& series_labels,
                                const std::vector<std::vector<double>>& values,
                                const std::string& y_label);

// N x N heatmap of a row-normalized matrix, axes labeled by commune id.
std::string render_heatmap(const std::string& title,
                           const std::vector<CommuneId>& commune_ids,
                           const std::vector<std::vector<double>>& matrix);

// City map shaded by `values` (one per commune, same order as geoms) on a
// shared scale [0, scale_max]; the target commune is outlined in violet.
std::string render_choropleth(const std::vector<CommuneGeometry>& geoms,
                              const std::vector<double>& values,
                              CommuneId target, double scale_max);

// Stand-alone color-scale legend for choropleth pairs sharing one scale.
std::string render_scale_legend(double scale_max, const std::string& unit);

} // namespace citypulse
