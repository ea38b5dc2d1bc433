#include "citypulse/validation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "citypulse/lines.hpp"

namespace citypulse {

DiffReport compare_cells(
    const std::map<std::pair<CommuneId, HourGroup>, double>& estimates,
    const SurveyTable& survey) {
  DiffReport report;
  double sum = 0.0;
  for (const auto& [key, surveyed] : survey.estimate) {
    auto it = estimates.find(key);
    if (it == estimates.end()) continue;
    if (surveyed == 0.0) {
      ++report.skipped_zero;
      continue;
    }
    double rel = std::abs(it->second - surveyed) / surveyed;
    report.cells.push_back({key.first, key.second, it->second, surveyed, rel});
    sum += rel;
  }
  if (!report.cells.empty()) report.average_rel_diff = sum / report.cells.size();
  std::stable_sort(report.cells.begin(), report.cells.end(),
                   [](const DiffCell& a, const DiffCell& b) {
                     return a.rel_diff > b.rel_diff;
                   });
  return report;
}

DiffReport compare(const std::vector<PopulationEstimate>& monthu_estimates,
                   const CommuneIndex& communes, const SurveyTable& survey) {
  std::map<std::pair<CommuneId, HourGroup>, double> cells;
  for (const auto& est : monthu_estimates) {
    for (int c = 0; c < communes.size(); ++c)
      cells[{communes.id_at(c), est.slot.hour}] = est.ep[c];
  }
  return compare_cells(cells, survey);
}

void write_diff_report_csv(const DiffReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write diff report: " + path);
  out << "# metric: mean absolute relative difference, survey as denominator\n";
  out << "commune_id,hour_group,estimate,survey,rel_diff\n";
  char buf[160];
  for (const auto& cell : report.cells) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.6f,%.6f,%.6f\n", cell.commune,
                  std::string(to_string(cell.hour)).c_str(), cell.estimate,
                  cell.survey, cell.rel_diff);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "average,,,,%.6f\n", report.average_rel_diff);
  out << buf;
}

void write_diff_report_json(const DiffReport& report, const std::string& path) {
  nlohmann::json doc;
  doc["metric"] = "mean_abs_rel_diff_vs_survey";
  doc["average_rel_diff"] = report.average_rel_diff;
  doc["skipped_zero"] = report.skipped_zero;
  auto cells = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    cells.push_back({{"commune", cell.commune},
                     {"hour_group", std::string(to_string(cell.hour))},
                     {"estimate", cell.estimate},
                     {"survey", cell.survey},
                     {"rel_diff", cell.rel_diff}});
  }
  doc["cells"] = std::move(cells);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write diff report: " + path);
  out << doc.dump(2) << '\n';
}

} // namespace citypulse
