#pragma once

#include <string>
#include <vector>

#include "citypulse/ingest.hpp"
#include "citypulse/population.hpp"

namespace citypulse {

struct DiffCell {
  CommuneId commune;
  HourGroup hour;
  double estimate;
  double survey;
  double rel_diff; // |estimate - survey| / survey
};

struct DiffReport {
  std::vector<DiffCell> cells; // sorted by rel_diff descending
  double average_rel_diff = 0.0;
  size_t skipped_zero = 0; // survey cells with value 0, excluded
  bool has_max() const { return !cells.empty(); }
  const DiffCell& max_cell() const { return cells.front(); }
};

// Compares estimates (one per MonThu hour group, absolute persons) against
// the survey; only cells present in the survey are scored. The metric is the
// mean absolute relative difference with the survey as denominator.
DiffReport compare(const std::vector<PopulationEstimate>& monthu_estimates,
                   const CommuneIndex& communes, const SurveyTable& survey);

// Same comparison over an arbitrary estimate table (used by reporting).
DiffReport compare_cells(
    const std::map<std::pair<CommuneId, HourGroup>, double>& estimates,
    const SurveyTable& survey);

void write_diff_report_csv(const DiffReport& report, const std::string& path);
void write_diff_report_json(const DiffReport& report, const std::string& path);

} // namespace citypulse
