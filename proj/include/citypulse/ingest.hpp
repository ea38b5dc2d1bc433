#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <map>
#include <string>
#include <vector>

#include "citypulse/geomap.hpp"
#include "citypulse/timegrid.hpp"

namespace citypulse {

struct CdrRecord {
  std::string caller;
  std::string callee;
  CivilDateTime timestamp;
  int64_t duration = 0; // seconds; parsed but unused downstream
  std::string antenna;
};

struct CensusTable {
  std::map<CommuneId, int64_t> pop;

  int64_t total() const {
    int64_t t = 0;
    for (const auto& [c, p] : pop) t += p;
    return t;
  }
};

struct SurveyTable {
  std::map<std::pair<CommuneId, HourGroup>, double> estimate;
};

struct IngestStats {
  uint64_t total_lines = 0;
  uint64_t parsed = 0;
  uint64_t dropped_parse = 0;
  uint64_t dropped_unmapped_antenna = 0;

  IngestStats& operator+=(const IngestStats& o) {
    total_lines += o.total_lines;
    parsed += o.parsed;
    dropped_parse += o.dropped_parse;
    dropped_unmapped_antenna += o.dropped_unmapped_antenna;
    return *this;
  }
};

struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses one CDR data line (no header). Timestamp either ISO-8601 or epoch
// seconds, selected by `epoch_timestamps`. False on malformed input.
bool parse_cdr_line(std::string_view line, bool epoch_timestamps, CdrRecord& out);

// Streams a CDR CSV (header `caller,callee,timestamp,duration,antenna`),
// invoking `sink` per well-formed record. Malformed lines are counted and
// skipped. The timestamp format is auto-detected from the first data row.
// `utc_offset_seconds` shifts every timestamp at parse time.
IngestStats stream_cdr(const std::string& path,
                       const std::function<void(const CdrRecord&)>& sink,
                       int64_t utc_offset_seconds = 0);

// CSV `commune_id,population`; must cover every commune in `communes` with a
// positive count.
CensusTable load_census(const std::string& path,
                        const std::vector<CommuneId>& communes);

// CSV `commune_id,hour_group,people`; sparse over (commune, hour group).
SurveyTable load_survey(const std::string& path);

} // namespace citypulse
