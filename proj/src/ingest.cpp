#include "citypulse/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "citypulse/lines.hpp"

namespace citypulse {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool parse_i64(std::string_view s, int64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(std::string(s), &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

} // namespace

bool parse_cdr_line(std::string_view line, bool epoch_timestamps, CdrRecord& out) {
  auto f = split_csv(line);
  if (f.size() != 5) return false;
  if (f[0].empty() || f[1].empty() || f[4].empty()) return false;
  if (epoch_timestamps) {
    int64_t secs;
    if (!parse_i64(f[2], secs)) return false;
    out.timestamp = CivilDateTime::from_epoch_seconds(secs);
  } else {
    auto ts = parse_iso_datetime(f[2]);
    if (!ts) return false;
    out.timestamp = *ts;
  }
  if (!parse_i64(f[3], out.duration) || out.duration < 0) return false;
  out.caller = std::string(f[0]);
  out.callee = std::string(f[1]);
  out.antenna = std::string(f[4]);
  return true;
}

IngestStats stream_cdr(const std::string& path,
                       const std::function<void(const CdrRecord&)>& sink,
                       int64_t utc_offset_seconds) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw IngestError("empty CDR file: " + path);

  IngestStats stats;
  CdrRecord rec;
  bool format_known = false;
  bool epoch_timestamps = false;
  while (reader.next(line)) {
    if (line.empty()) continue;
    ++stats.total_lines;
    if (!format_known) {
      // Auto-detect from the first data row.
      auto f = split_csv(line);
      if (f.size() == 5) {
        epoch_timestamps = all_digits(f[2]);
        format_known = true;
      }
    }
    if (!parse_cdr_line(line, epoch_timestamps, rec)) {
      ++stats.dropped_parse;
      continue;
    }
    if (utc_offset_seconds != 0)
      rec.timestamp = CivilDateTime::from_epoch_seconds(
          rec.timestamp.to_epoch_seconds() + utc_offset_seconds);
    ++stats.parsed;
    sink(rec);
  }
  return stats;
}

CensusTable load_census(const std::string& path,
                        const std::vector<CommuneId>& communes) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw IngestError("empty census file: " + path);
  CensusTable table;
  size_t lineno = 1;
  while (reader.next(line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv(line);
    int commune;
    int64_t population;
    if (f.size() != 2 || !parse_int(f[0], commune) || !parse_i64(f[1], population))
      throw IngestError("census line " + std::to_string(lineno) +
                        ": expected commune_id,population");
    if (population <= 0)
      throw IngestError("census line " + std::to_string(lineno) +
                        ": non-positive population for commune " +
                        std::to_string(commune));
    if (!table.pop.emplace(commune, population).second)
      throw IngestError("census line " + std::to_string(lineno) +
                        ": duplicate commune " + std::to_string(commune));
  }
  std::vector<CommuneId> missing;
  for (CommuneId c : communes)
    if (!table.pop.count(c)) missing.push_back(c);
  if (!missing.empty()) {
    std::string msg = "census incomplete; missing communes:";
    for (CommuneId c : missing) msg += " " + std::to_string(c);
    throw IngestError(msg);
  }
  return table;
}

SurveyTable load_survey(const std::string& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw IngestError("empty survey file: " + path);
  SurveyTable table;
  size_t lineno = 1;
  while (reader.next(line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv(line);
    int commune;
    double people;
    if (f.size() != 3 || !parse_int(f[0], commune) || !parse_double(f[2], people))
      throw IngestError("survey line " + std::to_string(lineno) +
                        ": expected commune_id,hour_group,people");
    auto hg = parse_hour_group(f[1]);
    if (!hg)
      throw IngestError("survey line " + std::to_string(lineno) +
                        ": unknown hour group \"" + std::string(f[1]) + "\"");
    if (people < 0)
      throw IngestError("survey line " + std::to_string(lineno) +
                        ": negative people count");
    if (!table.estimate.emplace(std::make_pair(commune, *hg), people).second)
      throw IngestError("survey line " + std::to_string(lineno) +
                        ": duplicate survey cell");
  }
  return table;
}

} // namespace citypulse
