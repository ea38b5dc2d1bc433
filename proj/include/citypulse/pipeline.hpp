#pragma once

#include <optional>
#include <string>
#include <vector>

#include "citypulse/geomap.hpp"
#include "citypulse/ingest.hpp"
#include "citypulse/ldm.hpp"
#include "citypulse/population.hpp"

namespace citypulse {

struct PipelineOptions {
  std::string cdr_path;
  std::string geometry_path;
  std::string census_path;
  // Exactly one of the two antenna sources.
  std::string antennas_path;    // registry CSV, mapped via point-in-polygon
  std::string antenna_map_path; // precomputed antenna_id,commune_id CSV
  uint32_t tau = 1;
  uint64_t seed = 0;
  int threads = 1;
  int64_t utc_offset_seconds = 0;
  bool count_callee = false; // also credit the callee at the same antenna
  std::string tensor_dump_path; // optional debug dump
};

struct PipelineResult {
  CommuneIndex communes;
  AntennaCommuneMap antenna_map;
  IngestStats stats;
  UserTensors tensors;
  std::vector<std::string> users; // filtered set, ascending
  HomeAssignment homes;
  ScalingFactors factors;
  std::vector<PopulationEstimate> estimates; // one per slot index
};

struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full batch run: ingest -> map -> accumulate -> filter -> homes -> scale ->
// EP for all 16 slots. Results are identical for any thread count.
PipelineResult run_pipeline(const PipelineOptions& options);

// Same tail of the pipeline over an already-materialized record stream.
PipelineResult run_pipeline_from_records(
    const std::vector<CdrRecord>& records, const AntennaCommuneMap& antenna_map,
    const CommuneIndex& communes, const CensusTable& census, uint32_t tau,
    uint64_t seed);

// Writes ep.csv, provenance.csv, cpm/<day>_<hour>.json and stats.json.
void write_pipeline_outputs(const PipelineResult& result,
                            const std::string& out_dir);

} // namespace citypulse
