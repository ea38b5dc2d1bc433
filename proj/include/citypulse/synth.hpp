#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "citypulse/ingest.hpp"
#include "citypulse/timegrid.hpp"

namespace citypulse {

struct SynthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic counter-based generator; identical sequences on every
// platform, splittable into independent per-user streams.
class SynthRng {
 public:
  explicit SynthRng(uint64_t seed) : state_(seed) {}
  uint64_t next_u64();
  double next_unit(); // [0,1)
  uint64_t next_bounded(uint64_t bound);
  int next_poisson(double lambda);

 private:
  uint64_t state_;
};

// kernel[home_idx][slot][present_idx]; each row a probability vector.
using MobilityKernel = std::vector<std::vector<std::vector<double>>>;

MobilityKernel identity_kernel(int n_communes);
// Home commune gets `home_mass`, the rest split evenly.
MobilityKernel majority_home_kernel(int n_communes, double home_mass);

struct ScenarioConfig {
  int n_communes = 3;
  int users_per_commune = 100;
  double calls_per_slot_lambda = 5.0;
  MobilityKernel mobility_kernel; // empty selects the identity kernel
  bool guarantee_min_calls = true;
  uint64_t seed = 1;
  int64_t census_factor = 10; // census = planted residents x this
};

struct GroundTruth {
  std::map<std::string, CommuneId> homes;
  CensusTable census;
  // expected_cpm[slot][present_idx][home_idx], rows normalized.
  std::vector<std::vector<std::vector<double>>> expected_cpm;
};

struct ScenarioFiles {
  std::string cdr;
  std::string antennas;
  std::string geometry;
  std::string census;
  std::string ground_truth;
};

void validate_config(const ScenarioConfig& config);

GroundTruth make_ground_truth(const ScenarioConfig& config);

// Streams every synthetic call in deterministic user order. Timestamps are
// drawn uniformly within each slot's real intervals over a five-month span.
void generate_records(const ScenarioConfig& config,
                      const std::function<void(const CdrRecord&)>& sink);

// Writes cdr.csv, antennas.csv, geometry.geojson, census.csv and
// ground_truth.json under out_dir. Byte-identical for identical configs.
ScenarioFiles generate_scenario(const ScenarioConfig& config,
                                const std::string& out_dir);

// Commune layout used by the generator: unit squares on a grid, one antenna
// ("a<commune_id>") at each centroid.
std::string scenario_geometry_geojson(int n_communes);

GroundTruth load_ground_truth(const std::string& path);

} // namespace citypulse
