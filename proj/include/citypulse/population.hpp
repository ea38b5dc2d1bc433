#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citypulse/ingest.hpp"
#include "citypulse/ldm.hpp"

namespace citypulse {

struct PopulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HomeAssignment {
  std::map<std::string, CommuneId> home;
  uint64_t tie_count = 0;
  std::vector<std::string> tie_users;
};

struct ScalingFactors {
  std::map<CommuneId, double> factor;       // F_c = pop_c / resident sample
  std::map<CommuneId, uint64_t> home_count; // sampled residents per commune
};

// Expected people per commune for one slot, optionally resolved by home.
struct PopulationEstimate {
  TimeSlot slot;
  std::vector<double> ep;                  // [commune_idx]
  std::vector<std::vector<double>> ep_by_home; // [present_idx][home_idx]
};

struct CityPulseMatrix {
  TimeSlot slot;
  std::vector<std::vector<double>> cpm; // [present_idx][home_idx]
  bool normalized = false;
};

// Stable 64-bit hash of the user id mixed with the global seed; drives
// tie-breaking only, so parallel scheduling cannot change outcomes.
uint64_t user_stream_seed(uint64_t seed, const std::string& user);

// Argmax over the (MonThu, Night) row, communes scanned in ascending id
// order; exact-count ties broken uniformly at random from the per-user
// stream.
std::pair<CommuneId, bool> detect_home(const CountTensor& tensor,
                                       const CommuneIndex& communes,
                                       uint64_t seed,
                                       const std::string& user);

HomeAssignment detect_homes(const UserTensors& tensors,
                            const std::vector<std::string>& users,
                            uint64_t seed);

// F_c = pop_c / #{residents sampled in c}; every census commune must have at
// least one sampled resident.
ScalingFactors scaling_factors(const CensusTable& census,
                               const HomeAssignment& homes);

// EP_[c] = sum_u P_u[slot][c] * F_home(u); users iterated in ascending id
// order so the floating-point sum is reproducible.
PopulationEstimate expected_population(const UserTensors& tensors,
                                       const std::vector<std::string>& users,
                                       const HomeAssignment& homes,
                                       const ScalingFactors& factors,
                                       TimeSlot slot);

struct ProfilePoint {
  CommuneId commune;
  HourGroup hour;
  double thousands;
};

// Morning..Night series per commune, values in thousands of people.
// `commune` narrows the series to a single commune.
std::vector<ProfilePoint> day_profile(
    const std::vector<PopulationEstimate>& estimates_for_day,
    const CommuneIndex& communes, std::optional<CommuneId> commune = {});

CityPulseMatrix city_pulse_matrix(const PopulationEstimate& estimate,
                                  bool normalize_rows);

} // namespace citypulse
