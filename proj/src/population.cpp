#include "citypulse/population.hpp"

#include <algorithm>

namespace citypulse {

namespace {

constexpr int kHomeSlot =
    TimeSlot{DayGroup::MonThu, HourGroup::Night}.index();

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Unbiased bounded draw from a splitmix64 stream.
uint64_t bounded_draw(uint64_t state, uint64_t bound) {
  uint64_t threshold = (~bound + 1) % bound; // 2^64 mod bound
  for (;;) {
    state = splitmix64(state);
    if (state >= threshold) return state % bound;
  }
}

} // namespace

uint64_t user_stream_seed(uint64_t seed, const std::string& user) {
  return splitmix64(seed ^ fnv1a64(user));
}

std::pair<CommuneId, bool> detect_home(const CountTensor& tensor,
                                       const CommuneIndex& communes,
                                       uint64_t seed,
                                       const std::string& user) {
  uint32_t best = 0;
  std::vector<int> maximizers;
  for (int c = 0; c < communes.size(); ++c) {
    uint32_t v = tensor.at(kHomeSlot, c);
    if (v == 0) continue;
    if (v > best) {
      best = v;
      maximizers.assign(1, c);
    } else if (v == best) {
      maximizers.push_back(c);
    }
  }
  if (maximizers.empty())
    throw PopulationError("unfiltered user reached home detection: " + user);
  if (maximizers.size() == 1)
    return {communes.id_at(maximizers[0]), false};
  uint64_t pick = bounded_draw(user_stream_seed(seed, user), maximizers.size());
  return {communes.id_at(maximizers[size_t(pick)]), true};
}

HomeAssignment detect_homes(const UserTensors& tensors,
                            const std::vector<std::string>& users,
                            uint64_t seed) {
  HomeAssignment out;
  for (const auto& user : users) {
    const CountTensor* t = tensors.find(user);
    if (!t) throw PopulationError("no tensor for user " + user);
    auto [home, was_tie] = detect_home(*t, tensors.communes(), seed, user);
    out.home.emplace(user, home);
    if (was_tie) {
      ++out.tie_count;
      out.tie_users.push_back(user);
    }
  }
  return out;
}

ScalingFactors scaling_factors(const CensusTable& census,
                               const HomeAssignment& homes) {
  ScalingFactors out;
  for (const auto& [user, home] : homes.home) ++out.home_count[home];
  std::vector<CommuneId> empty;
  for (const auto& [c, pop] : census.pop) {
    auto it = out.home_count.find(c);
    if (it == out.home_count.end() || it->second == 0) {
      empty.push_back(c);
      continue;
    }
    out.factor[c] = double(pop) / double(it->second);
  }
  if (!empty.empty()) {
    std::string msg = "commune";
    for (CommuneId c : empty) msg += " " + std::to_string(c);
    msg += " has no resident sample; cannot scale";
    throw PopulationError(msg);
  }
  return out;
}

PopulationEstimate expected_population(const UserTensors& tensors,
                                       const std::vector<std::string>& users,
                                       const HomeAssignment& homes,
                                       const ScalingFactors& factors,
                                       TimeSlot slot) {
  const CommuneIndex& communes = tensors.communes();
  int n = communes.size();
  PopulationEstimate out;
  out.slot = slot;
  out.ep.assign(n, 0.0);
  out.ep_by_home.assign(n, std::vector<double>(n, 0.0));
  int s = slot.index();
  for (const auto& user : users) {
    const CountTensor* tensor = tensors.find(user);
    if (!tensor) throw PopulationError("no tensor for user " + user);
    uint64_t row_sum = tensor->slot_total(s);
    if (row_sum == 0) continue;
    CommuneId home = homes.home.at(user);
    int home_idx = communes.index_of(home);
    double f = factors.factor.at(home);
    for (int c = 0; c < n; ++c) {
      uint32_t count = tensor->at(s, c);
      if (count == 0) continue;
      double contribution = double(count) / double(row_sum) * f;
      out.ep_by_home[c][home_idx] += contribution;
    }
  }
  // ep is the row marginal of ep_by_home by construction.
  for (int c = 0; c < n; ++c)
    for (int h = 0; h < n; ++h) out.ep[c] += out.ep_by_home[c][h];
  return out;
}

std::vector<ProfilePoint> day_profile(
    const std::vector<PopulationEstimate>& estimates_for_day,
    const CommuneIndex& communes, std::optional<CommuneId> commune) {
  if (estimates_for_day.size() != kNumHourGroups)
    throw PopulationError("day profile needs all four hour groups");
  std::optional<int> only_idx;
  if (commune) {
    int idx = communes.index_of(*commune);
    if (idx < 0)
      throw PopulationError("unknown commune " + std::to_string(*commune));
    only_idx = idx;
  }
  std::vector<ProfilePoint> out;
  for (int c = 0; c < communes.size(); ++c) {
    if (only_idx && c != *only_idx) continue;
    for (int h = 0; h < kNumHourGroups; ++h) {
      const auto& est = estimates_for_day[h];
      out.push_back({communes.id_at(c), static_cast<HourGroup>(h),
                     est.ep[c] / 1000.0});
    }
  }
  return out;
}

CityPulseMatrix city_pulse_matrix(const PopulationEstimate& estimate,
                                  bool normalize_rows) {
  CityPulseMatrix out;
  out.slot = estimate.slot;
  out.cpm = estimate.ep_by_home;
  out.normalized = normalize_rows;
  if (normalize_rows) {
    for (auto& row : out.cpm) {
      double sum = 0;
      for (double v : row) sum += v;
      if (sum == 0) continue; // zero rows stay zero
      for (double& v : row) v /= sum;
    }
  }
  return out;
}

} // namespace citypulse
