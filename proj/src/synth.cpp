#include "citypulse/synth.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "citypulse/lines.hpp"

namespace citypulse {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t per_user_seed(uint64_t seed, uint64_t user_index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(user_index + 0x51ed2701ULL));
}

std::string user_name(uint64_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%08llu", (unsigned long long)index);
  return buf;
}

// Five-month observation span.
constexpr std::chrono::year_month_day kSpanFirst{std::chrono::year{2011},
                                                 std::chrono::November,
                                                 std::chrono::day{1}};
constexpr std::chrono::year_month_day kSpanLast{std::chrono::year{2012},
                                                std::chrono::March,
                                                std::chrono::day{30}};

struct HourWindow {
  int start_hour;
  int length_hours;
};

HourWindow hour_window(HourGroup h) {
  switch (h) {
    case HourGroup::Morning: return {5, 6};
    case HourGroup::Noon: return {11, 4};
    case HourGroup::Afternoon: return {15, 5};
    case HourGroup::Night: return {20, 9}; // wraps past midnight
  }
  return {0, 0};
}

// Dates in the span belonging to each day group (a slot's date is the day the
// window starts on, so a 2am call belongs to the previous date).
std::array<std::vector<std::chrono::sys_days>, kNumDayGroups> span_dates() {
  using namespace std::chrono;
  std::array<std::vector<sys_days>, kNumDayGroups> out;
  for (sys_days d = sys_days{kSpanFirst}; d <= sys_days{kSpanLast}; d += days{1})
    out[size_t(day_group_of(weekday{d}))].push_back(d);
  return out;
}

} // namespace

uint64_t SynthRng::next_u64() {
  state_ = splitmix64(state_);
  return state_;
}

double SynthRng::next_unit() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t SynthRng::next_bounded(uint64_t bound) {
  uint64_t threshold = (~bound + 1) % bound;
  for (;;) {
    uint64_t x = next_u64();
    if (x >= threshold) return x % bound;
  }
}

int SynthRng::next_poisson(double lambda) {
  double limit = std::exp(-lambda);
  double p = 1.0;
  int k = 0;
  do {
    ++k;
    p *= next_unit();
  } while (p > limit);
  return k - 1;
}

MobilityKernel identity_kernel(int n_communes) {
  MobilityKernel kernel(n_communes);
  for (int home = 0; home < n_communes; ++home) {
    kernel[home].assign(kNumSlots, std::vector<double>(n_communes, 0.0));
    for (int s = 0; s < kNumSlots; ++s) kernel[home][s][home] = 1.0;
  }
  return kernel;
}

MobilityKernel majority_home_kernel(int n_communes, double home_mass) {
  if (home_mass <= 0.0 || home_mass > 1.0)
    throw SynthError("home_mass must be in (0,1]");
  double rest = n_communes > 1 ? (1.0 - home_mass) / (n_communes - 1) : 0.0;
  MobilityKernel kernel(n_communes);
  for (int home = 0; home < n_communes; ++home) {
    std::vector<double> row(n_communes, rest);
    row[home] = n_communes > 1 ? home_mass : 1.0;
    kernel[home].assign(kNumSlots, row);
  }
  return kernel;
}

void validate_config(const ScenarioConfig& config) {
  if (config.n_communes < 1) throw SynthError("need at least one commune");
  if (config.users_per_commune < 1) throw SynthError("need at least one user per commune");
  if (config.calls_per_slot_lambda <= 0) throw SynthError("lambda must be positive");
  if (config.census_factor < 1) throw SynthError("census factor must be positive");
  const MobilityKernel& kernel = config.mobility_kernel;
  if (kernel.empty()) return;
  if (int(kernel.size()) != config.n_communes)
    throw SynthError("kernel must have one block per home commune");
  for (const auto& block : kernel) {
    if (int(block.size()) != kNumSlots)
      throw SynthError("kernel block must have one row per slot");
    for (const auto& row : block) {
      if (int(row.size()) != config.n_communes)
        throw SynthError("kernel row length must equal commune count");
      double sum = 0;
      for (double v : row) {
        if (v < 0) throw SynthError("kernel entries must be non-negative");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw SynthError("kernel row does not sum to 1");
    }
  }
}

GroundTruth make_ground_truth(const ScenarioConfig& config) {
  validate_config(config);
  const MobilityKernel kernel = config.mobility_kernel.empty()
                                    ? identity_kernel(config.n_communes)
                                    : config.mobility_kernel;
  GroundTruth truth;
  uint64_t g = 0;
  for (int home = 0; home < config.n_communes; ++home) {
    truth.census.pop[home + 1] =
        int64_t(config.users_per_commune) * config.census_factor;
    for (int u = 0; u < config.users_per_commune; ++u, ++g)
      truth.homes.emplace(user_name(g), home + 1);
  }
  int n = config.n_communes;
  truth.expected_cpm.assign(kNumSlots, {});
  for (int s = 0; s < kNumSlots; ++s) {
    auto& cpm = truth.expected_cpm[s];
    cpm.assign(n, std::vector<double>(n, 0.0));
    for (int present = 0; present < n; ++present) {
      double row_sum = 0;
      for (int home = 0; home < n; ++home) {
        double w = double(truth.census.pop.at(home + 1)) * kernel[home][s][present];
        cpm[present][home] = w;
        row_sum += w;
      }
      if (row_sum == 0) continue;
      for (int home = 0; home < n; ++home) cpm[present][home] /= row_sum;
    }
  }
  return truth;
}

void generate_records(const ScenarioConfig& config,
                      const std::function<void(const CdrRecord&)>& sink) {
  validate_config(config);
  const MobilityKernel kernel = config.mobility_kernel.empty()
                                    ? identity_kernel(config.n_communes)
                                    : config.mobility_kernel;
  const auto dates = span_dates();
  const uint64_t total_users =
      uint64_t(config.n_communes) * config.users_per_commune;

  CdrRecord rec;
  uint64_t g = 0;
  for (int home = 0; home < config.n_communes; ++home) {
    for (int u = 0; u < config.users_per_commune; ++u, ++g) {
      SynthRng rng(per_user_seed(config.seed, g));
      rec.caller = user_name(g);
      for (int s = 0; s < kNumSlots; ++s) {
        TimeSlot slot = TimeSlot::from_index(s);
        int k = rng.next_poisson(config.calls_per_slot_lambda);
        if (config.guarantee_min_calls && k == 0) k = 1;
        const auto& row = kernel[home][s];
        const auto& slot_dates = dates[size_t(slot.day)];
        HourWindow window = hour_window(slot.hour);
        for (int call = 0; call < k; ++call) {
          // Commune draw from the kernel row.
          double x = rng.next_unit();
          int commune_idx = 0;
          double acc = 0;
          for (int c = 0; c < config.n_communes; ++c) {
            acc += row[c];
            if (x < acc) {
              commune_idx = c;
              break;
            }
            commune_idx = c; // rounding spill lands on the last commune
          }
          auto date = slot_dates[rng.next_bounded(slot_dates.size())];
          int64_t offset = int64_t(window.start_hour) * 3600 +
                           int64_t(rng.next_bounded(
                               uint64_t(window.length_hours) * 3600));
          int64_t day_secs = date.time_since_epoch().count() * int64_t(86400);
          rec.timestamp = CivilDateTime::from_epoch_seconds(day_secs + offset);
          rec.duration = 10 + int64_t(rng.next_bounded(590));
          rec.callee = user_name(rng.next_bounded(total_users));
          rec.antenna = "a" + std::to_string(commune_idx + 1);
          sink(rec);
        }
      }
    }
  }
}

std::string scenario_geometry_geojson(int n_communes) {
  int grid_w = int(std::ceil(std::sqrt(double(n_communes))));
  nlohmann::json features = nlohmann::json::array();
  for (int c = 0; c < n_communes; ++c) {
    double x0 = c % grid_w;
    double y0 = c / grid_w;
    nlohmann::json ring = {{x0, y0}, {x0 + 1, y0}, {x0 + 1, y0 + 1},
                           {x0, y0 + 1}, {x0, y0}};
    features.push_back(
        {{"type", "Feature"},
         {"properties",
          {{"commune", c + 1}, {"name", "zone-" + std::to_string(c + 1)}}},
         {"geometry",
          {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}}}});
  }
  nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(1);
}

ScenarioFiles generate_scenario(const ScenarioConfig& config,
                                const std::string& out_dir) {
  validate_config(config);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  ScenarioFiles files;
  files.cdr = (fs::path(out_dir) / "cdr.csv").string();
  files.antennas = (fs::path(out_dir) / "antennas.csv").string();
  files.geometry = (fs::path(out_dir) / "geometry.geojson").string();
  files.census = (fs::path(out_dir) / "census.csv").string();
  files.ground_truth = (fs::path(out_dir) / "ground_truth.json").string();

  GroundTruth truth = make_ground_truth(config);

  {
    std::ofstream out(files.cdr);
    if (!out) throw IoError("cannot write " + files.cdr);
    out << "caller,callee,timestamp,duration,antenna\n";
    generate_records(config, [&](const CdrRecord& rec) {
      out << rec.caller << ',' << rec.callee << ',' << rec.timestamp.to_iso()
          << ',' << rec.duration << ',' << rec.antenna << '\n';
    });
  }
  {
    std::ofstream out(files.antennas);
    if (!out) throw IoError("cannot write " + files.antennas);
    out << "antenna_id,lon,lat\n";
    int grid_w = int(std::ceil(std::sqrt(double(config.n_communes))));
    char buf[64];
    for (int c = 0; c < config.n_communes; ++c) {
      std::snprintf(buf, sizeof(buf), "a%d,%.1f,%.1f\n", c + 1,
                    c % grid_w + 0.5, double(c / grid_w) + 0.5);
      out << buf;
    }
  }
  {
    std::ofstream out(files.geometry);
    if (!out) throw IoError("cannot write " + files.geometry);
    out << scenario_geometry_geojson(config.n_communes) << '\n';
  }
  {
    std::ofstream out(files.census);
    if (!out) throw IoError("cannot write " + files.census);
    out << "commune_id,population\n";
    for (const auto& [c, pop] : truth.census.pop) out << c << ',' << pop << '\n';
  }
  {
    nlohmann::json doc;
    for (const auto& [user, home] : truth.homes) doc["homes"][user] = home;
    for (const auto& [c, pop] : truth.census.pop)
      doc["census"][std::to_string(c)] = pop;
    doc["expected_cpm"] = truth.expected_cpm;
    std::ofstream out(files.ground_truth);
    if (!out) throw IoError("cannot write " + files.ground_truth);
    out << doc.dump(1) << '\n';
  }
  return files;
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  GroundTruth truth;
  for (const auto& [user, home] : doc.at("homes").items())
    truth.homes.emplace(user, home.get<int>());
  for (const auto& [c, pop] : doc.at("census").items())
    truth.census.pop[std::stoi(c)] = pop.get<int64_t>();
  truth.expected_cpm =
      doc.at("expected_cpm").get<std::vector<std::vector<std::vector<double>>>>();
  return truth;
}

} // namespace citypulse
