// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "citypulse/pipeline.hpp"
#include "citypulse/synth.hpp"
#include "citypulse/validation.hpp"

using namespace citypulse;
namespace fs = std::filesystem;

namespace {

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

struct InMemoryScenario {
  std::vector<CdrRecord> records;
  AntennaCommuneMap antenna_map;
  CommuneIndex communes;
  GroundTruth truth;
};

InMemoryScenario materialize(const ScenarioConfig& cfg) {
  InMemoryScenario sc;
  std::vector<CommuneId> ids;
  for (int c = 1; c <= cfg.n_communes; ++c) {
    ids.push_back(c);
    sc.antenna_map.mapping["a" + std::to_string(c)] = c;
  }
  sc.communes = CommuneIndex(ids);
  sc.truth = make_ground_truth(cfg);
  generate_records(cfg, [&](const CdrRecord& rec) { sc.records.push_back(rec); });
  return sc;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  size_t b_count = 0;
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++b_count;
  if (b_count != rel.size()) {
    why = "file counts differ";
    return false;
  }
  for (const auto& r : rel)
    if (slurp(a / r) != slurp(b / r)) {
      why = "mismatch in " + r.string();
      return false;
    }
  return true;
}

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "citypulse_acceptance";
  fs::create_directories(dir);
  return dir;
}

// ---- criterion 1 + 2 + 3 -------------------------------------------------

bool shared_sizes_checked = false;
std::string shared_sizes_error_1, shared_sizes_error_2, shared_sizes_error_3;
double shared_sizes_runtime = 0;

void run_shared_sizes() {
  if (shared_sizes_checked) return;
  shared_sizes_checked = true;
  double start = now_seconds();
  struct Size {
    int communes, users;
  };
  for (Size size : {Size{3, 200}, Size{15, 50}, Size{50, 20}}) {
    ScenarioConfig cfg;
    cfg.n_communes = size.communes;
    cfg.users_per_commune = size.users;
    cfg.calls_per_slot_lambda = 3.0;
    cfg.mobility_kernel = majority_home_kernel(size.communes, 0.6);
    cfg.seed = 100 + size.communes;
    auto sc = materialize(cfg);
    auto result = run_pipeline_from_records(sc.records, sc.antenna_map,
                                            sc.communes, sc.truth.census, 1, 7);

    double total_pop = double(sc.truth.census.total());
    for (const auto& est : result.estimates) {
      double total = 0;
      for (double v : est.ep) total += v;
      if (std::abs(total - total_pop) / total_pop > 1e-9)
        shared_sizes_error_1 = "conservation violated at n=" +
                               std::to_string(size.communes);
      for (int c = 0; c < sc.communes.size(); ++c) {
        double marginal = 0;
        for (int h = 0; h < sc.communes.size(); ++h)
          marginal += est.ep_by_home[c][h];
        double denom = std::max(std::abs(est.ep[c]), 1.0);
        if (std::abs(est.ep[c] - marginal) / denom > 1e-9)
          shared_sizes_error_2 = "marginal identity violated at n=" +
                                 std::to_string(size.communes);
      }
    }

    for (const auto& user : result.users) {
      auto ldm = normalize(*result.tensors.find(user));
      for (int s = 0; s < kNumSlots; ++s) {
        double sum = 0;
        for (int c = 0; c < sc.communes.size(); ++c) sum += ldm.at(s, c);
        if (std::abs(sum - 1.0) > 1e-12)
          shared_sizes_error_3 = "filtered row sum " + std::to_string(sum);
      }
    }
  }
  // Unpopulated rows must normalize to exact zeros.
  CountTensor sparse(3);
  sparse.at(0, 1) = 4;
  auto ldm = normalize(sparse);
  for (int s = 1; s < kNumSlots; ++s)
    for (int c = 0; c < 3; ++c)
      if (ldm.at(s, c) != 0.0) shared_sizes_error_3 = "zero row not exactly zero";
  shared_sizes_runtime = now_seconds() - start;
}

bool criterion_conservation(std::string& detail) {
  run_shared_sizes();
  char buf[96];
  std::snprintf(buf, sizeof(buf), "3/15/50 communes, 16 slots, %.2fs",
                shared_sizes_runtime);
  detail = buf;
  if (shared_sizes_runtime >= 10.0) {
    detail += " (limit 10s exceeded)";
    return false;
  }
  if (!shared_sizes_error_1.empty()) detail = shared_sizes_error_1;
  return shared_sizes_error_1.empty();
}

bool criterion_marginal(std::string& detail) {
  run_shared_sizes();
  detail = shared_sizes_error_2.empty() ? "all cells within 1e-9"
                                        : shared_sizes_error_2;
  return shared_sizes_error_2.empty();
}

bool criterion_row_stochastic(std::string& detail) {
  run_shared_sizes();
  detail = shared_sizes_error_3.empty() ? "all filtered rows within 1e-12"
                                        : shared_sizes_error_3;
  return shared_sizes_error_3.empty();
}

// ---- criterion 4: oracle equivalence ------------------------------------

// Brute-force recomputation from raw (user, slot, commune) call events using
// plain maps; shares no code with the pipeline's aggregation path.
struct OracleResult {
  std::map<int, std::map<CommuneId, double>> ep; // slot -> commune -> people
  std::map<int, std::map<std::pair<CommuneId, CommuneId>, double>> ep_by_home;
};

OracleResult brute_force(
    const std::vector<std::tuple<std::string, int, CommuneId>>& calls,
    const std::map<CommuneId, int64_t>& census) {
  std::map<std::string, std::map<int, std::map<CommuneId, int>>> counts;
  for (const auto& [user, slot, commune] : calls) ++counts[user][slot][commune];

  std::map<std::string, CommuneId> homes;
  int night = TimeSlot{DayGroup::MonThu, HourGroup::Night}.index();
  for (const auto& [user, by_slot] : counts) {
    int best = 0;
    CommuneId home = 0;
    for (const auto& [commune, n] : by_slot.at(night))
      if (n > best) best = n, home = commune;
    homes[user] = home;
  }
  std::map<CommuneId, int> residents;
  for (const auto& [user, home] : homes) ++residents[home];
  std::map<CommuneId, double> factor;
  for (const auto& [c, pop] : census) factor[c] = double(pop) / residents.at(c);

  OracleResult out;
  for (const auto& [user, by_slot] : counts) {
    double f = factor.at(homes.at(user));
    for (const auto& [slot, row] : by_slot) {
      double row_sum = 0;
      for (const auto& [commune, n] : row) row_sum += n;
      for (const auto& [commune, n] : row) {
        double contribution = double(n) / row_sum * f;
        out.ep[slot][commune] += contribution;
        out.ep_by_home[slot][{commune, homes.at(user)}] += contribution;
      }
    }
  }
  return out;
}

bool criterion_oracle(std::string& detail) {
  std::mt19937_64 rng(4242);
  double worst = 0;
  for (int instance = 0; instance < 50; ++instance) {
    int n_communes = 1 + int(rng() % 3);
    // Enough users that every commune can host at least one resident.
    int n_users = std::max(n_communes, 1 + int(rng() % 10));
    std::vector<CommuneId> ids;
    AntennaCommuneMap antenna_map;
    for (int c = 1; c <= n_communes; ++c) {
      ids.push_back(c);
      antenna_map.mapping["a" + std::to_string(c)] = c;
    }
    CommuneIndex communes(ids);
    CensusTable census;
    for (int c = 1; c <= n_communes; ++c) census.pop[c] = 10 + int64_t(rng() % 90);

    // Reference dates per slot, one per (day group, hour group).
    std::vector<std::string> slot_ts(kNumSlots);
    const char* dates[4] = {"2012-03-14", "2012-03-16", "2012-03-17",
                            "2012-03-18"};
    const char* hours[4] = {"T08:00:00", "T12:00:00", "T17:00:00", "T21:00:00"};
    for (int s = 0; s < kNumSlots; ++s)
      slot_ts[s] = std::string(dates[s / 4]) + hours[s % 4];

    const int night = TimeSlot{DayGroup::MonThu, HourGroup::Night}.index();
    std::vector<std::tuple<std::string, int, CommuneId>> calls;
    std::map<std::string, CommuneId> anchors;
    int budget = 100 - n_users * (kNumSlots + 2);
    for (int u = 0; u < n_users; ++u) {
      std::string user = "u" + std::to_string(u);
      for (int s = 0; s < kNumSlots; ++s)
        calls.emplace_back(user, s, CommuneId(1 + rng() % n_communes));
      // First users cover every commune so each has a resident sample.
      anchors[user] = u < n_communes ? CommuneId(u + 1)
                                     : CommuneId(1 + rng() % n_communes);
    }
    while (budget > 0 && rng() % 4 != 0) {
      std::string user = "u" + std::to_string(rng() % n_users);
      calls.emplace_back(user, int(rng() % kNumSlots),
                         CommuneId(1 + rng() % n_communes));
      --budget;
    }

    // Pile night calls on each user's anchor until it is the strict argmax;
    // oracle and pipeline then agree on homes without any shared RNG.
    {
      std::map<std::string, std::map<CommuneId, int>> night_counts;
      for (const auto& [user, slot, commune] : calls)
        if (slot == night) ++night_counts[user][commune];
      for (const auto& [user, anchor] : anchors) {
        auto& row = night_counts[user];
        int rivals = 0;
        for (const auto& [commune, n] : row)
          if (commune != anchor) rivals = std::max(rivals, n);
        while (row[anchor] <= rivals) {
          calls.emplace_back(user, night, anchor);
          ++row[anchor];
        }
        calls.emplace_back(user, night, anchor);
      }
    }

    std::vector<CdrRecord> records;
    for (const auto& [user, slot, commune] : calls) {
      CdrRecord rec;
      rec.caller = user;
      rec.callee = "x";
      rec.timestamp = *parse_iso_datetime(slot_ts[size_t(slot)]);
      rec.duration = 1;
      rec.antenna = "a" + std::to_string(commune);
      records.push_back(rec);
    }

    auto result = run_pipeline_from_records(records, antenna_map, communes,
                                            census, 1, 9);
    auto oracle = brute_force(calls, census.pop);
    for (int s = 0; s < kNumSlots; ++s) {
      const auto& est = result.estimates[s];
      for (int c = 0; c < n_communes; ++c) {
        double expect = 0;
        auto it = oracle.ep.find(s);
        if (it != oracle.ep.end()) {
          auto jt = it->second.find(c + 1);
          if (jt != it->second.end()) expect = jt->second;
        }
        worst = std::max(worst, std::abs(est.ep[c] - expect));
        for (int h = 0; h < n_communes; ++h) {
          double expect_bh = 0;
          auto kt = oracle.ep_by_home.find(s);
          if (kt != oracle.ep_by_home.end()) {
            auto lt = kt->second.find({c + 1, h + 1});
            if (lt != kt->second.end()) expect_bh = lt->second;
          }
          worst = std::max(worst, std::abs(est.ep_by_home[c][h] - expect_bh));
        }
      }
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "50 instances, max |diff| = %.3g", worst);
  detail = buf;
  return worst <= 1e-12;
}

// ---- criterion 5: stay-home degeneracy ----------------------------------

bool criterion_stay_home(std::string& detail) {
  ScenarioConfig cfg;
  cfg.n_communes = 4;
  cfg.users_per_commune = 64; // power of two keeps census / users exact
  cfg.calls_per_slot_lambda = 2.0;
  cfg.seed = 11;
  cfg.census_factor = 7;
  auto dir = work_dir() / "stay_home";
  auto files = generate_scenario(cfg, dir.string());

  PipelineOptions opts;
  opts.cdr_path = files.cdr;
  opts.geometry_path = files.geometry;
  opts.census_path = files.census;
  opts.antennas_path = files.antennas;
  auto result = run_pipeline(opts);
  auto truth = load_ground_truth(files.ground_truth);

  for (const auto& est : result.estimates) {
    for (int c = 0; c < result.communes.size(); ++c)
      if (est.ep[c] != double(truth.census.pop.at(result.communes.id_at(c)))) {
        detail = "EP != census at commune " +
                 std::to_string(result.communes.id_at(c));
        return false;
      }
    auto cpm = city_pulse_matrix(est, true);
    for (int i = 0; i < result.communes.size(); ++i)
      for (int j = 0; j < result.communes.size(); ++j)
        if (cpm.cpm[i][j] != (i == j ? 1.0 : 0.0)) {
          detail = "CPM not identity";
          return false;
        }
  }
  detail = "EP equals census exactly, CPM identity, all 16 slots";
  return true;
}

// ---- criterion 6: planted-truth recovery --------------------------------

bool criterion_planted(std::string& detail) {
  const int home_slot = TimeSlot{DayGroup::MonThu, HourGroup::Night}.index();
  int wrong_homes = 0;
  double worst_linf = 0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    ScenarioConfig cfg;
    cfg.n_communes = 3;
    cfg.users_per_commune = 2000;
    cfg.calls_per_slot_lambda = 20.0;
    cfg.mobility_kernel = majority_home_kernel(3, 0.6);
    // Night kernel concentrated at home so the empirical night mode is the
    // planted home for every user at this sample size.
    for (int home = 0; home < 3; ++home) {
      std::vector<double> night(3, 0.025);
      night[home] = 0.95;
      cfg.mobility_kernel[home][home_slot] = night;
    }
    cfg.seed = seed;
    auto sc = materialize(cfg);
    auto result = run_pipeline_from_records(sc.records, sc.antenna_map,
                                            sc.communes, sc.truth.census, 1,
                                            seed);
    if (result.users.size() != sc.truth.homes.size()) {
      detail = "filter dropped users at seed " + std::to_string(seed);
      return false;
    }
    for (const auto& [user, home] : result.homes.home)
      if (home != sc.truth.homes.at(user)) ++wrong_homes;

    for (int s = 0; s < kNumSlots; ++s) {
      auto cpm = city_pulse_matrix(result.estimates[s], true);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          worst_linf = std::max(
              worst_linf,
              std::abs(cpm.cpm[i][j] - sc.truth.expected_cpm[s][i][j]));
    }
  }
  char buf[112];
  std::snprintf(buf, sizeof(buf),
                "20 seeds, wrong homes = %d, CPM Linf = %.4f", wrong_homes,
                worst_linf);
  detail = buf;
  return wrong_homes == 0 && worst_linf <= 0.02;
}

// ---- criterion 7: determinism across thread counts ----------------------

bool criterion_determinism(std::string& detail) {
  ScenarioConfig cfg;
  cfg.n_communes = 5;
  cfg.users_per_commune = 40;
  cfg.calls_per_slot_lambda = 4.0;
  cfg.mobility_kernel = majority_home_kernel(5, 0.7);
  cfg.seed = 321;
  auto dir = work_dir() / "determinism";
  auto files = generate_scenario(cfg, dir.string());

  PipelineOptions opts;
  opts.cdr_path = files.cdr;
  opts.geometry_path = files.geometry;
  opts.census_path = files.census;
  opts.antennas_path = files.antennas;
  opts.seed = 77;

  auto out1 = dir / "out_t1";
  auto out8 = dir / "out_t8";
  fs::remove_all(out1);
  fs::remove_all(out8);
  opts.threads = 1;
  write_pipeline_outputs(run_pipeline(opts), out1.string());
  opts.threads = 8;
  write_pipeline_outputs(run_pipeline(opts), out8.string());

  std::string why;
  if (!dirs_identical(out1, out8, why)) {
    detail = why;
    return false;
  }
  detail = "1-thread and 8-thread output directories byte-identical";
  return true;
}

// ---- criterion 8: filter semantics --------------------------------------

bool criterion_filter(std::string& detail) {
  ScenarioConfig cfg;
  cfg.n_communes = 3;
  cfg.users_per_commune = 25;
  cfg.calls_per_slot_lambda = 2.0;
  cfg.mobility_kernel = majority_home_kernel(3, 0.7);
  cfg.seed = 99;
  auto sc = materialize(cfg);
  auto build = [&](const std::vector<CdrRecord>& records) {
    UserTensors tensors(sc.communes);
    for (const auto& rec : records) tensors.add_record(rec, sc.antenna_map);
    return tensors;
  };

  auto full = build(sc.records);
  auto kept = filter_users(full, 1);
  if (kept.size() != sc.truth.homes.size()) {
    detail = "guaranteed scenario lost users at tau=1";
    return false;
  }

  // Deleting one user's Friday-Morning calls drops exactly that user.
  const std::string victim = kept[kept.size() / 2];
  TimeSlot target{DayGroup::Friday, HourGroup::Morning};
  std::vector<CdrRecord> pruned;
  for (const auto& rec : sc.records)
    if (!(rec.caller == victim &&
          classify_timestamp(rec.timestamp) == target))
      pruned.push_back(rec);
  auto kept_pruned = filter_users(build(pruned), 1);
  if (kept_pruned.size() != kept.size() - 1 ||
      std::find(kept_pruned.begin(), kept_pruned.end(), victim) !=
          kept_pruned.end()) {
    detail = "pruning Friday-Morning did not drop exactly the victim";
    return false;
  }

  // Monotone over random, non-guaranteed scenarios.
  for (uint64_t seed : {5ULL, 6ULL, 7ULL}) {
    ScenarioConfig rnd = cfg;
    rnd.guarantee_min_calls = false;
    rnd.calls_per_slot_lambda = 1.5;
    rnd.seed = seed;
    auto rsc = materialize(rnd);
    auto tensors = build(rsc.records);
    for (uint32_t tau = 1; tau <= 3; ++tau) {
      auto lower = filter_users(tensors, tau);
      auto higher = filter_users(tensors, tau + 1);
      if (!std::includes(lower.begin(), lower.end(), higher.begin(),
                         higher.end())) {
        detail = "UserSet(tau+1) not a subset of UserSet(tau)";
        return false;
      }
    }
  }
  detail = "tau=1 keeps all; victim drop exact; monotone over 3 seeds";
  return true;
}

// ---- criterion 9: validation metric sanity ------------------------------

bool criterion_validation(std::string& detail) {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  SurveyTable survey;
  std::map<std::pair<CommuneId, HourGroup>, double> est;
  for (int c = 1; c <= 250; ++c)
    for (int h = 0; h < 4; ++h) {
      double e = 50.0 + double(rng() % 1000);
      est[{c, HourGroup(h)}] = e;
      survey.estimate[{c, HourGroup(h)}] = e * (1.0 + noise(rng));
    }
  auto report = compare_cells(est, survey);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%zu cells, average rel diff = %.4f",
                report.cells.size(), report.average_rel_diff);
  detail = buf;
  return report.cells.size() == 1000 && report.average_rel_diff >= 0.015 &&
         report.average_rel_diff <= 0.035;
}

// ---- criterion 10: throughput -------------------------------------------

bool criterion_throughput(std::string& detail) {
  ScenarioConfig cfg;
  cfg.n_communes = 15;
  cfg.users_per_commune = 130;
  cfg.calls_per_slot_lambda = 33.0; // ~1.03M expected records
  cfg.mobility_kernel = majority_home_kernel(15, 0.6);
  cfg.seed = 60;
  auto dir = work_dir() / "throughput";
  auto files = generate_scenario(cfg, dir.string());

  PipelineOptions opts;
  opts.cdr_path = files.cdr;
  opts.geometry_path = files.geometry;
  opts.census_path = files.census;
  opts.antennas_path = files.antennas;
  opts.threads = 4;
  double start = now_seconds();
  auto result = run_pipeline(opts);
  double elapsed = now_seconds() - start;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%llu lines in %.2fs",
                (unsigned long long)result.stats.total_lines, elapsed);
  detail = buf;
  return result.stats.total_lines >= 1000000 && elapsed < 60.0;
}

// ---- criterion 11: timegrid exhaustiveness ------------------------------

bool criterion_timegrid(std::string& detail) {
  int64_t monday = parse_iso_datetime("2012-03-12T00:00:00")->to_epoch_seconds();
  int per_slot[kNumSlots] = {0};
  for (int m = 0; m < 7 * 24 * 60; ++m) {
    auto ts = CivilDateTime::from_epoch_seconds(monday + int64_t(m) * 60);
    TimeSlot slot = classify_timestamp(ts);
    if (slot.index() < 0 || slot.index() >= kNumSlots) {
      detail = "slot index out of range";
      return false;
    }
    ++per_slot[slot.index()];
  }
  int total = 0;
  for (int i = 0; i < kNumSlots; ++i) total += per_slot[i];
  if (total != 10080) {
    detail = "minutes do not sum to 10080";
    return false;
  }
  // Early Monday belongs to the previous Sunday's night group.
  for (int h : {0, 4}) {
    auto ts = CivilDateTime::from_epoch_seconds(monday + int64_t(h) * 3600);
    auto slot = classify_timestamp(ts);
    if (slot.day != DayGroup::Sunday || slot.hour != HourGroup::Night) {
      detail = "midnight-5am not attached to previous day";
      return false;
    }
  }
  detail = "10080 minutes partitioned; previous-day night rule holds";
  return true;
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "conservation", criterion_conservation},
      {2, "marginal identity", criterion_marginal},
      {3, "row-stochastic LDMs", criterion_row_stochastic},
      {4, "oracle equivalence", criterion_oracle},
      {5, "stay-home degeneracy", criterion_stay_home},
      {6, "planted-truth recovery", criterion_planted},
      {7, "determinism", criterion_determinism},
      {8, "filter semantics", criterion_filter},
      {9, "validation metric sanity", criterion_validation},
      {10, "throughput", criterion_throughput},
      {11, "timegrid exhaustiveness", criterion_timegrid},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %2d %-26s %s\n", ok ? "PASS" : "FAIL", criterion.id,
                criterion.name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
