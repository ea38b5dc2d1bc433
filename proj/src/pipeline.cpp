#include "citypulse/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "citypulse/lines.hpp"

namespace citypulse {

namespace {

struct WorkerAccumulator {
  UserTensors tensors;
  IngestStats stats;
};

void consume_record(const CdrRecord& rec, const AntennaCommuneMap& antenna_map,
                    bool count_callee, UserTensors& tensors,
                    uint64_t& dropped_unmapped) {
  auto commune = antenna_map.commune_of(rec.antenna);
  if (!commune) {
    ++dropped_unmapped;
    return;
  }
  TimeSlot slot = classify_timestamp(rec.timestamp);
  tensors.add_call(rec.caller, slot, *commune);
  if (count_callee) tensors.add_call(rec.callee, slot, *commune);
}

// Single-producer batch queue; workers parse independent line batches and
// merge integer tensors at the end, so results do not depend on scheduling.
void accumulate_parallel(const std::string& path, int threads,
                         int64_t utc_offset_seconds, bool count_callee,
                         const AntennaCommuneMap& antenna_map,
                         const CommuneIndex& communes, UserTensors& out,
                         IngestStats& stats_out) {
  constexpr size_t kBatchLines = 16384;
  constexpr size_t kMaxQueuedBatches = 64;

  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw PipelineError("empty CDR file: " + path);

  std::deque<std::vector<std::string>> queue;
  std::mutex mu;
  std::condition_variable cv_put, cv_get;
  bool done = false;
  bool format_known = false;
  bool epoch_timestamps = false;

  std::vector<WorkerAccumulator> partials;
  partials.resize(size_t(threads));
  for (auto& p : partials) p.tensors = UserTensors(communes);

  auto worker = [&](int wid) {
    WorkerAccumulator& acc = partials[size_t(wid)];
    CdrRecord rec;
    for (;;) {
      std::vector<std::string> batch;
      {
        std::unique_lock lock(mu);
        cv_get.wait(lock, [&] { return !queue.empty() || done; });
        if (queue.empty()) return;
        batch = std::move(queue.front());
        queue.pop_front();
      }
      cv_put.notify_one();
      for (const std::string& l : batch) {
        ++acc.stats.total_lines;
        if (!parse_cdr_line(l, epoch_timestamps, rec)) {
          ++acc.stats.dropped_parse;
          continue;
        }
        if (utc_offset_seconds != 0)
          rec.timestamp = CivilDateTime::from_epoch_seconds(
              rec.timestamp.to_epoch_seconds() + utc_offset_seconds);
        ++acc.stats.parsed;
        consume_record(rec, antenna_map, count_callee, acc.tensors,
                       acc.stats.dropped_unmapped_antenna);
      }
    }
  };

  std::vector<std::thread> pool;
  std::vector<std::string> batch;
  batch.reserve(kBatchLines);
  while (reader.next(line)) {
    if (line.empty()) continue;
    if (!format_known) {
      auto f = split_csv(line);
      if (f.size() == 5)
        epoch_timestamps = !f[2].empty() &&
                           std::all_of(f[2].begin(), f[2].end(), [](char c) {
                             return c >= '0' && c <= '9';
                           });
      format_known = true;
      // Workers read the format flag; start them only after it is fixed.
      for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    }
    batch.push_back(std::move(line));
    if (batch.size() >= kBatchLines) {
      std::unique_lock lock(mu);
      cv_put.wait(lock, [&] { return queue.size() < kMaxQueuedBatches; });
      queue.push_back(std::move(batch));
      lock.unlock();
      cv_get.notify_one();
      batch.clear();
      batch.reserve(kBatchLines);
    }
  }
  if (!batch.empty()) {
    if (pool.empty())
      for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    std::unique_lock lock(mu);
    queue.push_back(std::move(batch));
    lock.unlock();
    cv_get.notify_one();
  }
  {
    std::lock_guard lock(mu);
    done = true;
  }
  cv_get.notify_all();
  for (auto& t : pool) t.join();

  out = UserTensors(communes);
  for (auto& p : partials) {
    out.merge(std::move(p.tensors));
    stats_out += p.stats;
  }
}

void finish_pipeline(PipelineResult& result, const CensusTable& census,
                     uint32_t tau, uint64_t seed) {
  result.users = filter_users(result.tensors, tau);
  if (result.users.empty())
    throw PipelineError("no users pass the filter (tau=" + std::to_string(tau) +
                        ")");
  result.homes = detect_homes(result.tensors, result.users, seed);
  result.factors = scaling_factors(census, result.homes);
  result.estimates.reserve(kNumSlots);
  for (TimeSlot slot : all_slots())
    result.estimates.push_back(expected_population(
        result.tensors, result.users, result.homes, result.factors, slot));
}

} // namespace

PipelineResult run_pipeline(const PipelineOptions& options) {
  if (options.antennas_path.empty() == options.antenna_map_path.empty())
    throw PipelineError("provide exactly one of antennas / antenna-map");
  if (options.tau < 1) throw PipelineError("tau must be >= 1");
  int threads = std::max(1, options.threads);

  PipelineResult result;
  auto geoms = load_commune_geometry(options.geometry_path);
  if (geoms.empty()) throw PipelineError("no communes in geometry file");
  std::vector<CommuneId> ids;
  for (const auto& g : geoms) ids.push_back(g.id);
  result.communes = CommuneIndex(ids);

  if (!options.antennas_path.empty()) {
    auto antennas = load_antenna_registry(options.antennas_path);
    result.antenna_map = build_antenna_map(antennas, geoms);
  } else {
    result.antenna_map = load_antenna_map(options.antenna_map_path);
    for (const auto& [antenna, commune] : result.antenna_map.mapping)
      if (result.communes.index_of(commune) < 0)
        throw PipelineError("antenna map references unknown commune " +
                            std::to_string(commune));
  }

  CensusTable census = load_census(options.census_path, result.communes.ids());

  accumulate_parallel(options.cdr_path, threads, options.utc_offset_seconds,
                      options.count_callee, result.antenna_map, result.communes,
                      result.tensors, result.stats);
  if (!options.tensor_dump_path.empty())
    dump_tensors(result.tensors, options.tensor_dump_path);

  finish_pipeline(result, census, options.tau, options.seed);
  return result;
}

PipelineResult run_pipeline_from_records(
    const std::vector<CdrRecord>& records, const AntennaCommuneMap& antenna_map,
    const CommuneIndex& communes, const CensusTable& census, uint32_t tau,
    uint64_t seed) {
  PipelineResult result;
  result.communes = communes;
  result.antenna_map = antenna_map;
  result.tensors = UserTensors(communes);
  result.stats.total_lines = result.stats.parsed = records.size();
  for (const auto& rec : records)
    consume_record(rec, antenna_map, false, result.tensors,
                   result.stats.dropped_unmapped_antenna);
  finish_pipeline(result, census, tau, seed);
  return result;
}

void write_pipeline_outputs(const PipelineResult& result,
                            const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "cpm");
  const CommuneIndex& communes = result.communes;
  char buf[192];

  {
    std::ofstream out(fs::path(out_dir) / "ep.csv");
    if (!out) throw IoError("cannot write ep.csv");
    out << "day_group,hour_group,commune_id,people\n";
    for (const auto& est : result.estimates) {
      for (int c = 0; c < communes.size(); ++c) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.3f\n",
                      std::string(to_string(est.slot.day)).c_str(),
                      std::string(to_string(est.slot.hour)).c_str(),
                      communes.id_at(c), est.ep[c]);
        out << buf;
      }
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "provenance.csv");
    if (!out) throw IoError("cannot write provenance.csv");
    out << "day_group,hour_group,present_commune,home_commune,people\n";
    for (const auto& est : result.estimates) {
      for (int c = 0; c < communes.size(); ++c)
        for (int h = 0; h < communes.size(); ++h) {
          std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.3f\n",
                        std::string(to_string(est.slot.day)).c_str(),
                        std::string(to_string(est.slot.hour)).c_str(),
                        communes.id_at(c), communes.id_at(h),
                        est.ep_by_home[c][h]);
          out << buf;
        }
    }
  }
  for (const auto& est : result.estimates) {
    CityPulseMatrix cpm = city_pulse_matrix(est, /*normalize_rows=*/true);
    nlohmann::json doc;
    doc["slot"] = std::string(to_string(est.slot.day)) + "_" +
                  std::string(to_string(est.slot.hour));
    doc["normalized"] = cpm.normalized;
    doc["commune_ids"] = communes.ids();
    doc["matrix"] = cpm.cpm;
    std::string name = std::string(to_string(est.slot.day)) + "_" +
                       std::string(to_string(est.slot.hour)) + ".json";
    std::ofstream out(fs::path(out_dir) / "cpm" / name);
    if (!out) throw IoError("cannot write cpm/" + name);
    out << doc.dump(1) << '\n';
  }
  {
    double fmin = 0, fmax = 0;
    bool first = true;
    for (const auto& [c, f] : result.factors.factor) {
      fmin = first ? f : std::min(fmin, f);
      fmax = first ? f : std::max(fmax, f);
      first = false;
    }
    nlohmann::json doc;
    doc["ingest"] = {{"total_lines", result.stats.total_lines},
                     {"parsed", result.stats.parsed},
                     {"dropped_parse", result.stats.dropped_parse},
                     {"dropped_unmapped_antenna",
                      result.stats.dropped_unmapped_antenna}};
    doc["users_seen"] = result.tensors.tensors().size();
    doc["users_kept"] = result.users.size();
    doc["tie_count"] = result.homes.tie_count;
    doc["scaling_factor_min"] = fmin;
    doc["scaling_factor_max"] = fmax;
    doc["unmapped_antennas"] = result.antenna_map.unmapped.size();
    std::ofstream out(fs::path(out_dir) / "stats.json");
    if (!out) throw IoError("cannot write stats.json");
    out << doc.dump(1) << '\n';
  }
}

} // namespace citypulse
