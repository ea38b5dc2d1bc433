#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "citypulse/lines.hpp"
#include "citypulse/pipeline.hpp"
#include "citypulse/synth.hpp"

using namespace citypulse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool dirs_identical(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  size_t b_count = 0;
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++b_count;
  if (b_count != rel.size()) return false;
  for (const auto& r : rel)
    if (slurp(a / r) != slurp(b / r)) return false;
  return true;
}

ScenarioFiles make_scenario(const std::string& name, uint64_t seed,
                            double home_mass = 0.7) {
  ScenarioConfig cfg;
  cfg.n_communes = 3;
  cfg.users_per_commune = 30;
  cfg.calls_per_slot_lambda = 3.0;
  cfg.mobility_kernel = majority_home_kernel(3, home_mass);
  cfg.seed = seed;
  return generate_scenario(cfg, (fs::temp_directory_path() / name).string());
}

} // namespace

TEST_CASE("file-based pipeline produces the full output layout") {
  auto files = make_scenario("cp_pipe_sc", 777);
  PipelineOptions opts;
  opts.cdr_path = files.cdr;
  opts.geometry_path = files.geometry;
  opts.census_path = files.census;
  opts.antennas_path = files.antennas;
  opts.seed = 4;
  auto result = run_pipeline(opts);
  CHECK(result.users.size() == 90);
  CHECK(result.estimates.size() == kNumSlots);
  CHECK(result.stats.dropped_parse == 0);

  auto out_dir = fs::temp_directory_path() / "cp_pipe_out";
  fs::remove_all(out_dir);
  write_pipeline_outputs(result, out_dir.string());
  CHECK(fs::exists(out_dir / "ep.csv"));
  CHECK(fs::exists(out_dir / "provenance.csv"));
  CHECK(fs::exists(out_dir / "stats.json"));
  CHECK(fs::exists(out_dir / "cpm" / "MonThu_Noon.json"));
  size_t cpm_files = 0;
  for (const auto& e : fs::directory_iterator(out_dir / "cpm")) (void)e, ++cpm_files;
  CHECK(cpm_files == 16);
}

TEST_CASE("thread count does not change any output byte") {
  auto files = make_scenario("cp_pipe_thr", 2024);
  PipelineOptions opts;
  opts.cdr_path = files.cdr;
  opts.geometry_path = files.geometry;
  opts.census_path = files.census;
  opts.antennas_path = files.antennas;
  opts.seed = 9;

  auto dir1 = fs::temp_directory_path() / "cp_pipe_t1";
  auto dir8 = fs::temp_directory_path() / "cp_pipe_t8";
  fs::remove_all(dir1);
  fs::remove_all(dir8);

  opts.threads = 1;
  write_pipeline_outputs(run_pipeline(opts), dir1.string());
  opts.threads = 8;
  write_pipeline_outputs(run_pipeline(opts), dir8.string());
  CHECK(dirs_identical(dir1, dir8));
}

TEST_CASE("precomputed antenna map is equivalent to point-in-polygon") {
  auto files = make_scenario("cp_pipe_map", 31);
  PipelineOptions opts;
  opts.cdr_path = files.cdr;
  opts.geometry_path = files.geometry;
  opts.census_path = files.census;
  opts.antennas_path = files.antennas;

  auto via_geometry = run_pipeline(opts);
  auto map_path = fs::temp_directory_path() / "cp_pipe_map.csv";
  save_antenna_map(via_geometry.antenna_map, map_path.string());

  PipelineOptions opts2 = opts;
  opts2.antennas_path.clear();
  opts2.antenna_map_path = map_path.string();
  auto via_map = run_pipeline(opts2);
  for (int s = 0; s < kNumSlots; ++s)
    CHECK(via_map.estimates[s].ep == via_geometry.estimates[s].ep);
}

TEST_CASE("count conservation from ingest stats to tensors") {
  auto files = make_scenario("cp_pipe_cons", 55);
  PipelineOptions opts;
  opts.cdr_path = files.cdr;
  opts.geometry_path = files.geometry;
  opts.census_path = files.census;
  opts.antennas_path = files.antennas;
  auto result = run_pipeline(opts);
  CHECK(result.tensors.total_counted() ==
        result.stats.parsed - result.stats.dropped_unmapped_antenna);
  CHECK(result.stats.parsed + result.stats.dropped_parse ==
        result.stats.total_lines);
}

TEST_CASE("pipeline rejects bad configurations") {
  auto files = make_scenario("cp_pipe_bad", 1);
  PipelineOptions opts;
  opts.cdr_path = files.cdr;
  opts.geometry_path = files.geometry;
  opts.census_path = files.census;
  CHECK_THROWS_AS(run_pipeline(opts), PipelineError); // no antenna source

  opts.antennas_path = files.antennas;
  opts.antenna_map_path = "also.csv";
  CHECK_THROWS_AS(run_pipeline(opts), PipelineError); // both sources

  opts.antenna_map_path.clear();
  opts.census_path = "/nonexistent/census.csv";
  CHECK_THROWS_AS(run_pipeline(opts), IoError);
}

TEST_CASE("cli exit codes") {
  std::string bin = CITYPULSE_BIN;
  auto files = make_scenario("cp_cli_sc", 8);
  auto out_dir = (fs::temp_directory_path() / "cp_cli_out").string();

  std::string ok = bin + " pipeline --cdr " + files.cdr + " --geometry " +
                   files.geometry + " --census " + files.census +
                   " --antennas " + files.antennas + " --out " + out_dir +
                   " 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(ok.c_str())) == 0);

  std::string missing_census = bin + " pipeline --cdr " + files.cdr +
                               " --geometry " + files.geometry +
                               " --census /nonexistent.csv --antennas " +
                               files.antennas + " 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(missing_census.c_str())) == 2);

  std::string bad_sub = bin + " frobnicate 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(bad_sub.c_str())) == 2);

  std::string profile = bin + " profile --out " + out_dir + " --day MonThu";
  CHECK(WEXITSTATUS(std::system(profile.c_str())) == 0);
  CHECK(fs::exists(fs::path(out_dir) / "figs" / "profile_MonThu.svg"));
  CHECK(fs::exists(fs::path(out_dir) / "figs" / "profile_MonThu.csv"));

  std::string heatmap =
      bin + " heatmap --out " + out_dir + " --day MonThu --hour Noon";
  CHECK(WEXITSTATUS(std::system(heatmap.c_str())) == 0);
  CHECK(fs::exists(fs::path(out_dir) / "figs" / "cpm_MonThu_Noon.svg"));

  std::string choropleth = bin + " choropleth --out " + out_dir +
                           " --geometry " + files.geometry +
                           " --day MonThu --hour Noon --target 1";
  CHECK(WEXITSTATUS(std::system(choropleth.c_str())) == 0);
  CHECK(fs::exists(fs::path(out_dir) / "figs" /
                   "choropleth_MonThu_Noon_c1.svg"));
  CHECK(fs::exists(fs::path(out_dir) / "figs" /
                   "choropleth_MonThu_Noon_c1_legend.svg"));

  std::string bad_target = bin + " choropleth --out " + out_dir +
                           " --geometry " + files.geometry +
                           " --day MonThu --hour Noon --target 99 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(bad_target.c_str())) == 2);
}
