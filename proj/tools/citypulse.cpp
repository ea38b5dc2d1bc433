#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "citypulse/lines.hpp"
#include "citypulse/pipeline.hpp"
#include "citypulse/svg.hpp"
#include "citypulse/synth.hpp"
#include "citypulse/validation.hpp"

namespace fs = std::filesystem;
using namespace citypulse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

DayGroup require_day(const std::string& s) {
  auto d = parse_day_group(s);
  if (!d) throw UsageError("unknown day group: " + s);
  return *d;
}

HourGroup require_hour(const std::string& s) {
  auto h = parse_hour_group(s);
  if (!h) throw UsageError("unknown hour group: " + s);
  return *h;
}

// ep.csv rows keyed by (day, hour, commune).
std::map<std::tuple<int, int, CommuneId>, double> read_ep_csv(
    const std::string& path, std::vector<CommuneId>& communes_out) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw UsageError("empty ep.csv: " + path);
  std::map<std::tuple<int, int, CommuneId>, double> out;
  std::map<CommuneId, bool> seen;
  while (reader.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 4) throw UsageError("malformed ep.csv row: " + line);
    DayGroup d = require_day(std::string(f[0]));
    HourGroup h = require_hour(std::string(f[1]));
    CommuneId c = std::stoi(std::string(f[2]));
    out[{int(d), int(h), c}] = std::stod(std::string(f[3]));
    seen[c] = true;
  }
  for (const auto& [c, unused] : seen) communes_out.push_back(c);
  return out;
}

std::map<std::tuple<int, int, CommuneId, CommuneId>, double> read_provenance_csv(
    const std::string& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw UsageError("empty provenance.csv: " + path);
  std::map<std::tuple<int, int, CommuneId, CommuneId>, double> out;
  while (reader.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 5) throw UsageError("malformed provenance.csv row: " + line);
    out[{int(require_day(std::string(f[0]))), int(require_hour(std::string(f[1]))),
         std::stoi(std::string(f[2])), std::stoi(std::string(f[3]))}] =
        std::stod(std::string(f[4]));
  }
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

std::vector<std::string> hour_labels() {
  return {"Morning", "Noon", "Afternoon", "Night"};
}

int cmd_pipeline(const PipelineOptions& opts, const std::string& out_dir) {
  PipelineResult result = run_pipeline(opts);
  write_pipeline_outputs(result, out_dir);
  std::cerr << "pipeline: " << result.stats.parsed << " records, "
            << result.tensors.tensors().size() << " users seen, "
            << result.users.size() << " kept, " << result.homes.tie_count
            << " home ties\n";
  return kExitOk;
}

int cmd_profile(const std::string& out_dir, const std::string& day_str,
                int commune) {
  std::vector<CommuneId> communes;
  auto ep = read_ep_csv((fs::path(out_dir) / "ep.csv").string(), communes);
  fs::path figs = fs::path(out_dir) / "figs";
  std::string csv = "group,hour_group,thousands\n";
  char buf[96];

  if (commune > 0) {
    if (std::find(communes.begin(), communes.end(), commune) == communes.end())
      throw UsageError("unknown commune " + std::to_string(commune));
    // Fig.-3 style: day groups x hour groups for one commune.
    std::vector<std::string> groups = {"MonThu", "Friday", "Saturday", "Sunday"};
    std::vector<std::vector<double>> values(4, std::vector<double>(4, 0.0));
    for (int d = 0; d < 4; ++d)
      for (int h = 0; h < 4; ++h) {
        values[d][h] = ep.at({d, h, commune}) / 1000.0;
        std::snprintf(buf, sizeof(buf), "%s,%s,%.6f\n", groups[d].c_str(),
                      hour_labels()[h].c_str(), values[d][h]);
        csv += buf;
      }
    std::string svg = render_grouped_bars(
        "Commune " + std::to_string(commune) + " by day type", groups,
        hour_labels(), values, "thousands of people");
    write_text(figs / ("profile_c" + std::to_string(commune) + ".svg"), svg);
    write_text(figs / ("profile_c" + std::to_string(commune) + ".csv"), csv);
  } else {
    DayGroup day = require_day(day_str);
    std::vector<std::string> groups;
    std::vector<std::vector<double>> values;
    for (CommuneId c : communes) {
      groups.push_back(std::to_string(c));
      std::vector<double> row(4);
      for (int h = 0; h < 4; ++h) {
        row[h] = ep.at({int(day), h, c}) / 1000.0;
        std::snprintf(buf, sizeof(buf), "%d,%s,%.6f\n", c,
                      hour_labels()[h].c_str(), row[h]);
        csv += buf;
      }
      values.push_back(std::move(row));
    }
    std::string svg =
        render_grouped_bars("Population by commune, " + day_str, groups,
                            hour_labels(), values, "thousands of people");
    write_text(figs / ("profile_" + day_str + ".svg"), svg);
    write_text(figs / ("profile_" + day_str + ".csv"), csv);
  }
  return kExitOk;
}

int cmd_heatmap(const std::string& out_dir, const std::string& day_str,
                const std::string& hour_str) {
  require_day(day_str);
  require_hour(hour_str);
  fs::path cpm_path =
      fs::path(out_dir) / "cpm" / (day_str + "_" + hour_str + ".json");
  std::ifstream in(cpm_path);
  if (!in) throw UsageError("missing CPM for slot: " + cpm_path.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  std::vector<CommuneId> ids = doc.at("commune_ids").get<std::vector<CommuneId>>();
  auto matrix = doc.at("matrix").get<std::vector<std::vector<double>>>();
  std::string svg =
      render_heatmap("City Pulse Matrix, " + day_str + " " + hour_str, ids,
                     matrix);
  write_text(fs::path(out_dir) / "figs" / ("cpm_" + day_str + "_" + hour_str + ".svg"),
             svg);
  return kExitOk;
}

int cmd_choropleth(const std::string& out_dir, const std::string& geometry_path,
                   const std::string& day_str, const std::string& hour_str,
                   int target, double scale_max) {
  DayGroup day = require_day(day_str);
  HourGroup hour = require_hour(hour_str);
  auto geoms = load_commune_geometry(geometry_path);
  auto prov =
      read_provenance_csv((fs::path(out_dir) / "provenance.csv").string());

  bool target_known = false;
  for (const auto& g : geoms) target_known |= g.id == target;
  if (!target_known) throw UsageError("unknown commune " + std::to_string(target));

  // Shade commune c' by the people present in `target` who live in c'.
  std::vector<double> thousands(geoms.size(), 0.0);
  std::string csv = "home_commune,thousands\n";
  char buf[64];
  for (size_t i = 0; i < geoms.size(); ++i) {
    auto it = prov.find({int(day), int(hour), target, geoms[i].id});
    if (it == prov.end())
      throw UsageError("provenance.csv missing slot " + day_str + " " + hour_str);
    thousands[i] = it->second / 1000.0;
    std::snprintf(buf, sizeof(buf), "%d,%.6f\n", geoms[i].id, thousands[i]);
    csv += buf;
  }
  if (scale_max <= 0)
    scale_max = *std::max_element(thousands.begin(), thousands.end());

  std::string stem = "choropleth_" + day_str + "_" + hour_str + "_c" +
                     std::to_string(target);
  fs::path figs = fs::path(out_dir) / "figs";
  write_text(figs / (stem + ".svg"),
             render_choropleth(geoms, thousands, target, scale_max));
  write_text(figs / (stem + "_legend.svg"),
             render_scale_legend(scale_max, "thousands of people"));
  write_text(figs / (stem + ".csv"), csv);
  return kExitOk;
}

int cmd_validate(const std::string& out_dir, const std::string& survey_path) {
  SurveyTable survey = load_survey(survey_path);
  std::vector<CommuneId> communes;
  auto ep = read_ep_csv((fs::path(out_dir) / "ep.csv").string(), communes);
  // The survey describes a typical working day: compare MonThu only.
  std::map<std::pair<CommuneId, HourGroup>, double> cells;
  for (const auto& [key, value] : ep) {
    auto [d, h, c] = key;
    if (d == int(DayGroup::MonThu)) cells[{c, HourGroup(h)}] = value;
  }
  DiffReport report = compare_cells(cells, survey);
  write_diff_report_csv(report, (fs::path(out_dir) / "validation.csv").string());
  write_diff_report_json(report, (fs::path(out_dir) / "validation.json").string());
  std::cout << "average_rel_diff " << report.average_rel_diff << " over "
            << report.cells.size() << " cells (" << report.skipped_zero
            << " zero-survey cells skipped)\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population distribution estimates from call detail records"};
  app.require_subcommand(1);
  app.set_config("--config");

  PipelineOptions popts;
  std::string out_dir = "out";

  auto* pipeline = app.add_subcommand("pipeline", "run the full batch pipeline");
  pipeline->add_option("--cdr", popts.cdr_path, "CDR CSV (.gz ok)")->required();
  pipeline->add_option("--geometry", popts.geometry_path, "commune GeoJSON")
      ->required();
  pipeline->add_option("--census", popts.census_path, "census CSV")->required();
  auto* ant = pipeline->add_option("--antennas", popts.antennas_path,
                                   "antenna registry CSV (lon/lat)");
  auto* amap = pipeline->add_option("--antenna-map", popts.antenna_map_path,
                                    "precomputed antenna->commune CSV");
  ant->excludes(amap);
  pipeline->add_option("--tau", popts.tau, "min calls per slot")->check(CLI::PositiveNumber);
  pipeline->add_option("--seed", popts.seed, "tie-break seed");
  pipeline->add_option("--threads", popts.threads, "worker threads");
  pipeline->add_option("--utc-offset", popts.utc_offset_seconds,
                       "shift timestamps by this many seconds at ingest");
  pipeline->add_flag("--count-callee", popts.count_callee,
                     "also credit callee-side events (extension)");
  pipeline->add_option("--dump-tensors", popts.tensor_dump_path,
                       "debug CSV of raw per-user counts");
  pipeline->add_option("--out", out_dir, "output directory");

  std::string day_str, hour_str;
  int commune = 0;
  auto* profile = app.add_subcommand("profile", "grouped-bar day profile");
  profile->add_option("--out", out_dir, "pipeline output directory");
  profile->add_option("--day", day_str, "MonThu|Friday|Saturday|Sunday");
  profile->add_option("--commune", commune, "single-commune view");

  auto* heatmap = app.add_subcommand("heatmap", "City Pulse Matrix heatmap");
  heatmap->add_option("--out", out_dir, "pipeline output directory");
  heatmap->add_option("--day", day_str, "day group")->required();
  heatmap->add_option("--hour", hour_str, "hour group")->required();

  std::string geometry_path;
  double scale_max = 0;
  auto* choropleth = app.add_subcommand("choropleth", "provenance map for one commune");
  choropleth->add_option("--out", out_dir, "pipeline output directory");
  choropleth->add_option("--geometry", geometry_path, "commune GeoJSON")->required();
  choropleth->add_option("--day", day_str, "day group")->required();
  choropleth->add_option("--hour", hour_str, "hour group")->required();
  choropleth->add_option("--target", commune, "target commune")->required();
  choropleth->add_option("--scale-max", scale_max,
                         "shared color scale maximum (thousands)");

  std::string survey_path;
  auto* validate = app.add_subcommand("validate", "compare against a survey");
  validate->add_option("--out", out_dir, "pipeline output directory");
  validate->add_option("--survey", survey_path, "survey CSV")->required();

  ScenarioConfig scfg;
  double home_mass = 0;
  std::string synth_out = "scenario";
  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  synth->add_option("--communes", scfg.n_communes, "number of communes");
  synth->add_option("--users-per-commune", scfg.users_per_commune, "users per commune");
  synth->add_option("--lambda", scfg.calls_per_slot_lambda, "Poisson calls per slot");
  synth->add_option("--home-mass", home_mass,
                    "kernel mass at home (default: stay-home identity)");
  synth->add_flag("!--no-min-calls", scfg.guarantee_min_calls,
                  "do not force >=1 call per slot");
  synth->add_option("--seed", scfg.seed, "generator seed");
  synth->add_option("--census-factor", scfg.census_factor,
                    "census = residents x factor");
  synth->add_option("--out", synth_out, "scenario directory");

  try {
    app.parse(argc, argv);
    if (pipeline->parsed()) {
      if (popts.antennas_path.empty() == popts.antenna_map_path.empty())
        throw UsageError("provide exactly one of --antennas / --antenna-map");
      return cmd_pipeline(popts, out_dir);
    }
    if (profile->parsed()) {
      if (commune == 0 && day_str.empty())
        throw UsageError("profile needs --day or --commune");
      return cmd_profile(out_dir, day_str, commune);
    }
    if (heatmap->parsed()) return cmd_heatmap(out_dir, day_str, hour_str);
    if (choropleth->parsed())
      return cmd_choropleth(out_dir, geometry_path, day_str, hour_str, commune,
                            scale_max);
    if (validate->parsed()) return cmd_validate(out_dir, survey_path);
    if (synth->parsed()) {
      if (home_mass > 0)
        scfg.mobility_kernel = majority_home_kernel(scfg.n_communes, home_mass);
      generate_scenario(scfg, synth_out);
      return kExitOk;
    }
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const GeomapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IngestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SynthError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
