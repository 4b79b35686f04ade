// Copyright 2026 The proxattr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// proxattr: segment, attribute, simulate, report and import.
//
// Exit codes: 0 success, 1 data error, 2 usage error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "proxattr/proxattr.hpp"

namespace fs = std::filesystem;
using namespace proxattr;

namespace {

constexpr int kDataError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_st("proxattr");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("PROXATTR_LOG")) {
    spdlog::set_level(spdlog::level::from_str(lvl));
  }
}

struct Inputs {
  std::vector<std::string> location_files;
  std::vector<std::string> sensor_files;
  std::string replay;  // NDJSON file, "-" for stdin
  std::string origin = "auto";

  void add_to(CLI::App* cmd) {
    cmd->add_option("-l,--locations", location_files, "location CSV (user_id,epoch_ms,x,y)")
        ->check(CLI::ExistingFile);
    cmd->add_option("-s,--sensors", sensor_files, "sensor CSV (sensor_id,epoch_ms,value)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--replay", replay, "NDJSON replay feed, '-' for stdin");
    cmd->add_option("--origin", origin, "window origin: 'auto' or epoch ms")
        ->capture_default_str();
  }

  std::optional<Timestamp> parsed_origin() const {
    if (origin == "auto") return std::nullopt;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(origin, &used);
      if (used == origin.size() && v >= 0) return Timestamp{v};
    } catch (const std::exception&) {
    }
    throw UsageError("--origin must be 'auto' or a non-negative integer");
  }

  void load(std::vector<SensorSample>& sensors, std::vector<LocationSample>& locations) const {
    for (const auto& f : location_files) {
      auto part = parse_location_csv(f);
      spdlog::info("{}: {} location samples", f, part.size());
      locations.insert(locations.end(), part.begin(), part.end());
    }
    for (const auto& f : sensor_files) {
      auto part = parse_sensor_csv(f);
      spdlog::info("{}: {} sensor samples", f, part.size());
      sensors.insert(sensors.end(), part.begin(), part.end());
    }
    if (!replay.empty()) {
      std::ifstream file;
      if (replay != "-") {
        file.open(replay);
        if (!file) throw Error(Errc::InvalidArgument, "cannot open '" + replay + "'");
      }
      ReplayReader reader(replay == "-" ? std::cin : file);
      while (auto rec = reader.next()) {
        if (auto* s = std::get_if<SensorSample>(&*rec)) {
          sensors.push_back(std::move(*s));
        } else {
          locations.push_back(std::get<LocationSample>(std::move(*rec)));
        }
      }
      for (const auto& e : reader.errors()) {
        spdlog::warn("replay line {}: {}", e.line, e.message);
      }
      if (reader.skipped() > 0) spdlog::warn("replay: skipped {} lines", reader.skipped());
    }
  }
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(Errc::InvalidArgument, "cannot write '" + path.string() + "'");
  return out;
}

void render_counts(std::ostream& out, const CountTable& table, const std::string& format) {
  if (format == "csv") {
    render_csv(out, table);
  } else if (format == "json") {
    out << report_json(table).dump(2) << '\n';
  } else {
    render_table(out, table);
  }
}

// ---------------------------------------------------------------------------

struct SegmentCmd {
  Inputs in;
  std::int64_t delta = kDefaultDeltaMs;
  std::string out_dir;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("segment", "align raw streams on a time-step grid");
    in.add_to(cmd);
    cmd->add_option("--delta", delta, "time step in ms")->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("-o,--out", out_dir, "directory for segmented CSV files");
    cmd->callback([this] { run(); });
  }

  void run() const {
    std::vector<SensorSample> sensors;
    std::vector<LocationSample> locations;
    in.load(sensors, locations);
    const auto seg = segment_streams(sensors, locations, delta, in.parsed_origin());
    if (!out_dir.empty()) {
      auto s = open_output(fs::path(out_dir) / "segmented_sensors.csv");
      emit_segmented_sensors(s, seg.sensors);
      auto l = open_output(fs::path(out_dir) / "segmented_locations.csv");
      emit_segmented_locations(l, seg.locations);
    }
    render_segment_summary(std::cout,
                           summarize_segmentation(sensors, locations, seg.sensors, seg.locations),
                           delta);
  }
};

struct AttributeCmd {
  Inputs in;
  std::string config;
  std::optional<std::int64_t> delta;
  std::string aggregator{to_string(Aggregator::LukasiewiczTConorm)};
  std::string out;
  std::string format = "table";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("attribute", "attribute activations to tracked users");
    in.add_to(cmd);
    cmd->add_option("-c,--config", config, "area configuration JSON")->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--delta", delta, "time step in ms (default: from config)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--aggregator", aggregator, "area aggregator")
        ->check(CLI::IsMember({"lukasiewicz-tconorm", "paper-literal", "max"}))
        ->capture_default_str();
    cmd->add_option("-o,--out", out, "timeline CSV output path");
    cmd->add_option("--format", format, "count table format")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const AreaConfig cfg = load_area_config(config);
    std::vector<SensorSample> sensors;
    std::vector<LocationSample> locations;
    in.load(sensors, locations);
    const auto agg = parse_aggregator(aggregator);
    const auto res = run_pipeline(cfg.sensors, sensors, locations, delta.value_or(cfg.delta_ms),
                                  in.parsed_origin(), agg);
    spdlog::info("{} attribution records ({})", res.records.size(), aggregator);
    const auto timeline = to_timeline(res.records, res.grid);
    if (!out.empty()) {
      auto f = open_output(out);
      emit_timeline_csv(f, timeline, res.degrees.users);
    }
    render_counts(std::cout, count_owners(timeline, res.degrees.users), format);
  }
};

struct SimulateCmd {
  ScenarioParams p;
  std::string out_dir;
  bool do_score = false;
  bool strict = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "generate a synthetic scenario and score it");
    cmd->add_option("--seed", p.seed)->capture_default_str();
    cmd->add_option("--users", p.n_users)->check(CLI::Range(1, 1000))->capture_default_str();
    cmd->add_option("--sensors", p.n_sensors)->check(CLI::Range(1, 1000))->capture_default_str();
    cmd->add_option("--duration", p.duration_ms, "ms")->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--noise", p.noise_m, "position noise radius, m")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--separation", p.min_separation_m, "min area/user separation, m")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--delta", p.delta_ms, "time step in ms")->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--untracked", p.untracked_events_per_min, "untracked activations per minute")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("-o,--out", out_dir, "directory for scenario files");
    cmd->add_flag("--score", do_score, "run the pipeline and score against truth");
    cmd->add_flag("--strict", strict, "exclude windows with several actors from scoring");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const Scenario sc = generate_scenario(p);
    if (!out_dir.empty()) export_scenario(sc, out_dir);

    nlohmann::ordered_json j;
    j["seed"] = p.seed;
    j["users"] = p.n_users;
    j["sensors"] = p.n_sensors;
    j["duration_ms"] = p.duration_ms;
    j["noise_m"] = p.noise_m;
    j["min_separation_m"] = p.min_separation_m;
    j["delta_ms"] = p.delta_ms;
    j["location_samples"] = sc.locations.size();
    j["sensor_events"] = sc.sensors.size();
    if (do_score) {
      const auto res = run_pipeline(sc.layout, sc.sensors, sc.locations, p.delta_ms);
      const auto rep = score(res.records, sc.truth, res.grid, strict);
      j["records"] = rep.total;
      j["correct"] = rep.correct;
      j["accuracy"] = rep.accuracy;
      auto& per = j["per_sensor"] = nlohmann::ordered_json::object();
      for (const auto& [sensor, s] : rep.sensors) {
        per[sensor] = {{"correct", s.correct},
                       {"total", s.total},
                       {"excluded", s.excluded},
                       {"confusion", s.confusion}};
      }
    }
    std::cout << j.dump(2) << '\n';
  }
};

struct ReportCmd {
  std::string records;
  std::string format = "table";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("report", "render count table from a timeline CSV");
    cmd->add_option("records", records, "timeline CSV from 'attribute'")->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--format", format)->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() const {
    std::ifstream f(records);
    if (!f) throw Error(Errc::InvalidArgument, "cannot open '" + records + "'");
    const Timeline tl = parse_timeline_csv(f);
    const CountTable table = count_owners(tl.rows, tl.users);
    render_counts(std::cout, table, format);
    if (format == "table") {
      std::cout << '\n';
      render_summary(std::cout, table);
    }
  }
};

// ---------------------------------------------------------------------------
// import: column-mapped conversion of third-party exports into the core CSVs.

std::optional<std::int64_t> parse_iso8601_ms(std::string_view s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  int consumed = 0;
  const std::string str(s);
  if (std::sscanf(str.c_str(), "%d-%d-%d%*1[T ]%d:%d:%lf%n", &y, &mo, &d, &h, &mi, &sec,
                  &consumed) != 6) {
    return std::nullopt;
  }
  std::string_view zone = s.substr(static_cast<std::size_t>(consumed));
  int offset_min = 0;
  if (zone.empty() || zone == "Z") {
    offset_min = 0;
  } else if ((zone[0] == '+' || zone[0] == '-') && zone.size() == 6 && zone[3] == ':') {
    const int oh = std::stoi(std::string(zone.substr(1, 2)));
    const int om = std::stoi(std::string(zone.substr(4, 2)));
    offset_min = (zone[0] == '+' ? 1 : -1) * (oh * 60 + om);
  } else {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec < 0.0 || sec >= 61.0) return std::nullopt;
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t ms = days * 86'400'000 + (h * 60LL + mi - offset_min) * 60'000 +
                          static_cast<std::int64_t>(std::llround(sec * 1000.0));
  return ms;
}

struct ImportCmd {
  std::string kind;
  std::string in_path;
  std::string out_path;
  std::string id_col;
  std::string id_const;
  std::string time_col = "epoch_ms";
  std::string time_format = "epoch_ms";
  std::string x_col = "x";
  std::string y_col = "y";
  std::string value_col = "value";
  char delimiter = ',';

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("import", "convert a delimited export into a core CSV");
    cmd->add_option("--kind", kind)->required()->check(CLI::IsMember({"location", "sensor"}));
    cmd->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_path)->required();
    cmd->add_option("--id-col", id_col, "column holding the user/sensor id");
    cmd->add_option("--id", id_const, "fixed id when the file holds a single stream");
    cmd->add_option("--time-col", time_col)->capture_default_str();
    cmd->add_option("--time-format", time_format)
        ->check(CLI::IsMember({"epoch_ms", "epoch_s", "iso8601"}))
        ->capture_default_str();
    cmd->add_option("--x-col", x_col)->capture_default_str();
    cmd->add_option("--y-col", y_col)->capture_default_str();
    cmd->add_option("--value-col", value_col)->capture_default_str();
    cmd->add_option("--delimiter", delimiter)->capture_default_str();
    cmd->callback([this] { run(); });
  }

  static std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) {
      if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
        field = field.substr(1, field.size() - 2);
      }
      out.push_back(field);
    }
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
  }

  std::int64_t timestamp(const std::string& s, std::size_t line) const {
    std::optional<std::int64_t> v;
    if (time_format == "iso8601") {
      v = parse_iso8601_ms(s);
    } else {
      double raw = 0.0;
      std::size_t used = 0;
      try {
        raw = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == s.size() && used > 0 && std::isfinite(raw)) {
        v = std::llround(time_format == "epoch_s" ? raw * 1000.0 : raw);
      }
    }
    if (!v || *v < 0) {
      throw Error(Errc::BadTimestamp, "line " + std::to_string(line) + ": '" + s + "'", line);
    }
    return *v;
  }

  void run() const {
    if (id_col.empty() == id_const.empty()) throw UsageError("give exactly one of --id-col, --id");
    std::ifstream in(in_path);
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw Error(Errc::MalformedRow, "empty input", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, delimiter);
    auto col = [&](const std::string& name) -> std::size_t {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
      }
      throw Error(Errc::MalformedRow, "column '" + name + "' not in header", 1);
    };
    const std::size_t t_i = col(time_col);
    const std::optional<std::size_t> id_i =
        id_col.empty() ? std::nullopt : std::optional<std::size_t>(col(id_col));

    std::vector<LocationSample> locs;
    std::vector<SensorSample> sens;
    const bool is_loc = kind == "location";
    const std::size_t a_i = is_loc ? col(x_col) : col(value_col);
    const std::size_t b_i = is_loc ? col(y_col) : a_i;
    std::size_t skipped = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto f = split(line, delimiter);
      const std::size_t need = std::max({t_i, a_i, b_i, id_i.value_or(0)}) + 1;
      if (f.size() < need) {
        throw Error(Errc::MalformedRow, "line " + std::to_string(line_no), line_no);
      }
      const std::string id = id_i ? f[*id_i] : id_const;
      const Timestamp t{timestamp(f[t_i], line_no)};
      if (is_loc) {
        const auto x = detail::to_double(f[a_i]);
        const auto y = detail::to_double(f[b_i]);
        if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
          throw Error(Errc::NonFiniteCoordinate, "line " + std::to_string(line_no), line_no);
        }
        locs.push_back(LocationSample{id, Point{*x, *y}, t});
      } else {
        const auto v = coerce_activation(f[a_i]);
        if (!v || !(*v >= 0.0 && *v <= 1.0)) {
          // Non-binary states (e.g. "unavailable") carry no activation.
          ++skipped;
          continue;
        }
        sens.push_back(SensorSample{id, *v, t});
      }
    }
    auto out = open_output(out_path);
    if (is_loc) {
      emit_location_csv(out, locs);
    } else {
      emit_sensor_csv(out, sens);
    }
    if (skipped > 0) spdlog::warn("import: skipped {} rows without a binary state", skipped);
    std::cout << (is_loc ? locs.size() : sens.size()) << " rows written to " << out_path << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Multi-occupancy sensor activation attribution"};
  app.require_subcommand(1);
  SegmentCmd segment;
  AttributeCmd attribute;
  SimulateCmd simulate;
  ReportCmd report;
  ImportCmd import;
  segment.add(app);
  attribute.add(app);
  simulate.add(app);
  report.add(app);
  import.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kDataError;
  }
  return 0;
}
