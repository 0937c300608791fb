#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "formsim/telemetry.hpp"

using namespace formsim;

namespace {

std::string scratch_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::size_t line_count(const std::string& path) {
  std::ifstream in(path);
  std::size_t lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  return lines;
}

bool close_rel(double a, double b) {
  return std::abs(a - b) <= 1e-8 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("a one-step run serializes as header plus one row per agent") {
  ScenarioConfig cfg = builtin_scenario("paper-4uav");
  cfg.duration = cfg.dt;  // single step
  const SimLog log = run(cfg);
  REQUIRE(log.rows.size() == 4);

  const std::string path = scratch_path("formsim_onestep.csv");
  write_log(log, path);
  CHECK(line_count(path) == 1 + 4);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == kTelemetryHeader);
  std::remove(path.c_str());
}

TEST_CASE("write -> read is identity within 9-significant-digit serialization") {
  ScenarioConfig cfg = builtin_scenario("paper-4uav");
  cfg.duration = 2.0;
  const SimLog log = run(cfg);

  const std::string path = scratch_path("formsim_roundtrip.csv");
  write_log(log, path);
  const SimLog back = read_log(path);
  std::remove(path.c_str());

  CHECK(back.n_agents == log.n_agents);
  CHECK(close_rel(back.dt, log.dt));
  REQUIRE(back.rows.size() == log.rows.size());
  for (std::size_t k = 0; k < log.rows.size(); ++k) {
    const LogRow& a = log.rows[k];
    const LogRow& b = back.rows[k];
    CAPTURE(k);
    CHECK(a.agent == b.agent);
    CHECK(a.flags == b.flags);
    CHECK(close_rel(a.t, b.t));
    for (int c = 0; c < 12; ++c) {
      CHECK(close_rel(a.state.to_vector()(c), b.state.to_vector()(c)));
    }
    CHECK(close_rel(a.setpoint(0), b.setpoint(0)));
    CHECK(close_rel(a.setpoint(1), b.setpoint(1)));
    CHECK(close_rel(a.err, b.err));
  }
}

TEST_CASE("telemetry parse failures point at the offending place") {
  const std::string path = scratch_path("formsim_malformed.csv");

  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_log(scratch_path("formsim_no_such_log.csv")), IoError);
  }
  SUBCASE("wrong header") {
    std::ofstream(path) << "time,uav,x\n1,2,3\n";
    CHECK_THROWS_WITH_AS(read_log(path), doctest::Contains("header"), ParseError);
  }
  SUBCASE("short row") {
    std::ofstream(path) << kTelemetryHeader << "\n0,1,0,0,5\n";
    CHECK_THROWS_WITH_AS(read_log(path), doctest::Contains("row 2"), ParseError);
  }
  SUBCASE("non-numeric field on a later row") {
    std::ofstream out(path);
    out << kTelemetryHeader << "\n";
    out << "0,1,0,2,5,0,0,0,0,0,0,0,0,0,0,3,3,0\n";
    out << "0,2,oops,0,5,0,0,0,0,0,0,0,0,0,-2,0,3,0\n";
    out.close();
    CHECK_THROWS_WITH_AS(read_log(path), doctest::Contains("row 3"), ParseError);
  }
  std::remove(path.c_str());
}

TEST_CASE("metrics_json carries every report field") {
  ScenarioConfig cfg = builtin_scenario("paper-4uav");
  cfg.duration = 1.0;
  const MetricsReport report = metrics(run(cfg));
  const std::string doc = metrics_json(report);
  for (const char* key :
       {"tail_fraction", "tail_start", "tail_max_error", "tail_max_error_global",
        "min_pairwise_distance", "min_pairwise_distance_tail", "max_abs_roll",
        "max_abs_pitch", "isolated_events", "saturated_steps", "setpoint_peak"}) {
    CAPTURE(key);
    CHECK(doc.find(key) != std::string::npos);
  }
  CHECK(doc.back() == '\n');
}

TEST_CASE("plot data series split the log into per-figure files") {
  ScenarioConfig cfg = builtin_scenario("paper-4uav");
  cfg.duration = 0.5;
  const SimLog log = run(cfg);

  const std::string dir = scratch_path("formsim_plotdata");
  std::filesystem::remove_all(dir);
  const std::vector<std::string> written = write_plot_data(log, dir);
  REQUIRE(written.size() == 3);

  const std::size_t expected_rows = 1 + log.rows.size();
  for (const std::string& path : written) {
    CAPTURE(path);
    CHECK(std::filesystem::exists(path));
    CHECK(line_count(path) == expected_rows);
  }

  std::ifstream in(dir + "/setpoints.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,agent,xd,yd");
  std::filesystem::remove_all(dir);
}
