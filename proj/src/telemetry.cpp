#include "formsim/telemetry.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>

#include <json.hpp>

#include "atomic_write.hpp"

namespace formsim {

namespace {

void append_row(std::string& out, const LogRow& row) {
  char buf[512];
  const auto& s = row.state;
  std::snprintf(buf, sizeof buf,
                "%.9g,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                "%.9g,%.9g,%.9g,%.9g,%u\n",
                row.t, row.agent + 1, s.position(0), s.position(1), s.position(2),
                s.velocity(0), s.velocity(1), s.velocity(2), s.euler(0), s.euler(1),
                s.euler(2), s.rates(0), s.rates(1), s.rates(2), row.setpoint(0),
                row.setpoint(1), row.err, row.flags);
  out += buf;
}

[[noreturn]] void row_fail(const std::string& path, std::size_t line_no,
                           const std::string& message) {
  throw ParseError("row " + std::to_string(line_no) + " of '" + path + "': " + message);
}

LogRow parse_row(std::string_view line, const std::string& path, std::size_t line_no) {
  std::array<std::string_view, 18> fields;
  std::size_t count = 0;
  std::size_t begin = 0;
  for (std::size_t k = 0; k <= line.size(); ++k) {
    if (k == line.size() || line[k] == ',') {
      if (count == fields.size()) row_fail(path, line_no, "expected 18 fields");
      fields[count++] = line.substr(begin, k - begin);
      begin = k + 1;
    }
  }
  if (count != fields.size()) {
    row_fail(path, line_no,
             "expected 18 fields, got " + std::to_string(count));
  }

  auto number = [&](std::size_t idx, const char* name) {
    double value = 0.0;
    const std::string_view f = fields[idx];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
    if (ec != std::errc{} || ptr != f.data() + f.size()) {
      row_fail(path, line_no, std::string("field '") + name + "' is not a number");
    }
    return value;
  };

  LogRow row;
  row.t = number(0, "t");
  {
    int agent = 0;
    const std::string_view f = fields[1];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), agent);
    if (ec != std::errc{} || ptr != f.data() + f.size() || agent < 1) {
      row_fail(path, line_no, "field 'agent' is not a positive integer");
    }
    row.agent = agent - 1;
  }
  row.state.position = {number(2, "x"), number(3, "y"), number(4, "z")};
  row.state.velocity = {number(5, "vx"), number(6, "vy"), number(7, "vz")};
  row.state.euler = {number(8, "phi"), number(9, "theta"), number(10, "psi")};
  row.state.rates = {number(11, "p"), number(12, "q"), number(13, "r")};
  row.setpoint = {number(14, "xd"), number(15, "yd")};
  row.err = number(16, "err");
  {
    std::uint32_t flags = 0;
    const std::string_view f = fields[17];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), flags);
    if (ec != std::errc{} || ptr != f.data() + f.size()) {
      row_fail(path, line_no, "field 'flags' is not an unsigned integer");
    }
    row.flags = flags;
  }
  return row;
}

}  // namespace

void write_log(const SimLog& log, const std::string& path) {
  std::string out;
  out.reserve(64 + log.rows.size() * 180);
  out += kTelemetryHeader;
  out += '\n';
  for (const LogRow& row : log.rows) append_row(out, row);
  atomic_write_file(path, out);
}

SimLog read_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("'" + path + "': missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTelemetryHeader) {
    throw ParseError("'" + path + "': unexpected header '" + line + "'");
  }

  SimLog log;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    log.rows.push_back(parse_row(line, path, line_no));
  }
  if (in.bad()) throw IoError("failed while reading '" + path + "'");

  if (!log.rows.empty()) {
    const double t0 = log.rows.front().t;
    std::size_t n = 0;
    while (n < log.rows.size() && log.rows[n].t == t0) ++n;
    log.n_agents = static_cast<int>(n);
    if (log.rows.size() % n != 0) {
      throw ParseError("'" + path + "': rows do not tile into whole steps of " +
                       std::to_string(n) + " agents");
    }
    if (log.rows.size() > n) log.dt = log.rows[n].t - t0;
  }
  return log;
}

std::string metrics_json(const MetricsReport& report) {
  nlohmann::ordered_json doc;
  doc["tail_fraction"] = report.tail_fraction;
  doc["tail_start"] = report.tail_start;
  doc["tail_max_error"] = report.tail_max_error;
  doc["tail_max_error_global"] = report.tail_max_error_global;
  doc["min_pairwise_distance"] = report.min_pairwise_distance;
  doc["min_pairwise_distance_tail"] = report.min_pairwise_distance_tail;
  doc["max_abs_roll"] = report.max_abs_roll;
  doc["max_abs_pitch"] = report.max_abs_pitch;
  doc["isolated_events"] = report.isolated_events;
  doc["saturated_steps"] = report.saturated_steps;
  nlohmann::ordered_json peaks = nlohmann::ordered_json::array();
  for (const auto& peak : report.setpoint_peak) {
    peaks.push_back(nlohmann::ordered_json::array({peak(0), peak(1)}));
  }
  doc["setpoint_peak"] = peaks;
  return doc.dump(2) + "\n";
}

void write_metrics(const MetricsReport& report, const std::string& path) {
  atomic_write_file(path, metrics_json(report));
}

std::vector<std::string> write_plot_data(const SimLog& log, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());

  std::string setpoints = "t,agent,xd,yd\n";
  std::string paths = "t,agent,x,y\n";
  std::string attitude = "t,agent,phi,theta\n";
  char buf[256];
  for (const LogRow& row : log.rows) {
    std::snprintf(buf, sizeof buf, "%.9g,%d,%.9g,%.9g\n", row.t, row.agent + 1,
                  row.setpoint(0), row.setpoint(1));
    setpoints += buf;
    std::snprintf(buf, sizeof buf, "%.9g,%d,%.9g,%.9g\n", row.t, row.agent + 1,
                  row.state.position(0), row.state.position(1));
    paths += buf;
    std::snprintf(buf, sizeof buf, "%.9g,%d,%.9g,%.9g\n", row.t, row.agent + 1,
                  row.state.euler(0), row.state.euler(1));
    attitude += buf;
  }

  const std::vector<std::pair<std::string, const std::string*>> files = {
      {dir + "/setpoints.csv", &setpoints},
      {dir + "/paths_2d.csv", &paths},
      {dir + "/attitude.csv", &attitude},
  };
  std::vector<std::string> written;
  for (const auto& [path, contents] : files) {
    atomic_write_file(path, *contents);
    written.push_back(path);
  }
  return written;
}

}  // namespace formsim
