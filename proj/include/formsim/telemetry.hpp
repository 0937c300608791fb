#pragma once

#include <string>
#include <vector>

#include "formsim/engine.hpp"

namespace formsim {

// Fixed telemetry column set: one row per agent per step, ordered by
// (t, agent), agents numbered from 1, floating point carried with 9
// significant digits.
inline constexpr const char* kTelemetryHeader =
    "t,agent,x,y,z,vx,vy,vz,phi,theta,psi,p,q,r,xd,yd,err,flags";

// Serializes a log as CSV, writing a temporary sibling first and renaming it
// into place.
void write_log(const SimLog& log, const std::string& path);

// Parses a telemetry file back into a log. The agent count is reconstructed
// from the first time block and dt from the first two blocks. Throws
// ParseError naming the offending row, IoError when the file is unreadable.
SimLog read_log(const std::string& path);

// Renders a MetricsReport as a JSON document (two-space indent, trailing
// newline).
std::string metrics_json(const MetricsReport& report);

// metrics_json into a file, written atomically.
void write_metrics(const MetricsReport& report, const std::string& path);

// Extracts per-figure data series from a log, one CSV per family:
// setpoints.csv (generated planar setpoints vs time), paths_2d.csv (planar
// positions), attitude.csv (roll and pitch traces). Creates the directory if
// needed; returns the paths written.
std::vector<std::string> write_plot_data(const SimLog& log, const std::string& dir);

}  // namespace formsim
