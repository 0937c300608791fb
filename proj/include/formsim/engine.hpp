#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "formsim/flight_control.hpp"
#include "formsim/formation.hpp"
#include "formsim/quadrotor.hpp"

namespace formsim {

// What to do when a follower loses all neighbors mid-run.
enum class IsolationPolicy { kHoldLastSetpoint, kAbort };

// How the proximity graph evolves. kFixedFromStart freezes the graph built
// from the initial positions, which is what keeps a formation anchored while
// it crosses its own sensing margin during transients; kEachStep rebuilds it
// from every snapshot.
enum class NeighborMode { kFixedFromStart, kEachStep };

// Whether the per-agent work inside a step runs on one thread or across the
// OpenMP pool. Results are bit-identical either way.
enum class ExecutionMode { kSerial, kParallel };

// Full description of one simulation run. No stochastic elements: two runs
// of the same config produce identical logs.
struct ScenarioConfig {
  std::string name = "custom";
  double dt = 0.01;        // [s]
  double duration = 120.0; // [s]
  QuadrotorParams params;
  ControllerGains gains;
  FormationSpec formation;  // biases field holds the initial table
  ReferenceTrajectory reference_trajectory = CircleReference{3.0, 0.1};
  // Later bias tables; the initial one comes from formation.biases.
  std::vector<BiasSchedule::Entry> bias_switches;
  std::vector<Eigen::Vector3d> initial_positions;  // [m], agents start at rest
  IsolationPolicy isolation_policy = IsolationPolicy::kHoldLastSetpoint;
  NeighborMode neighbor_mode = NeighborMode::kFixedFromStart;
};

// Throws ValidationError naming the first violated invariant.
void validate(const ScenarioConfig& config);

// Row flags.
inline constexpr std::uint32_t kFlagSaturated = 1u << 0;
inline constexpr std::uint32_t kFlagIsolatedHeld = 1u << 1;

struct LogRow {
  double t = 0.0;
  int agent = 0;
  QuadrotorState state;                                // sampled before the step
  Eigen::Vector2d setpoint = Eigen::Vector2d::Zero();  // generated planar desired
  double err = 0.0;                                    // |x_i - r - d_i0|
  std::uint32_t flags = 0;
};

struct SimLog {
  int n_agents = 0;
  double dt = 0.0;
  std::vector<LogRow> rows;  // ordered by (t, agent), one row per agent per step
};

// Runs the synchronous loop: snapshot positions, refresh biases and the
// neighbor graph, generate setpoints, run the cascade controller, integrate
// each vehicle one step, log. Aborts with diagnostics on gimbal lock,
// non-finite state, or (in strict mode) an isolated follower.
SimLog run(const ScenarioConfig& config, ExecutionMode mode = ExecutionMode::kParallel);

struct MetricsReport {
  double tail_fraction = 0.25;
  double tail_start = 0.0;                  // [s]
  std::vector<double> tail_max_error;       // per agent, over the tail window [m]
  double tail_max_error_global = 0.0;       // [m]
  double min_pairwise_distance = 0.0;       // over the whole run [m]
  double min_pairwise_distance_tail = 0.0;  // over the tail window [m]
  double max_abs_roll = 0.0;                // over the whole run [rad]
  double max_abs_pitch = 0.0;               // [rad]
  std::int64_t isolated_events = 0;
  std::int64_t saturated_steps = 0;
  std::vector<Eigen::Vector2d> setpoint_peak;  // per agent max |x_d|, |y_d| [m]
};

// Summary statistics over a log; steady-state figures use the trailing
// tail_fraction of the run, peaks the whole run.
MetricsReport metrics(const SimLog& log, double tail_fraction = 0.25);

// The four built-in studies: paper-4uav, paper-4uav-wide, paper-interdistance,
// paper-6uav. Throws ValidationError for unknown names.
ScenarioConfig builtin_scenario(const std::string& name);

std::vector<std::string> builtin_scenario_names();

}  // namespace formsim
