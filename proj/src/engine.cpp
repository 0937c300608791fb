#include "formsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "formsim/log.hpp"

namespace formsim {

namespace {

std::string agent_label(int i) { return "agent " + std::to_string(i + 1); }

void check_bias_table(const std::vector<Eigen::Vector2d>& biases, int n,
                      const std::string& where) {
  if (static_cast<int>(biases.size()) < n) {
    throw ValidationError(where + " missing " +
                          agent_label(static_cast<int>(biases.size())));
  }
  if (static_cast<int>(biases.size()) > n) {
    throw ValidationError(where + " has " + std::to_string(biases.size()) +
                          " entries for " + std::to_string(n) + " agents");
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) throw ValidationError(where + " contains a non-finite value");
  }
}

}  // namespace

void validate(const ScenarioConfig& config) {
  if (!(config.dt > 0.0)) throw ValidationError("dt > 0 is required");
  if (!(config.duration >= config.dt)) {
    throw ValidationError("duration must cover at least one step (duration >= dt)");
  }
  if (!config.params.all_positive()) {
    throw ValidationError("quadrotor parameters must all be positive");
  }
  if (!config.gains.valid()) {
    throw ValidationError("controller gains must be positive with 0 < max_tilt < pi/2");
  }

  const int n = config.formation.n;
  if (n < 2) throw ValidationError("at least two agents are required");
  if (!(config.formation.sensing_radius > 0.0)) {
    throw ValidationError("sensing radius must be positive");
  }
  if (config.formation.leaders.empty()) {
    throw ValidationError("at least one leader is required");
  }
  for (int l : config.formation.leaders) {
    if (l < 0 || l >= n) {
      throw ValidationError("leader index " + std::to_string(l + 1) +
                            " out of range 1.." + std::to_string(n));
    }
  }
  check_bias_table(config.formation.biases, n, "bias table");

  if (static_cast<int>(config.initial_positions.size()) < n) {
    throw ValidationError("initial positions missing " +
                          agent_label(static_cast<int>(config.initial_positions.size())));
  }
  if (static_cast<int>(config.initial_positions.size()) > n) {
    throw ValidationError("initial positions list has " +
                          std::to_string(config.initial_positions.size()) +
                          " entries for " + std::to_string(n) + " agents");
  }
  for (int i = 0; i < n; ++i) {
    if (!config.initial_positions[i].allFinite()) {
      throw ValidationError("initial position of " + agent_label(i) + " is not finite");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector2d delta = config.initial_positions[i].head<2>() -
                                    config.initial_positions[j].head<2>();
      if (delta.norm() == 0.0) {
        throw ValidationError("initial positions of " + agent_label(i) + " and " +
                              agent_label(j) + " coincide");
      }
    }
  }

  double prev_switch = 0.0;
  for (const auto& entry : config.bias_switches) {
    if (!(entry.switch_time > prev_switch)) {
      throw ValidationError("bias switch times must be strictly increasing and positive");
    }
    prev_switch = entry.switch_time;
    check_bias_table(entry.biases, n, "bias table at t=" + std::to_string(entry.switch_time));
  }

  if (const auto* line = std::get_if<PolylineReference>(&config.reference_trajectory)) {
    if (line->points.empty() || line->points.size() != line->times.size()) {
      throw ValidationError("polyline reference needs matching, non-empty times and points");
    }
    for (std::size_t k = 1; k < line->times.size(); ++k) {
      if (!(line->times[k] > line->times[k - 1])) {
        throw ValidationError("polyline reference times must be strictly increasing");
      }
    }
  } else {
    const auto& circle = std::get<CircleReference>(config.reference_trajectory);
    if (!std::isfinite(circle.amplitude) || !std::isfinite(circle.angular_rate)) {
      throw ValidationError("circle reference parameters must be finite");
    }
  }
}

namespace {

// Outcome of one agent's slice of a step. Computed possibly in parallel,
// inspected strictly in agent-index order so failures surface
// deterministically.
enum class KernelStatus { kOk, kIsolatedAbort, kGimbal, kNonFinite, kOther };

struct KernelResult {
  KernelStatus status = KernelStatus::kOk;
  std::string message;
  QuadrotorState next;
  LogRow row;
};

// Mutable per-agent carry-over between steps; each kernel touches only its
// own slot, which keeps the parallel sweep free of shared writes.
struct AgentScratch {
  GeneratedSetpoint last_setpoint;
  bool has_setpoint = false;
  SetpointVelocityFilter filter;
};

KernelResult agent_kernel(int i, double t, const ScenarioConfig& config,
                          const FormationSpec& spec,
                          const std::vector<Eigen::Vector2d>& snapshot,
                          const NeighborGraph& graph, const ReferenceSample& ref,
                          const QuadrotorState& state, AgentScratch& scratch) {
  KernelResult out;
  try {
    GeneratedSetpoint gen;
    bool held = false;
    if (spec.is_leader(i)) {
      gen = generate_setpoint(i, snapshot, graph, spec, ref.r);
    } else if (graph.neighbors[i].empty()) {
      if (config.isolation_policy == IsolationPolicy::kAbort) {
        out.status = KernelStatus::kIsolatedAbort;
        out.message = "follower " + agent_label(i) + " lost all neighbors at t=" +
                      std::to_string(t);
        return out;
      }
      held = true;
      if (scratch.has_setpoint) {
        gen = scratch.last_setpoint;
      } else {
        gen.position = snapshot[i];  // nothing to hold yet: stay put
        gen.z_d = spec.altitude;
        gen.psi_d = spec.yaw_d;
      }
      gen.isolated = true;
    } else {
      gen = generate_setpoint(i, snapshot, graph, spec, std::nullopt);
    }
    scratch.last_setpoint = gen;
    scratch.has_setpoint = true;

    const Eigen::Vector2d feedforward = scratch.filter.update(gen.position, config.dt);

    PositionSetpoint sp;
    sp.position << gen.position(0), gen.position(1), gen.z_d;
    sp.velocity << feedforward(0), feedforward(1), 0.0;
    sp.psi_d = gen.psi_d;

    const NavigationCommand cmd = navigation_step(state, sp, config.gains, config.params);
    out.next = step(state, cmd.speeds, config.dt, config.params);

    out.row.t = t;
    out.row.agent = i;
    out.row.state = state;
    out.row.setpoint = gen.position;
    out.row.err = (snapshot[i] - ref.r - spec.biases[i]).norm();
    out.row.flags = (cmd.saturated ? kFlagSaturated : 0u) |
                    (held ? kFlagIsolatedHeld : 0u);
  } catch (const GimbalLockError& e) {
    out.status = KernelStatus::kGimbal;
    out.message = e.what();
  } catch (const NonFiniteStateError& e) {
    out.status = KernelStatus::kNonFinite;
    out.message = e.what();
  } catch (const std::exception& e) {
    out.status = KernelStatus::kOther;
    out.message = e.what();
  }
  return out;
}

[[noreturn]] void raise_abort(const KernelResult& result, int i, double t) {
  std::ostringstream what;
  what << "run aborted at t=" << t << ", " << agent_label(i) << ": " << result.message;
  switch (result.status) {
    case KernelStatus::kGimbal:
      throw GimbalLockError(what.str());
    case KernelStatus::kNonFinite:
      throw NonFiniteStateError(what.str());
    case KernelStatus::kIsolatedAbort:
      throw IsolatedFollowerError(what.str());
    default:
      throw SimulationAbortError(what.str());
  }
}

}  // namespace

SimLog run(const ScenarioConfig& config, ExecutionMode mode) {
  validate(config);

  const int n = config.formation.n;
  const int n_steps =
      std::max<int>(1, static_cast<int>(std::llround(config.duration / config.dt)));

  BiasSchedule schedule;
  schedule.entries.push_back({0.0, config.formation.biases});
  for (const auto& entry : config.bias_switches) schedule.entries.push_back(entry);

  std::vector<QuadrotorState> states(n);
  for (int i = 0; i < n; ++i) states[i].position = config.initial_positions[i];

  std::vector<AgentScratch> scratch(n);
  std::vector<KernelResult> results(n);
  std::vector<Eigen::Vector2d> snapshot(n);
  std::vector<bool> isolation_warned(n, false);

  FormationSpec spec = config.formation;

  SimLog log;
  log.n_agents = n;
  log.dt = config.dt;
  log.rows.reserve(static_cast<std::size_t>(n_steps) * n);

  const bool parallel = mode == ExecutionMode::kParallel;
  const bool fixed_graph = config.neighbor_mode == NeighborMode::kFixedFromStart;

  for (int i = 0; i < n; ++i) snapshot[i] = states[i].position.head<2>();
  NeighborGraph graph = build_neighbor_graph(snapshot, spec.sensing_radius, 0.0);
  if (fixed_graph) {
    // A follower with nobody in range at the start would stay blind for the
    // whole run; that is a configuration mistake, not a runtime event.
    for (int i = 0; i < n; ++i) {
      if (!spec.is_leader(i) && graph.neighbors[i].empty()) {
        throw ValidationError("follower " + agent_label(i) +
                              " has no neighbors in the initial configuration");
      }
    }
  }

  for (int k = 0; k < n_steps; ++k) {
    const double t = k * config.dt;
    spec.biases = active_biases(schedule, t);
    for (int i = 0; i < n; ++i) snapshot[i] = states[i].position.head<2>();
    if (!fixed_graph) {
      graph = build_neighbor_graph(snapshot, spec.sensing_radius, t);
    }
    const ReferenceSample ref = reference(config.reference_trajectory, t);

    if (parallel) {
#ifdef FORMSIM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (int i = 0; i < n; ++i) {
        results[i] =
            agent_kernel(i, t, config, spec, snapshot, graph, ref, states[i], scratch[i]);
      }
    } else {
      for (int i = 0; i < n; ++i) {
        results[i] =
            agent_kernel(i, t, config, spec, snapshot, graph, ref, states[i], scratch[i]);
      }
    }

    // Commit in agent-index order: state updates, log rows, and any abort all
    // happen independently of how the sweep above was scheduled.
    for (int i = 0; i < n; ++i) {
      if (results[i].status != KernelStatus::kOk) raise_abort(results[i], i, t);
    }
    for (int i = 0; i < n; ++i) {
      if ((results[i].row.flags & kFlagIsolatedHeld) && !isolation_warned[i]) {
        isolation_warned[i] = true;
        log_warn(agent_label(i) + " lost all neighbors at t=" +
                 std::to_string(t) + " s; holding last setpoint");
      }
      states[i] = results[i].next;
      log.rows.push_back(results[i].row);
    }
  }
  return log;
}

MetricsReport metrics(const SimLog& log, double tail_fraction) {
  if (log.rows.empty()) throw EmptyLogError("metrics require a non-empty log");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw ValidationError("tail fraction must lie in (0, 1]");
  }
  const int n = log.n_agents;
  if (n <= 0 || log.rows.size() % static_cast<std::size_t>(n) != 0) {
    throw ValidationError("log rows do not tile into whole steps");
  }

  MetricsReport report;
  report.tail_fraction = tail_fraction;
  const double t0 = log.rows.front().t;
  const double t1 = log.rows.back().t;
  report.tail_start = t1 - tail_fraction * (t1 - t0);
  report.tail_max_error.assign(n, 0.0);
  report.setpoint_peak.assign(n, Eigen::Vector2d::Zero());
  report.min_pairwise_distance = std::numeric_limits<double>::infinity();
  report.min_pairwise_distance_tail = std::numeric_limits<double>::infinity();

  const std::size_t n_steps = log.rows.size() / static_cast<std::size_t>(n);
  std::vector<Eigen::Vector2d> pos(n);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const LogRow* block = &log.rows[k * n];
    const bool in_tail = block[0].t >= report.tail_start;
    for (int i = 0; i < n; ++i) {
      const LogRow& row = block[i];
      pos[i] = row.state.position.head<2>();
      report.max_abs_roll = std::max(report.max_abs_roll, std::abs(row.state.euler(0)));
      report.max_abs_pitch = std::max(report.max_abs_pitch, std::abs(row.state.euler(1)));
      report.setpoint_peak[i] =
          report.setpoint_peak[i].cwiseMax(row.setpoint.cwiseAbs());
      if (row.flags & kFlagIsolatedHeld) ++report.isolated_events;
      if (row.flags & kFlagSaturated) ++report.saturated_steps;
      if (in_tail) {
        report.tail_max_error[i] = std::max(report.tail_max_error[i], row.err);
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double dist = (pos[i] - pos[j]).norm();
        report.min_pairwise_distance = std::min(report.min_pairwise_distance, dist);
        if (in_tail) {
          report.min_pairwise_distance_tail =
              std::min(report.min_pairwise_distance_tail, dist);
        }
      }
    }
  }
  report.tail_max_error_global =
      *std::max_element(report.tail_max_error.begin(), report.tail_max_error.end());
  return report;
}

namespace {

std::vector<Eigen::Vector2d> doubled(const std::vector<Eigen::Vector2d>& biases) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(biases.size());
  for (const auto& b : biases) out.push_back(2.0 * b);
  return out;
}

}  // namespace

ScenarioConfig builtin_scenario(const std::string& name) {
  const std::vector<Eigen::Vector2d> diamond = {
      {0.0, 2.0}, {-2.0, 0.0}, {0.0, -2.0}, {2.0, 0.0}};

  ScenarioConfig cfg;
  cfg.name = name;
  cfg.reference_trajectory = CircleReference{3.0, 0.1};
  cfg.formation.leaders = {0};
  cfg.formation.altitude = 5.0;

  if (name == "paper-4uav") {
    cfg.formation.n = 4;
    cfg.formation.biases = diamond;
    cfg.formation.sensing_radius = 3.0;
    for (const auto& b : diamond) cfg.initial_positions.push_back({b(0), b(1), 5.0});
  } else if (name == "paper-4uav-wide") {
    // Enlarged pattern that keeps the agents clear of each other's paths; the
    // radius grows with it so the ring stays connected.
    cfg.formation.n = 4;
    cfg.formation.biases = doubled(diamond);
    cfg.formation.sensing_radius = 6.0;
    for (const auto& b : cfg.formation.biases)
      cfg.initial_positions.push_back({b(0), b(1), 5.0});
  } else if (name == "paper-interdistance") {
    // Starts as the tight diamond, spreads to the doubled pattern at t=60 s.
    cfg.formation.n = 4;
    cfg.formation.biases = diamond;
    cfg.formation.sensing_radius = 3.0;
    cfg.bias_switches.push_back({60.0, doubled(diamond)});
    for (const auto& b : diamond) cfg.initial_positions.push_back({b(0), b(1), 5.0});
  } else if (name == "paper-6uav") {
    cfg.formation.n = 6;
    cfg.formation.biases = {{0.0, 6.0}, {-6.0, 0.0}, {-12.0, -6.0},
                            {0.0, -6.0}, {12.0, -6.0}, {6.0, 0.0}};
    cfg.formation.sensing_radius = 8.5;
    // No printed start positions for this fleet: begin at 80% of the pattern
    // so every follower already has a neighbor in range.
    for (const auto& b : cfg.formation.biases)
      cfg.initial_positions.push_back({0.8 * b(0), 0.8 * b(1), 5.0});
  } else {
    std::string names;
    for (const auto& s : builtin_scenario_names()) names += " " + s;
    throw ValidationError("unknown scenario '" + name + "'; expected one of:" + names);
  }
  return cfg;
}

std::vector<std::string> builtin_scenario_names() {
  return {"paper-4uav", "paper-4uav-wide", "paper-interdistance", "paper-6uav"};
}

}  // namespace formsim
