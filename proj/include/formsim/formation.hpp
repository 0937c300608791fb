#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "formsim/errors.hpp"

namespace formsim {

// Static description of one formation: which agents lead, the planar offset
// each agent keeps from the (virtual) reference, the sensing radius that
// defines neighborhoods, and the shared altitude/yaw.
struct FormationSpec {
  int n = 0;
  std::vector<int> leaders;               // agent indices, 0-based
  std::vector<Eigen::Vector2d> biases;    // d_i0 per agent [m]
  double sensing_radius = 0.0;            // [m]
  double altitude = 0.0;                  // shared z setpoint [m]
  double yaw_d = 0.0;                     // shared yaw setpoint [rad]

  bool is_leader(int i) const {
    for (int l : leaders)
      if (l == i) return true;
    return false;
  }
};

// Circular reference r(t) = A * (sin wt, cos wt).
struct CircleReference {
  double amplitude = 0.0;     // [m]
  double angular_rate = 0.0;  // [rad/s]
};

// Piecewise-linear reference through (t_k, r_k) waypoints; holds the first
// point before the first knot and the last point after the final knot.
struct PolylineReference {
  std::vector<double> times;             // strictly increasing [s]
  std::vector<Eigen::Vector2d> points;   // [m]
};

using ReferenceTrajectory = std::variant<CircleReference, PolylineReference>;

struct ReferenceSample {
  Eigen::Vector2d r = Eigen::Vector2d::Zero();     // position [m]
  Eigen::Vector2d rdot = Eigen::Vector2d::Zero();  // velocity [m/s]
};

// Evaluates the reference at time t. Polyline velocity is one-sided
// (right-sided) at knots and zero outside the knot span.
ReferenceSample reference(const ReferenceTrajectory& rt, double t);

// Proximity graph over one position snapshot.
struct NeighborGraph {
  std::vector<std::vector<int>> neighbors;
  double timestamp = 0.0;
};

// Indices j != i whose planar distance to agent i is <= d (boundary
// inclusive).
std::vector<int> neighbor_set(const std::vector<Eigen::Vector2d>& positions, int i,
                              double d);

NeighborGraph build_neighbor_graph(const std::vector<Eigen::Vector2d>& positions,
                                   double d, double timestamp);

// Planar offset agent i keeps from agent j: d_ij = d_i0 - d_j0.
Eigen::Vector2d inter_distance(const FormationSpec& spec, int i, int j);

// Output of the neighbor-based trajectory generation for one agent.
struct GeneratedSetpoint {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // planar desired [m]
  double z_d = 0.0;                                    // [m]
  double psi_d = 0.0;                                  // [rad]
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // feedforward [m/s]
  bool isolated = false;
};

// Neighbor-averaged desired position for agent i over the frozen snapshot.
// Followers average x_j + d_ij over their neighbors; leaders blend the same
// sum with the supplied reference plus their own bias. Followers must not be
// handed a reference, and a follower without neighbors cannot generate a
// setpoint (the caller decides whether to hold or abort).
GeneratedSetpoint generate_setpoint(int i, const std::vector<Eigen::Vector2d>& positions,
                                    const NeighborGraph& graph, const FormationSpec& spec,
                                    const std::optional<Eigen::Vector2d>& r_t);

struct FormationErrorReport {
  std::vector<double> per_agent;  // e_i = |x_i - r - d_i0| [m]
  double max_error = 0.0;
};

FormationErrorReport formation_error(const std::vector<Eigen::Vector2d>& positions,
                                     const Eigen::Vector2d& r_t, const FormationSpec& spec);

// Time-indexed bias tables; the active table is the last whose switch time
// has been reached (switch instants included).
struct BiasSchedule {
  struct Entry {
    double switch_time = 0.0;
    std::vector<Eigen::Vector2d> biases;
  };
  std::vector<Entry> entries;
};

const std::vector<Eigen::Vector2d>& active_biases(const BiasSchedule& schedule, double t);

// Velocity feedforward from the generated setpoint stream: backward finite
// difference over one control period, first-order low-pass filtered. Returns
// zero on the first sample of a run.
class SetpointVelocityFilter {
 public:
  explicit SetpointVelocityFilter(double alpha = 0.9) : alpha_(alpha) {}

  Eigen::Vector2d update(const Eigen::Vector2d& setpoint, double dt);
  void reset();

 private:
  double alpha_;
  bool primed_ = false;
  Eigen::Vector2d last_setpoint_ = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity_ = Eigen::Vector2d::Zero();
};

}  // namespace formsim
