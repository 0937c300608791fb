#include "formsim/formation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace formsim {

ReferenceSample reference(const ReferenceTrajectory& rt, double t) {
  ReferenceSample out;
  if (const auto* circle = std::get_if<CircleReference>(&rt)) {
    const double a = circle->amplitude;
    const double w = circle->angular_rate;
    out.r << a * std::sin(w * t), a * std::cos(w * t);
    out.rdot << a * w * std::cos(w * t), -a * w * std::sin(w * t);
    return out;
  }
  const auto& line = std::get<PolylineReference>(rt);
  if (line.points.empty()) return out;
  if (t <= line.times.front()) {
    out.r = line.points.front();
    return out;
  }
  if (t >= line.times.back()) {
    out.r = line.points.back();
    return out;
  }
  const auto upper = std::upper_bound(line.times.begin(), line.times.end(), t);
  const auto k = static_cast<std::size_t>(upper - line.times.begin()) - 1;
  const double span = line.times[k + 1] - line.times[k];
  const double s = (t - line.times[k]) / span;
  out.r = (1.0 - s) * line.points[k] + s * line.points[k + 1];
  out.rdot = (line.points[k + 1] - line.points[k]) / span;
  return out;
}

std::vector<int> neighbor_set(const std::vector<Eigen::Vector2d>& positions, int i,
                              double d) {
  std::vector<int> out;
  const int n = static_cast<int>(positions.size());
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    if ((positions[j] - positions[i]).norm() <= d) out.push_back(j);
  }
  return out;
}

NeighborGraph build_neighbor_graph(const std::vector<Eigen::Vector2d>& positions,
                                   double d, double timestamp) {
  NeighborGraph graph;
  graph.timestamp = timestamp;
  graph.neighbors.resize(positions.size());
  for (int i = 0; i < static_cast<int>(positions.size()); ++i) {
    graph.neighbors[i] = neighbor_set(positions, i, d);
  }
  return graph;
}

Eigen::Vector2d inter_distance(const FormationSpec& spec, int i, int j) {
  return spec.biases[i] - spec.biases[j];
}

GeneratedSetpoint generate_setpoint(int i, const std::vector<Eigen::Vector2d>& positions,
                                    const NeighborGraph& graph, const FormationSpec& spec,
                                    const std::optional<Eigen::Vector2d>& r_t) {
  const bool leader = spec.is_leader(i);
  if (leader && !r_t) {
    throw MissingReferenceError("leader agent " + std::to_string(i) +
                                " generated a setpoint without a reference");
  }
  if (!leader && r_t) {
    throw ValidationError("follower agent " + std::to_string(i) +
                          " must not receive the reference trajectory");
  }

  const std::vector<int>& nbrs = graph.neighbors[i];
  if (!leader && nbrs.empty()) {
    throw IsolatedFollowerError("follower agent " + std::to_string(i) +
                                " has no neighbors within the sensing radius");
  }

  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (int j : nbrs) sum += positions[j] + inter_distance(spec, i, j);

  GeneratedSetpoint out;
  if (leader) {
    sum += *r_t + spec.biases[i];
    out.position = sum / static_cast<double>(nbrs.size() + 1);
  } else {
    out.position = sum / static_cast<double>(nbrs.size());
  }
  out.z_d = spec.altitude;
  out.psi_d = spec.yaw_d;
  return out;
}

FormationErrorReport formation_error(const std::vector<Eigen::Vector2d>& positions,
                                     const Eigen::Vector2d& r_t,
                                     const FormationSpec& spec) {
  FormationErrorReport report;
  report.per_agent.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double e = (positions[i] - r_t - spec.biases[i]).norm();
    report.per_agent.push_back(e);
    report.max_error = std::max(report.max_error, e);
  }
  return report;
}

const std::vector<Eigen::Vector2d>& active_biases(const BiasSchedule& schedule, double t) {
  if (schedule.entries.empty()) {
    throw ValidationError("bias schedule is empty");
  }
  const std::vector<Eigen::Vector2d>* active = &schedule.entries.front().biases;
  for (const auto& entry : schedule.entries) {
    if (entry.switch_time <= t) active = &entry.biases;
  }
  return *active;
}

Eigen::Vector2d SetpointVelocityFilter::update(const Eigen::Vector2d& setpoint, double dt) {
  if (!primed_) {
    primed_ = true;
    last_setpoint_ = setpoint;
    velocity_.setZero();
    return velocity_;
  }
  const Eigen::Vector2d raw = (setpoint - last_setpoint_) / dt;
  velocity_ = alpha_ * velocity_ + (1.0 - alpha_) * raw;
  last_setpoint_ = setpoint;
  return velocity_;
}

void SetpointVelocityFilter::reset() {
  primed_ = false;
  last_setpoint_.setZero();
  velocity_.setZero();
}

}  // namespace formsim
