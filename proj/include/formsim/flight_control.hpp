#pragma once

#include <Eigen/Dense>

#include "formsim/quadrotor.hpp"

namespace formsim {

// Gains for the cascade navigation controller: an outer PD loop on position
// that commands thrust plus desired roll/pitch, and an inner PD loop on
// attitude that commands body torques. Both loops run at the simulation rate.
struct ControllerGains {
  // Near-critically damped outer loop, with the inner loop roughly five times
  // faster so the cascade separation holds; tuned against the built-in
  // studies (steady formation error and the 20-degree attitude envelope).
  double kp_pos = 12.0;    // outer proportional gain [1/s^2]
  double kd_pos = 6.93;    // outer derivative gain [1/s]
  double kp_att = 300.0;   // inner proportional gain [1/s^2]
  double kd_att = 34.6;    // inner derivative gain [1/s]
  double max_tilt = 0.30;  // commanded roll/pitch clamp [rad]

  bool valid() const {
    return kp_pos > 0.0 && kd_pos > 0.0 && kp_att > 0.0 && kd_att > 0.0 &&
           max_tilt > 0.0 && max_tilt < M_PI / 2.0;
  }
};

// Desired position, velocity feedforward and yaw for one vehicle.
struct PositionSetpoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // [m]
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // feedforward [m/s]
  double psi_d = 0.0;                                  // desired yaw [rad]

  bool all_finite() const {
    return position.allFinite() && velocity.allFinite() && std::isfinite(psi_d);
  }
};

// Intermediate signal between the two loops: desired attitude plus total
// thrust.
struct AttitudeSetpoint {
  double phi_d = 0.0;    // desired roll [rad]
  double theta_d = 0.0;  // desired pitch [rad]
  double psi_d = 0.0;    // desired yaw [rad]
  double f_t = 0.0;      // total thrust [N], >= 0
};

// Rotor command plus a flag telling whether the wrench had to be clipped to
// the feasible set.
struct NavigationCommand {
  RotorSpeeds speeds;
  bool saturated = false;
};

// Maps an angle to the (-pi, pi] branch.
double wrap_angle(double angle);

// Outer loop: PD acceleration demand, converted to thrust and desired
// roll/pitch by small-angle inversion of the translational dynamics.
AttitudeSetpoint position_control(const QuadrotorState& s, const PositionSetpoint& sp,
                                  const ControllerGains& gains, const QuadrotorParams& p);

// Inner loop: PD torques on roll, pitch and (wrapped) yaw error.
Eigen::Vector3d attitude_control(const QuadrotorState& s, const AttitudeSetpoint& sp,
                                 const ControllerGains& gains, const QuadrotorParams& p);

// Full cascade: position loop, attitude loop, rotor allocation with
// saturation handling. Never throws; infeasible demands surface as the
// saturated flag.
NavigationCommand navigation_step(const QuadrotorState& s, const PositionSetpoint& sp,
                                  const ControllerGains& gains, const QuadrotorParams& p);

}  // namespace formsim
