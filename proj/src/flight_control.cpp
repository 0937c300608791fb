#include "formsim/flight_control.hpp"

#include <algorithm>
#include <cmath>

namespace formsim {

double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * M_PI);
  if (wrapped <= -M_PI) wrapped += 2.0 * M_PI;
  return wrapped;
}

AttitudeSetpoint position_control(const QuadrotorState& s, const PositionSetpoint& sp,
                                  const ControllerGains& gains, const QuadrotorParams& p) {
  const Eigen::Vector3d acc = gains.kp_pos * (sp.position - s.position) +
                              gains.kd_pos * (sp.velocity - s.velocity);

  // Thrust along the body z axis that realises the vertical demand at the
  // current attitude. An inverted vehicle would need negative thrust; clamp
  // to zero and let the attitude loop right it first.
  const double tilt_factor = std::cos(s.euler(0)) * std::cos(s.euler(1));
  AttitudeSetpoint out;
  out.f_t = std::max(0.0, p.m * (acc(2) + p.g) / tilt_factor);

  // Small-angle inversion of the horizontal dynamics around hover, rotated
  // into the current heading.
  const double cpsi = std::cos(s.euler(2));
  const double spsi = std::sin(s.euler(2));
  out.theta_d = std::clamp((acc(0) * cpsi + acc(1) * spsi) / p.g, -gains.max_tilt,
                           gains.max_tilt);
  out.phi_d = std::clamp((acc(0) * spsi - acc(1) * cpsi) / p.g, -gains.max_tilt,
                         gains.max_tilt);
  out.psi_d = sp.psi_d;
  return out;
}

Eigen::Vector3d attitude_control(const QuadrotorState& s, const AttitudeSetpoint& sp,
                                 const ControllerGains& gains, const QuadrotorParams& p) {
  Eigen::Vector3d tau;
  tau(0) = p.ixb * (gains.kp_att * (sp.phi_d - s.euler(0)) - gains.kd_att * s.rates(0));
  tau(1) = p.iyb * (gains.kp_att * (sp.theta_d - s.euler(1)) - gains.kd_att * s.rates(1));
  tau(2) = p.izb * (gains.kp_att * wrap_angle(sp.psi_d - s.euler(2)) -
                    gains.kd_att * s.rates(2));
  return tau;
}

NavigationCommand navigation_step(const QuadrotorState& s, const PositionSetpoint& sp,
                                  const ControllerGains& gains, const QuadrotorParams& p) {
  const AttitudeSetpoint att = position_control(s, sp, gains, p);
  ControlWrench wrench;
  wrench.f_t = att.f_t;
  wrench.torque = attitude_control(s, att, gains, p);
  const SaturatedAllocation alloc = saturate_wrench_allocation(wrench, p);
  return NavigationCommand{alloc.speeds, alloc.saturated};
}

}  // namespace formsim
