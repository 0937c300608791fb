#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "formsim/errors.hpp"

namespace formsim {

/// Physical constants of one vehicle, shared by every quadrotor in the fleet.
///
/// Defaults are typical small-quadrotor values; all of them can be overridden
/// from the scenario configuration. `omega_max` defaults so that the maximum
/// collective thrust is 2.5x the hover thrust; note the default is evaluated
/// at construction, so code that edits `m` or `k_t` afterwards should also
/// refresh `omega_max` (the config loader does).
struct QuadrotorParams {
  double m = 0.5;       // mass [kg]
  double ixb = 5e-3;    // roll inertia about x_b [kg m^2]
  double iyb = 5e-3;    // pitch inertia about y_b [kg m^2]
  double izb = 9e-3;    // yaw inertia about z_b [kg m^2]
  double k_t = 3e-5;    // rotor thrust coefficient [N s^2/rad^2]
  double k_tau = 7e-7;  // rotor drag-torque coefficient [N m s^2/rad^2]
  double l_a = 0.2;     // arm length [m]
  double g = 9.81;      // gravitational acceleration [m/s^2]
  double omega_max = default_omega_max(m, g, k_t);  // rotor speed ceiling [rad/s]

  /// Rotor ceiling giving a 2.5x hover thrust margin.
  static double default_omega_max(double m, double g, double k_t) {
    return std::sqrt(2.5 * m * g / (4.0 * k_t));
  }

  /// Per-rotor speed that exactly balances gravity with four rotors.
  double hover_rotor_speed() const { return std::sqrt(0.25 * (m * g / k_t)); }

  bool all_positive() const {
    return m > 0 && ixb > 0 && iyb > 0 && izb > 0 && k_t > 0 && k_tau > 0 &&
           l_a > 0 && g > 0 && omega_max > 0;
  }
};

/// Full 12-dimensional rigid-body state in the inertial frame.
///
/// `euler` holds (phi, theta, psi) = (roll, pitch, yaw); `rates` holds the
/// body-frame angular velocity (p, q, r).
struct QuadrotorState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // X, Y, Z [m]
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // [m/s]
  Eigen::Vector3d euler = Eigen::Vector3d::Zero();     // phi, theta, psi [rad]
  Eigen::Vector3d rates = Eigen::Vector3d::Zero();     // p, q, r [rad/s]

  Eigen::Matrix<double, 12, 1> to_vector() const {
    Eigen::Matrix<double, 12, 1> v;
    v << position, velocity, euler, rates;
    return v;
  }

  static QuadrotorState from_vector(const Eigen::Matrix<double, 12, 1>& v) {
    QuadrotorState s;
    s.position = v.segment<3>(0);
    s.velocity = v.segment<3>(3);
    s.euler = v.segment<3>(6);
    s.rates = v.segment<3>(9);
    return s;
  }

  bool all_finite() const { return to_vector().allFinite(); }
};

/// Angular velocities of the four propellers [rad/s], all non-negative.
struct RotorSpeeds {
  Eigen::Vector4d omega = Eigen::Vector4d::Zero();

  Eigen::Vector4d squared() const { return omega.cwiseProduct(omega); }

  /// Individual rotor thrusts f_i = K_T * omega_i^2 [N].
  Eigen::Vector4d thrusts(const QuadrotorParams& p) const {
    return p.k_t * squared();
  }
};

/// Total thrust plus the three body torques commanded on a vehicle.
struct ControlWrench {
  double f_t = 0.0;                                  // total thrust [N]
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();  // tau_phi, tau_theta, tau_psi [N m]
};

/// Pitch guard band: |theta| >= pi/2 - kGimbalGuard aborts instead of
/// evaluating the singular kinematic matrix.
inline constexpr double kGimbalGuard = 1e-3;  // [rad]

/// The 4x4 map from squared rotor speeds to (F_T, tau_phi, tau_theta, tau_psi).
/// The sign pattern doubles as the repository's rotor-numbering convention:
/// rotors 1,2 sit on the +x_b side (positive roll torque) and rotors 2,3 on
/// the +y_b side (positive pitch torque); rotors 1,3 spin opposite to 2,4.
Eigen::Matrix4d distribution_matrix(const QuadrotorParams& p);

/// Applies the distribution matrix to [w1^2 .. w4^2].
ControlWrench mix_rotors_to_wrench(const RotorSpeeds& omega, const QuadrotorParams& p);

/// Inverts the distribution matrix. Throws InfeasibleAllocationError when any
/// solved omega_i^2 is negative; use saturate_wrench_allocation in control
/// paths that must stay total.
RotorSpeeds allocate_wrench_to_rotors(const ControlWrench& w, const QuadrotorParams& p);

struct SaturatedAllocation {
  RotorSpeeds speeds;
  bool saturated = false;  // any omega_i^2 clamped into [0, omega_max^2]
};

/// Allocation variant that clamps each squared speed into [0, omega_max^2]
/// and reports whether clamping occurred.
SaturatedAllocation saturate_wrench_allocation(const ControlWrench& w, const QuadrotorParams& p);

/// Inertial acceleration (Xdd, Ydd, Zdd) of the translational dynamics,
/// gravity included.
Eigen::Vector3d translational_derivatives(const QuadrotorState& s, double f_t,
                                          const QuadrotorParams& p);

/// Body angular acceleration (pd, qd, rd) from the Euler rigid-body equations
/// with diagonal inertia.
Eigen::Vector3d rotational_derivatives(const QuadrotorState& s, const Eigen::Vector3d& torque,
                                       const QuadrotorParams& p);

/// Euler-angle rates (phid, thetad, psid) from body rates. Throws
/// GimbalLockError inside the pitch guard band.
Eigen::Vector3d euler_rates(const Eigen::Vector3d& angles, const Eigen::Vector3d& rates);

/// Time derivative of the full 12-dimensional state under a fixed wrench.
Eigen::Matrix<double, 12, 1> state_derivatives(const QuadrotorState& s, const ControlWrench& w,
                                               const QuadrotorParams& p);

/// One fixed-step RK4 integration of the state with the rotor command held
/// constant over the step (zero-order hold). Deterministic; propagates
/// GimbalLockError and throws NonFiniteStateError if the result degenerates.
QuadrotorState step(const QuadrotorState& s, const RotorSpeeds& omega, double dt,
                    const QuadrotorParams& p);

}  // namespace formsim
