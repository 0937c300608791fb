#include "formsim/quadrotor.hpp"

#include <cmath>
#include <sstream>

namespace formsim {

Eigen::Matrix4d distribution_matrix(const QuadrotorParams& p) {
  const double kt = p.k_t;
  const double kl = p.k_t * p.l_a;
  const double kq = p.k_tau;
  Eigen::Matrix4d m;
  m << kt, kt, kt, kt,
       kl, kl, -kl, -kl,
       -kl, kl, kl, -kl,
       kq, -kq, kq, -kq;
  return m;
}

ControlWrench mix_rotors_to_wrench(const RotorSpeeds& omega, const QuadrotorParams& p) {
  const Eigen::Vector4d w = distribution_matrix(p) * omega.squared();
  ControlWrench out;
  out.f_t = w(0);
  out.torque = w.tail<3>();
  return out;
}

namespace {

// The distribution matrix has mutually orthogonal rows (a signed Hadamard
// pattern), so its inverse is the scaled transpose. Solving through the sign
// pattern directly keeps the allocation exact for zero torques.
Eigen::Vector4d solve_squared_speeds(const ControlWrench& w, const QuadrotorParams& p) {
  const double u = w.f_t / p.k_t;
  const double a = w.torque(0) / (p.k_t * p.l_a);
  const double b = w.torque(1) / (p.k_t * p.l_a);
  const double c = w.torque(2) / p.k_tau;
  Eigen::Vector4d sq;
  sq(0) = 0.25 * (u + a - b + c);
  sq(1) = 0.25 * (u + a + b - c);
  sq(2) = 0.25 * (u - a + b + c);
  sq(3) = 0.25 * (u - a - b - c);
  return sq;
}

}  // namespace

RotorSpeeds allocate_wrench_to_rotors(const ControlWrench& w, const QuadrotorParams& p) {
  const Eigen::Vector4d sq = solve_squared_speeds(w, p);
  for (int i = 0; i < 4; ++i) {
    if (sq(i) < 0.0) {
      std::ostringstream msg;
      msg << "infeasible wrench: rotor " << i + 1 << " requires omega^2 = " << sq(i);
      throw InfeasibleAllocationError(msg.str());
    }
  }
  RotorSpeeds out;
  out.omega = sq.cwiseSqrt();
  return out;
}

SaturatedAllocation saturate_wrench_allocation(const ControlWrench& w, const QuadrotorParams& p) {
  const Eigen::Vector4d sq = solve_squared_speeds(w, p);
  const double cap = p.omega_max * p.omega_max;
  SaturatedAllocation out;
  for (int i = 0; i < 4; ++i) {
    double v = sq(i);
    if (v < 0.0) {
      v = 0.0;
      out.saturated = true;
    } else if (v > cap) {
      v = cap;
      out.saturated = true;
    }
    out.speeds.omega(i) = std::sqrt(v);
  }
  return out;
}

Eigen::Vector3d translational_derivatives(const QuadrotorState& s, double f_t,
                                          const QuadrotorParams& p) {
  const double sph = std::sin(s.euler(0)), cph = std::cos(s.euler(0));
  const double sth = std::sin(s.euler(1)), cth = std::cos(s.euler(1));
  const double sps = std::sin(s.euler(2)), cps = std::cos(s.euler(2));
  const double k = f_t / p.m;
  return {(sps * sph + cps * cph * sth) * k,
          (cph * sps * sth - cps * sph) * k,
          -p.g + cth * cph * k};
}

Eigen::Vector3d rotational_derivatives(const QuadrotorState& s, const Eigen::Vector3d& torque,
                                       const QuadrotorParams& p) {
  const double pr = s.rates(0), qr = s.rates(1), rr = s.rates(2);
  return {(torque(0) - (p.izb - p.iyb) * qr * rr) / p.ixb,
          (torque(1) - (p.ixb - p.izb) * pr * rr) / p.iyb,
          (torque(2) - (p.iyb - p.ixb) * pr * qr) / p.izb};
}

Eigen::Vector3d euler_rates(const Eigen::Vector3d& angles, const Eigen::Vector3d& rates) {
  const double theta = angles(1);
  if (std::abs(theta) >= M_PI / 2.0 - kGimbalGuard) {
    std::ostringstream msg;
    msg << "pitch " << theta << " rad is inside the gimbal guard band";
    throw GimbalLockError(msg.str());
  }
  const double sph = std::sin(angles(0)), cph = std::cos(angles(0));
  const double tth = std::tan(theta), cth = std::cos(theta);
  const double pr = rates(0), qr = rates(1), rr = rates(2);
  return {pr + sph * tth * qr + cph * tth * rr,
          cph * qr - sph * rr,
          (sph / cth) * qr + (cph / cth) * rr};
}

Eigen::Matrix<double, 12, 1> state_derivatives(const QuadrotorState& s, const ControlWrench& w,
                                               const QuadrotorParams& p) {
  Eigen::Matrix<double, 12, 1> d;
  d.segment<3>(0) = s.velocity;
  d.segment<3>(3) = translational_derivatives(s, w.f_t, p);
  d.segment<3>(6) = euler_rates(s.euler, s.rates);
  d.segment<3>(9) = rotational_derivatives(s, w.torque, p);
  return d;
}

QuadrotorState step(const QuadrotorState& s, const RotorSpeeds& omega, double dt,
                    const QuadrotorParams& p) {
  // The wrench is constant over the step because the rotor command is held.
  const ControlWrench w = mix_rotors_to_wrench(omega, p);
  const Eigen::Matrix<double, 12, 1> x0 = s.to_vector();

  const auto f = [&](const Eigen::Matrix<double, 12, 1>& x) {
    return state_derivatives(QuadrotorState::from_vector(x), w, p);
  };

  const Eigen::Matrix<double, 12, 1> k1 = f(x0);
  const Eigen::Matrix<double, 12, 1> k2 = f(x0 + 0.5 * dt * k1);
  const Eigen::Matrix<double, 12, 1> k3 = f(x0 + 0.5 * dt * k2);
  const Eigen::Matrix<double, 12, 1> k4 = f(x0 + dt * k3);

  QuadrotorState next =
      QuadrotorState::from_vector(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  if (!next.all_finite()) {
    throw NonFiniteStateError("state became non-finite during integration");
  }
  return next;
}

}  // namespace formsim
