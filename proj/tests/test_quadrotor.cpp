#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "formsim/quadrotor.hpp"

using namespace formsim;

namespace {

QuadrotorParams unit_mixer_params() {
  QuadrotorParams p;
  p.k_t = 1.0;
  p.k_tau = 0.1;
  p.l_a = 0.2;
  return p;
}

// Independent mixer oracle: the matrix exactly as printed, applied by hand.
Eigen::Vector4d mixer_oracle(const Eigen::Vector4d& sq, double kt, double ktau, double la) {
  Eigen::Matrix4d m;
  m << kt, kt, kt, kt,
       kt * la, kt * la, -kt * la, -kt * la,
       -kt * la, kt * la, kt * la, -kt * la,
       ktau, -ktau, ktau, -ktau;
  return m * sq;
}

}  // namespace

TEST_CASE("mixer: equal rotor speeds cancel all torques exactly") {
  QuadrotorParams p;
  RotorSpeeds omega;
  omega.omega.setConstant(123.456);
  const ControlWrench w = mix_rotors_to_wrench(omega, p);
  CHECK(w.torque(0) == 0.0);
  CHECK(w.torque(1) == 0.0);
  CHECK(w.torque(2) == 0.0);
  CHECK(w.f_t == doctest::Approx(4.0 * p.k_t * 123.456 * 123.456).epsilon(1e-15));
}

TEST_CASE("mixer: zero input gives zero wrench") {
  const ControlWrench w = mix_rotors_to_wrench(RotorSpeeds{}, QuadrotorParams{});
  CHECK(w.f_t == 0.0);
  CHECK(w.torque.isZero(0.0));
}

TEST_CASE("mixer: worked example against the hand-multiplied matrix") {
  const QuadrotorParams p = unit_mixer_params();
  RotorSpeeds omega;
  omega.omega << 1.0, std::sqrt(2.0), std::sqrt(3.0), 2.0;
  const ControlWrench w = mix_rotors_to_wrench(omega, p);

  // Frozen values from evaluating the matrix on omega^2 = (1, 2, 3, 4).
  CHECK(w.f_t == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(w.torque(0) == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(w.torque(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.torque(2) == doctest::Approx(-0.2).epsilon(1e-12));

  const Eigen::Vector4d expect = mixer_oracle(omega.squared(), p.k_t, p.k_tau, p.l_a);
  CHECK((Eigen::Vector4d(w.f_t, w.torque(0), w.torque(1), w.torque(2)) - expect).norm() < 1e-12);
}

TEST_CASE("allocation: pure hover thrust splits evenly") {
  QuadrotorParams p;
  ControlWrench w;
  w.f_t = 4.0 * p.k_t;
  const RotorSpeeds omega = allocate_wrench_to_rotors(w, p);
  for (int i = 0; i < 4; ++i) CHECK(omega.omega(i) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("allocation: mix o allocate is the identity on feasible wrenches") {
  QuadrotorParams p;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> speed(1.0, 300.0);
  for (int trial = 0; trial < 1000; ++trial) {
    RotorSpeeds in;
    for (int i = 0; i < 4; ++i) in.omega(i) = speed(rng);
    const ControlWrench w = mix_rotors_to_wrench(in, p);
    const RotorSpeeds back = allocate_wrench_to_rotors(w, p);
    const ControlWrench w2 = mix_rotors_to_wrench(back, p);
    CHECK(std::abs(w2.f_t - w.f_t) <= 1e-9 * std::abs(w.f_t));
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(w2.torque(k) - w.torque(k)) <= 1e-9 * std::max(1e-6, std::abs(w.torque(k))));
    }
    CHECK((back.omega - in.omega).cwiseAbs().maxCoeff() <= 1e-9 * in.omega.maxCoeff());
  }
}

TEST_CASE("allocation: oversized roll torque is infeasible") {
  const QuadrotorParams p = unit_mixer_params();
  ControlWrench w;
  w.f_t = 4.0 * p.k_t;
  // Rotor 3 solves omega^2 = (F/K - tau_phi/(K l_a))/4; any tau_phi > F*l_a
  // drives it negative.
  w.torque(0) = 5.0 * p.k_t * p.l_a;
  CHECK_THROWS_AS(allocate_wrench_to_rotors(w, p), InfeasibleAllocationError);
}

TEST_CASE("allocation: saturating variant clamps and flags") {
  const QuadrotorParams p = unit_mixer_params();
  ControlWrench w;
  w.f_t = 4.0 * p.k_t;
  w.torque(0) = 5.0 * p.k_t * p.l_a;
  const SaturatedAllocation out = saturate_wrench_allocation(w, p);
  CHECK(out.saturated);
  CHECK(out.speeds.omega.minCoeff() == 0.0);

  ControlWrench huge;
  huge.f_t = 100.0 * p.omega_max * p.omega_max * p.k_t;
  const SaturatedAllocation capped = saturate_wrench_allocation(huge, p);
  CHECK(capped.saturated);
  CHECK(capped.speeds.omega.maxCoeff() == doctest::Approx(p.omega_max));

  ControlWrench ok;
  ok.f_t = 4.0 * p.k_t;
  CHECK_FALSE(saturate_wrench_allocation(ok, p).saturated);
}

TEST_CASE("translational: hover thrust at level attitude is equilibrium") {
  QuadrotorParams p;
  QuadrotorState s;
  const Eigen::Vector3d acc = translational_derivatives(s, p.m * p.g, p);
  CHECK(acc.norm() < 1e-15);
}

TEST_CASE("translational: double hover thrust accelerates upward at g") {
  QuadrotorParams p;
  QuadrotorState s;
  const Eigen::Vector3d acc = translational_derivatives(s, 2.0 * p.m * p.g, p);
  CHECK(acc(0) == 0.0);
  CHECK(acc(1) == 0.0);
  CHECK(acc(2) == doctest::Approx(p.g).epsilon(1e-15));
}

TEST_CASE("translational: 30 degree pitch tips half the thrust into x") {
  QuadrotorParams p;
  QuadrotorState s;
  s.euler << 0.0, M_PI / 6.0, 0.0;
  const double f = 3.7;
  const Eigen::Vector3d acc = translational_derivatives(s, f, p);
  CHECK(acc(0) == doctest::Approx(std::sin(M_PI / 6.0) * f / p.m).epsilon(1e-14));
  CHECK(acc(0) == doctest::Approx(0.5 * f / p.m).epsilon(1e-12));
}

TEST_CASE("translational: thrust direction is a unit vector scaled by F/m") {
  QuadrotorParams p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::uniform_real_distribution<double> pitch(-1.5, 1.5);
  std::uniform_real_distribution<double> thrust(0.0, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    QuadrotorState s;
    s.euler << angle(rng), pitch(rng), angle(rng);
    const double f = thrust(rng);
    const Eigen::Vector3d acc = translational_derivatives(s, f, p);
    const double lhs = std::sqrt(acc(0) * acc(0) + acc(1) * acc(1) +
                                 (acc(2) + p.g) * (acc(2) + p.g));
    CHECK(std::abs(lhs - f / p.m) <= 1e-12 * std::max(1.0, f / p.m));
  }
}

TEST_CASE("rotational: no gyroscopic coupling at rest") {
  QuadrotorParams p;
  QuadrotorState s;
  const Eigen::Vector3d tau(0.02, -0.04, 0.01);
  const Eigen::Vector3d dd = rotational_derivatives(s, tau, p);
  CHECK(dd(0) == doctest::Approx(tau(0) / p.ixb).epsilon(1e-15));
  CHECK(dd(1) == doctest::Approx(tau(1) / p.iyb).epsilon(1e-15));
  CHECK(dd(2) == doctest::Approx(tau(2) / p.izb).epsilon(1e-15));
}

TEST_CASE("rotational: q*r coupling decelerates roll when izb > iyb") {
  QuadrotorParams p;  // izb = 9e-3 > iyb = 5e-3
  QuadrotorState s;
  s.rates << 0.0, 1.0, 1.0;
  const Eigen::Vector3d dd = rotational_derivatives(s, Eigen::Vector3d::Zero(), p);
  CHECK(dd(0) < 0.0);
}

TEST_CASE("rotational: symmetric body coasts freely") {
  QuadrotorParams p;
  p.ixb = p.iyb = p.izb = 4e-3;
  QuadrotorState s;
  s.rates << 0.7, -0.2, 1.3;
  const Eigen::Vector3d dd = rotational_derivatives(s, Eigen::Vector3d::Zero(), p);
  CHECK(dd.isZero(0.0));
}

TEST_CASE("euler rates: identity map at level attitude, bit exact") {
  const Eigen::Vector3d rates(0.37, -0.82, 1.94);
  const Eigen::Vector3d out = euler_rates(Eigen::Vector3d::Zero(), rates);
  CHECK(out(0) == rates(0));
  CHECK(out(1) == rates(1));
  CHECK(out(2) == rates(2));
}

TEST_CASE("euler rates: gimbal guard trips near +-pi/2 pitch") {
  CHECK_THROWS_AS(euler_rates({0.0, M_PI / 2.0, 0.0}, {0.0, 1.0, 0.0}), GimbalLockError);
  CHECK_THROWS_AS(euler_rates({0.0, -(M_PI / 2.0 - 0.5 * kGimbalGuard), 0.0}, {0.0, 1.0, 0.0}),
                  GimbalLockError);
  CHECK_NOTHROW(euler_rates({0.0, M_PI / 2.0 - 2.0 * kGimbalGuard, 0.0}, {0.0, 1.0, 0.0}));
}

TEST_CASE("euler rates: hand-evaluated kinematic row") {
  const Eigen::Vector3d out = euler_rates({M_PI / 4.0, M_PI / 6.0, 0.0}, {0.0, 1.0, 0.0});
  CHECK(out(0) == doctest::Approx(std::sin(M_PI / 4.0) * std::tan(M_PI / 6.0)).epsilon(1e-14));
  CHECK(out(1) == doctest::Approx(std::cos(M_PI / 4.0)).epsilon(1e-14));
  CHECK(out(2) == doctest::Approx(std::sin(M_PI / 4.0) / std::cos(M_PI / 6.0)).epsilon(1e-14));
}

TEST_CASE("step: hover is a fixed point") {
  QuadrotorParams p;
  QuadrotorState s;
  s.position << 1.0, -2.0, 5.0;
  RotorSpeeds omega;
  omega.omega.setConstant(p.hover_rotor_speed());
  const QuadrotorState next = step(s, omega, 0.01, p);
  CHECK((next.to_vector() - s.to_vector()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("step: free fall matches the closed-form parabola") {
  QuadrotorParams p;
  QuadrotorState s;
  s.position << 0.0, 0.0, 10.0;
  const double dt = 0.01;
  const int n = 200;  // 2 seconds
  for (int k = 0; k < n; ++k) s = step(s, RotorSpeeds{}, dt, p);
  const double t = n * dt;
  CHECK(std::abs(s.position(2) - (10.0 - 0.5 * p.g * t * t)) < 1e-9);
  CHECK(std::abs(s.velocity(2) - (-p.g * t)) < 1e-10);
}

namespace {

// Free fall with spin. With ixb == iyb the yaw body rate stays constant and
// (p, q) rotate at Omega = r0 * (izb - ixb) / ixb, which gives a closed-form
// sinusoid the integrator cannot reproduce exactly -- the measurable h^4 case.
double spin_error_at(double dt, const QuadrotorParams& p) {
  const double p0 = 0.3, q0 = 0.2, r0 = 1.0;
  const double omega = r0 * (p.izb - p.ixb) / p.ixb;
  QuadrotorState s;
  s.rates << p0, q0, r0;
  const double horizon = 1.0;
  const int n = static_cast<int>(std::lround(horizon / dt));
  for (int k = 0; k < n; ++k) s = step(s, RotorSpeeds{}, dt, p);
  const double t = n * dt;
  const double pe = p0 * std::cos(omega * t) - q0 * std::sin(omega * t);
  const double qe = p0 * std::sin(omega * t) + q0 * std::cos(omega * t);
  return std::max(std::abs(s.rates(0) - pe), std::abs(s.rates(1) - qe));
}

}  // namespace

TEST_CASE("step: fourth-order convergence on the spinning free-fall oracle") {
  QuadrotorParams p;
  const double e1 = spin_error_at(0.02, p);
  const double e2 = spin_error_at(0.01, p);
  REQUIRE(e1 > 1e-14);  // above rounding noise, otherwise the ratio is meaningless
  const double order = std::log2(e1 / e2);
  CHECK(order >= 3.8);
}

TEST_CASE("step: deterministic and side-effect free") {
  QuadrotorParams p;
  QuadrotorState s;
  s.velocity << 0.3, -0.1, 0.2;
  s.euler << 0.05, -0.03, 0.4;
  s.rates << 0.1, 0.2, -0.3;
  RotorSpeeds omega;
  omega.omega << 200.0, 201.0, 199.5, 200.5;
  const QuadrotorState before = s;
  const QuadrotorState a = step(s, omega, 0.01, p);
  const QuadrotorState b = step(s, omega, 0.01, p);
  CHECK(a.to_vector() == b.to_vector());
  CHECK(s.to_vector() == before.to_vector());
}

TEST_CASE("step: propagates the gimbal guard") {
  QuadrotorParams p;
  QuadrotorState s;
  s.euler << 0.0, M_PI / 2.0 - 0.5 * kGimbalGuard, 0.0;
  CHECK_THROWS_AS(step(s, RotorSpeeds{}, 0.01, p), GimbalLockError);
}
