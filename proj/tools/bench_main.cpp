#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#ifdef FORMSIM_HAVE_OPENMP
#include <omp.h>
#endif

#include "formsim/engine.hpp"

namespace {

// A ring of agents around one leader: every agent has its two arc neighbors
// in range, so the fleet scales to any size without bespoke bias tables.
formsim::ScenarioConfig ring_fleet(int n, double duration, double dt) {
  formsim::ScenarioConfig cfg;
  cfg.name = "bench-ring";
  cfg.dt = dt;
  cfg.duration = duration;
  cfg.formation.n = n;
  cfg.formation.leaders = {0};
  cfg.formation.altitude = 5.0;
  cfg.reference_trajectory = formsim::CircleReference{3.0, 0.1};

  const double radius = n / std::numbers::pi;  // ~2 m arc spacing
  for (int i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / n;
    cfg.formation.biases.push_back(radius * Eigen::Vector2d(std::cos(angle), std::sin(angle)));
  }
  const double chord = 2.0 * radius * std::sin(std::numbers::pi / n);
  cfg.formation.sensing_radius = 1.5 * chord;

  const Eigen::Vector2d r0(0.0, 3.0);  // reference at t=0
  for (const auto& b : cfg.formation.biases) {
    cfg.initial_positions.push_back({r0(0) + b(0), r0(1) + b(1), cfg.formation.altitude});
  }
  return cfg;
}

bool logs_identical(const formsim::SimLog& a, const formsim::SimLog& b) {
  if (a.n_agents != b.n_agents || a.rows.size() != b.rows.size()) return false;
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    const formsim::LogRow& x = a.rows[k];
    const formsim::LogRow& y = b.rows[k];
    if (x.t != y.t || x.agent != y.agent || x.err != y.err || x.flags != y.flags)
      return false;
    if (x.state.to_vector() != y.state.to_vector()) return false;
    if (x.setpoint != y.setpoint) return false;
  }
  return true;
}

double timed_run(const formsim::ScenarioConfig& cfg, formsim::ExecutionMode mode,
                 formsim::SimLog& out) {
  const auto begin = std::chrono::steady_clock::now();
  out = formsim::run(cfg, mode);
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(end - begin).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formsim_bench — serial vs parallel engine sweep comparison"};
  int agents = 64;
  double duration = 20.0;
  double dt = 0.01;
  int repeats = 3;
  app.add_option("--agents", agents, "Fleet size")->check(CLI::Range(2, 100000));
  app.add_option("--duration", duration, "Simulated seconds per run");
  app.add_option("--dt", dt, "Step size [s]");
  app.add_option("--repeats", repeats, "Timing repetitions (best of)")
      ->check(CLI::Range(1, 100));
  CLI11_PARSE(app, argc, argv);

  const formsim::ScenarioConfig cfg = ring_fleet(agents, duration, dt);

  formsim::SimLog serial_log;
  formsim::SimLog parallel_log;
  double serial_best = 1e300;
  double parallel_best = 1e300;
  for (int k = 0; k < repeats; ++k) {
    serial_best =
        std::min(serial_best, timed_run(cfg, formsim::ExecutionMode::kSerial, serial_log));
    parallel_best = std::min(parallel_best,
                             timed_run(cfg, formsim::ExecutionMode::kParallel, parallel_log));
  }

  int threads = 1;
#ifdef FORMSIM_HAVE_OPENMP
  threads = omp_get_max_threads();
#endif

  const std::size_t steps = serial_log.rows.size() / static_cast<std::size_t>(agents);
  std::printf("agents=%d steps=%zu rows=%zu threads=%d (best of %d)\n", agents, steps,
              serial_log.rows.size(), threads, repeats);
  std::printf("serial:   %8.3f ms  (%6.1f agent-steps/us)\n", serial_best * 1e3,
              serial_log.rows.size() / (serial_best * 1e6));
  std::printf("parallel: %8.3f ms  (%6.1f agent-steps/us)\n", parallel_best * 1e3,
              parallel_log.rows.size() / (parallel_best * 1e6));
  std::printf("speedup:  %8.2fx\n", serial_best / parallel_best);

  if (!logs_identical(serial_log, parallel_log)) {
    std::printf("logs bit-identical: NO\n");
    return 1;
  }
  std::printf("logs bit-identical: yes\n");
  return 0;
}
