#include <random>

#include <benchmark/benchmark.h>

#include "aphi/presets.hpp"
#include "aphi/qp_solver.hpp"
#include "aphi/safety_filter.hpp"
#include "aphi/sim_engine.hpp"

namespace {

using namespace aphi;

AugmentedState sample_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  AugmentedState x;
  for (int i = 0; i < 6; ++i) {
    x.q[i] = u(rng);
    x.q_dot[i] = u(rng);
    x.q_d[i] = x.q[i] + 0.3 * u(rng);
    x.q_d_dot[i] = u(rng);
    x.zeta[i] = x.q_dot[i] + 0.3 * u(rng);
    x.chi[i] = u(rng);
  }
  x.q[2] += 1.0;
  x.chi[2] += 9.81;
  return x;
}

void BM_QpSolve(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<QpProblem> problems(64);
  for (auto& p : problems) {
    p.u_t = Eigen::VectorXd(6);
    p.A = Eigen::MatrixXd(m, 6);
    p.b = Eigen::VectorXd(m);
    for (int i = 0; i < 6; ++i) p.u_t[i] = 3 * u(rng);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < 6; ++j) p.A(i, j) = u(rng);
      p.b[i] = 0.5 * (u(rng) + 1.0);
    }
  }
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(problems[k++ % problems.size()]));
  }
}
BENCHMARK(BM_QpSolve)->Arg(6)->Arg(12);

void BM_LieDerivatives(benchmark::State& state) {
  const SafetyModel model({}, {}, {}, {});
  std::mt19937_64 rng(8);
  const AugmentedState x = sample_state(rng);
  for (auto _ : state) benchmark::DoNotOptimize(lie_derivatives(x, model));
}
BENCHMARK(BM_LieDerivatives);

void BM_FilterStep(benchmark::State& state) {
  const SafetyModel model({}, {}, {}, {});
  std::mt19937_64 rng(9);
  const AugmentedState x = sample_state(rng);
  const ResidualState res = initial_residual_state(
      barrier_values(thrust_of_state(x, model), model.barrier), model.barrier);
  Vec6 q_t = x.q;
  q_t[0] += 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(filter_step(x, res, q_t, model, TargetGenConfig{}));
}
BENCHMARK(BM_FilterStep);

// One 1 ms control period of the wall push, past first contact.
void BM_SimStep(benchmark::State& state) {
  const Simulator sim(preset_scenario("wall_push"));
  SimState s = sim.initial_state();
  for (int k = 0; k < 5000; ++k) s = sim.step(s);
  for (auto _ : state) benchmark::DoNotOptimize(sim.step(s));
}
BENCHMARK(BM_SimStep);

}  // namespace

BENCHMARK_MAIN();
