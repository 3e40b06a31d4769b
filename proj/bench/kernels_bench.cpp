// Serial reference vs OpenMP kernels: wall time and a bitwise agreement check.
//
//   simopt_bench [--solutions N] [--reps R] [--evals E] [--repeat K]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#include "CLI11.hpp"
#include "simopt/kernels.hpp"
#include "simopt/kn_math.hpp"

using namespace simopt;

namespace {

double best_of(int repeat, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < repeat; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial_ms, double parallel_ms, bool same) {
  std::printf("%-20s %12.3f %12.3f %8.2fx  %s\n", name, serial_ms, parallel_ms, serial_ms / parallel_ms,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 2000, reps = 20, evals = 200000;
  int repeat = 5;
  CLI::App app{"Benchmark serial and OpenMP kernels"};
  app.add_option("--solutions", n, "Solutions in the variance/screen kernels");
  app.add_option("--reps", reps, "Replications per solution");
  app.add_option("--evals", evals, "Requests in the batch-evaluation kernel");
  app.add_option("--repeat", repeat, "Timing repetitions (best is reported)");
  CLI11_PARSE(app, argc, argv);

  Rng rng(1);
  std::vector<double> samples(n * reps);
  for (auto& v : samples) v = 0.5 + 0.1 * rng.normal();

  std::printf("%-20s %12s %12s %9s\n", "kernel", "serial ms", "openmp ms", "speedup");

  PackedSymmetric s_serial, s_parallel;
  const double vs = best_of(repeat, [&] { s_serial = kernels::pairwise_variance_serial(samples, n, reps); });
  const double vp = best_of(repeat, [&] { s_parallel = kernels::pairwise_variance_parallel(samples, n, reps); });
  row("pairwise_variance", vs, vp,
      std::memcmp(s_serial.raw().data(), s_parallel.raw().data(), s_serial.raw().size() * sizeof(double)) == 0);

  std::vector<double> means(n);
  for (std::size_t i = 0; i < n; ++i) means[i] = 0.5 + 0.001 * rng.normal();
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const auto c = kn_constants(n, reps, 0.05);
  std::vector<std::size_t> d_serial, d_parallel;
  const double ss = best_of(repeat, [&] { d_serial = kernels::screen_serial(all, means, s_serial, 40, 0.01, c.h2); });
  const double sp = best_of(repeat, [&] { d_parallel = kernels::screen_parallel(all, means, s_serial, 40, 0.01, c.h2); });
  row("screen", ss, sp, d_serial == d_parallel);

  const auto space = SearchSpace::from_arities({10, 10, 10});
  std::vector<double> table(space.cardinality());
  for (auto& m : table) m = rng.uniform();
  ObjectiveHandle handle(std::make_shared<SyntheticObjective>(table, BernoulliAccuracy{200}), space);
  std::vector<EvalRequest> requests;
  for (std::size_t i = 0; i < evals; ++i) requests.push_back({space.random_solution(rng), rng.next()});
  std::vector<Observation> o_serial(evals), o_parallel(evals);
  const double es = best_of(repeat, [&] { kernels::evaluate_serial(handle, requests, 0, o_serial); });
  const double ep = best_of(repeat, [&] { kernels::evaluate_parallel(handle, requests, 0, o_parallel); });
  bool same = true;
  for (std::size_t i = 0; i < evals; ++i) same = same && o_serial[i].value == o_parallel[i].value;
  row("evaluate_batch", es, ep, same);
  return 0;
}
