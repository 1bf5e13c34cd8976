#include <random>

#include <benchmark/benchmark.h>

#include "ionmodes/dynamics.hpp"
#include "ionmodes/experiment.hpp"
#include "ionmodes/fit.hpp"
#include "ionmodes/paths.hpp"

using namespace ionmodes;

namespace {

CurvatureModel model() { return CurvatureModel::from_frequencies(3876.60, 3.299, -0.383, -1.202); }

void BM_Eigensystem(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<ShimPoint> pts(1024);
  for (auto& p : pts) p = {u(rng), u(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigensystem(-0.383, pts[i++ & 1023]));
  }
}
BENCHMARK(BM_Eigensystem);

void BM_ReturnProbability(benchmark::State& state) {
  const CurvatureModel m = model();
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(return_probability(m, {0.4, -0.7}, t, Site::C));
    t += 1e-4;
  }
}
BENCHMARK(BM_ReturnProbability);

void BM_PropagateLoop(benchmark::State& state) {
  const CurvatureModel m = model();
  const double T = static_cast<double>(state.range(0)) * 1e-3;
  const ShimSchedule s = build_path_pair(m, PathFamily::Canonical, T, 400).enclosing.to_schedule();
  const SinglePhononState c = SinglePhononState::at_site(Site::C);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(c, m, s));
}
BENCHMARK(BM_PropagateLoop)->Arg(100)->Arg(780)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_Contour(benchmark::State& state) {
  const CurvatureModel m = model();
  const SpecialPoints sp = special_points(m.alpha);
  const double level = eigensystem(m, sp.start).value(Band::Middle);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(constant_curvature_contour(m, Band::Middle, level, sp.start, sp.turn, n));
  }
}
BENCHMARK(BM_Contour)->Arg(64)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_FitSingleSinusoid(benchmark::State& state) {
  const CurvatureModel m = model();
  const double s = 1.0 / (m.alpha - 1.0);
  const FringeTrace tr = sample_shots(exchange_trace(m, {s, s}, default_fringe_delays(m)), 500, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_single_sinusoid(tr));
}
BENCHMARK(BM_FitSingleSinusoid)->Unit(benchmark::kMicrosecond);

void BM_FitThreeTones(benchmark::State& state) {
  const CurvatureModel m = model();
  const FringeTrace tr = exchange_trace(m, {0.8, 0.0}, uniform_grid(0.0, 2.0, 400, false));
  for (auto _ : state) benchmark::DoNotOptimize(fit_sinusoid_sum(tr, 3));
}
BENCHMARK(BM_FitThreeTones)->Unit(benchmark::kMillisecond);

void BM_SpectrumExtraction(benchmark::State& state) {
  const FrequencyModel fm;
  std::vector<double> dV;
  for (int i = -25; i <= 25; ++i) dV.push_back(0.1 * i);
  std::vector<double> df;
  for (int i = 0; i <= 99; ++i) df.push_back(-14.0 + 4.0 / 11.0 * i);
  const SpectrumMap map = synthetic_spectrum(fm, dV, df, 0.5, 0.05, 1);
  for (auto _ : state) benchmark::DoNotOptimize(extract_model_params(extract_peak_centers(map)));
}
BENCHMARK(BM_SpectrumExtraction)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
