#include <benchmark/benchmark.h>

#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/loss.hpp"
#include "tubekit/medial.hpp"
#include "tubekit/postprocess.hpp"
#include "tubekit/synthetic.hpp"

namespace {

using namespace tubekit;

Polygon curved_band() { return synthetic::sine_band(2.0, 5.0, 0.0, 30.0, 3.0); }

void BM_PolygonIou(benchmark::State& state) {
  synthetic::Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Polygon a = synthetic::random_star_polygon(rng, {0, 0}, 10.0, n);
  const Polygon b = synthetic::random_star_polygon(rng, {3, 1}, 10.0, n);
  for (auto _ : state) benchmark::DoNotOptimize(polygon_iou(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PolygonIou)->RangeMultiplier(4)->Range(8, 512)->Complexity();

void BM_RasterizeIou(benchmark::State& state) {
  synthetic::Rng rng(1);
  const Polygon a = synthetic::random_star_polygon(rng, {0, 0}, 10.0, 32);
  const Polygon b = synthetic::random_star_polygon(rng, {3, 1}, 10.0, 32);
  const auto grid = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_iou(a, b, grid));
}
BENCHMARK(BM_RasterizeIou)->Arg(256)->Arg(1024);

void BM_FitTube(benchmark::State& state) {
  const Polygon poly = curved_band();
  MedialConfig cfg;
  cfg.method = state.range(0) == 0 ? AxisMethod::voronoi : AxisMethod::paired;
  for (auto _ : state) benchmark::DoNotOptimize(fit_tube(poly, cfg));
}
BENCHMARK(BM_FitTube)->Arg(0)->Arg(1)->ArgNames({"paired"})->Unit(benchmark::kMicrosecond);

void BM_TubeEnvelope(benchmark::State& state) {
  const Tube tube = fit_tube(curved_band(), {});
  const auto caps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tube_envelope(tube, caps));
}
BENCHMARK(BM_TubeEnvelope)->Arg(4)->Arg(16);

void BM_LossTube(benchmark::State& state) {
  synthetic::Rng rng(2);
  const Tube gt = synthetic::random_tube(rng, 5);
  const Tube pred = synthetic::perturb_tube(rng, gt, 0.3, 0.1);
  LossConfig cfg;
  cfg.n_samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(loss_tube(pred, gt, cfg));
}
BENCHMARK(BM_LossTube)->Arg(50)->Arg(100)->Arg(400);

void BM_GradLossTube(benchmark::State& state) {
  synthetic::Rng rng(2);
  const Tube gt = synthetic::random_tube(rng, 5);
  const Tube pred = synthetic::perturb_tube(rng, gt, 0.3, 0.1);
  const LossConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(grad_loss_tube(pred, gt, cfg));
}
BENCHMARK(BM_GradLossTube);

void BM_SoftNms(benchmark::State& state) {
  synthetic::Rng rng(3);
  std::vector<BoxDetection> dets;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
    const double x = rng.uniform(0, 200), y = rng.uniform(0, 200);
    dets.push_back({{x, y, x + rng.uniform(5, 40), y + rng.uniform(5, 40)}, rng.uniform(0.01, 1.0), i});
  }
  for (auto _ : state) benchmark::DoNotOptimize(soft_nms(dets));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SoftNms)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_PolygonalNms(benchmark::State& state) {
  synthetic::Rng rng(4);
  std::vector<TubeDetection> dets;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
    dets.push_back({synthetic::random_tube(rng, 5), rng.uniform(0.01, 1.0), "img", i});
  }
  for (auto _ : state) benchmark::DoNotOptimize(polygonal_nms(dets));
}
BENCHMARK(BM_PolygonalNms)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
