// Serial reference vs OpenMP kernels: batch gradients and series prediction.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "deckmotion/evaluate.hpp"
#include "deckmotion/lstm.hpp"
#include "deckmotion/rng.hpp"

using namespace deckmotion;

namespace {

double median_seconds(int reps, const std::function<void()>& fn) {
  std::vector<double> t;
  fn();  // warm-up
  for (int r = 0; r < reps; ++r) {
    const auto a = std::chrono::steady_clock::now();
    fn();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - a).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  %s\n", name, serial * 1e3,
              parallel * 1e3, serial / parallel, identical ? "bitwise equal" : "RESULTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 9;
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP\n");
#endif

  LstmConfig cfg;  // hidden 64, lookback 40
  const LstmParams params = init_params(cfg, 1);
  const MotionSeries series = sample_series(sea_state5_reference_model(), 2000, 0.1);
  const Normalizer norm = fit_normalizer(series, 1400);
  const WindowedDataset ds = make_windows(apply_normalizer(norm, series), 40);

  for (std::size_t batch : {32u, 256u}) {
    std::vector<Example> ex;
    for (std::size_t k = 0; k < batch; ++k) ex.push_back({ds.window(k), ds.targets[k]});
    GradientKernel kernel(cfg);
    Gradients gs(cfg), gp(cfg);
    double ls = 0, lp = 0;
    const double ts = median_seconds(reps, [&] { ls = kernel.compute_serial(params, ex, gs); });
    const double tp = median_seconds(reps, [&] { lp = kernel.compute(params, ex, gp); });
    char name[64];
    std::snprintf(name, sizeof name, "gradients, batch %zu", batch);
    row(name, ts, tp, ls == lp && gs == gp);
  }

  ForecastResult rs, rp;
  const double ts = median_seconds(reps, [&] { rs = predict_series_serial(params, norm, series, 40); });
  const double tp = median_seconds(reps, [&] { rp = predict_series(params, norm, series, 40); });
  row("prediction, 1960 points", ts, tp, rs.predictions == rp.predictions);
  return 0;
}
