// Acceptance suite: one test case per release criterion, each printing a
// [PASS]/[FAIL] line. Run via ctest or directly.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <vector>

#include "dppl/models/color.hpp"
#include "dppl/models/tables.hpp"
#include "dppl/models/thermometer.hpp"
#include "reference_backward.hpp"

using namespace dppl;

// ---------------------------------------------------------------------------
// allocation counter (criterion 6): every global new/delete is tracked with a
// size prefix so live and peak byte counts are exact
namespace {

std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_peak{0};

void note_alloc(std::size_t n) {
  std::size_t live = g_live.fetch_add(n, std::memory_order_relaxed) + n;
  std::size_t peak = g_peak.load(std::memory_order_relaxed);
  while (live > peak && !g_peak.compare_exchange_weak(peak, live, std::memory_order_relaxed)) {
  }
}

constexpr std::size_t kHeader = 16;  // keeps max_align_t alignment

void* counted_alloc(std::size_t n) {
  void* raw = std::malloc(n + kHeader);
  if (!raw) throw std::bad_alloc();
  std::memcpy(raw, &n, sizeof n);
  note_alloc(n);
  return static_cast<char*>(raw) + kHeader;
}

void counted_free(void* p) noexcept {
  if (!p) return;
  void* raw = static_cast<char*>(p) - kHeader;
  std::size_t n = 0;
  std::memcpy(&n, raw, sizeof n);
  g_live.fetch_sub(n, std::memory_order_relaxed);
  std::free(raw);
}

struct PeakProbe {
  std::size_t start_live;
  PeakProbe() : start_live(g_live.load()) { g_peak.store(start_live); }
  std::size_t peak_delta() const { return g_peak.load() - start_live; }
};

}  // namespace

void* operator new(std::size_t n) { return counted_alloc(n); }
void* operator new[](std::size_t n) { return counted_alloc(n); }
void operator delete(void* p) noexcept { counted_free(p); }
void operator delete[](void* p) noexcept { counted_free(p); }
void operator delete(void* p, std::size_t) noexcept { counted_free(p); }
void operator delete[](void* p, std::size_t) noexcept { counted_free(p); }

// ---------------------------------------------------------------------------

namespace {

void report(int n, const char* name, bool ok) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", n, name);
  std::fflush(stdout);
  CHECK_MESSAGE(ok, "criterion ", n, " (", name, ")");
}

struct RetainedStats {
  double mean, stddev;
};

RetainedStats retained_stats(const SampleSet& set) {
  double mean = 0;
  for (int i = set.hyper.skip; i < set.count(); ++i) mean += set.position(i)[0];
  mean /= set.retained();
  double m2 = 0;
  for (int i = set.hyper.skip; i < set.count(); ++i) {
    double d = set.position(i)[0] - mean;
    m2 += d * d;
  }
  return {mean, std::sqrt(m2 / set.retained())};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const HmcHyperparams kReferenceHypers{1000, 300, 0.01, 100};

}  // namespace

TEST_CASE("criteria 1 and 2: thermometer posterior mean and spread across ten seeds") {
  auto t0 = std::chrono::steady_clock::now();
  int mean_pass = 0, sd_pass = 0;
  for (int seed = 0; seed < 10; ++seed) {
    SampleSet set = hmc_sample(models::thermometer_model(),
                               {models::thermometer_observation(100.0)}, {}, kReferenceHypers,
                               RandomKey(std::uint64_t(seed)));
    RetainedStats st = retained_stats(set);
    if (st.mean >= 95.6 && st.mean <= 96.2) ++mean_pass;   // window around the analytic mean 2780/29
    if (st.stddev >= 1.6 && st.stddev <= 2.1) ++sd_pass;   // conjugate sqrt(100/29) ~ 1.857
  }
  double elapsed = seconds_since(t0);
  report(1, "thermometer posterior mean in [95.6, 96.2] for >= 9/10 seeds, under 2 minutes",
         mean_pass >= 9 && elapsed < 120.0);
  report(2, "thermometer posterior stddev in [1.6, 2.1] for >= 9/10 seeds", sd_pass >= 9);
}

TEST_CASE("criterion 3: inverse-inverse solve finds the target reading") {
  auto t0 = std::chrono::steady_clock::now();
  Objective obj = models::thermometer_objective(kReferenceHypers, 100.0);
  GdConfig gd{100, 0.1, 0.0, SeedPolicy::Fixed};
  OptimizationTrace tr = gradient_descent(obj, {100.0}, gd, RandomKey(0));
  double m = tr.final_iterate()[0];
  double elapsed = seconds_since(t0);
  report(3, "100 GD steps at lr 0.1 from m=100 converge into [104.6, 105.0], under 10 minutes",
         m >= 104.6 && m <= 105.0 && elapsed < 600.0);
}

TEST_CASE("criterion 4: backward gradients match common-random-number finite differences") {
  auto t0 = std::chrono::steady_clock::now();
  bool all_ok = true;
  auto check = [&all_ok](const Objective& obj, const std::vector<double>& x, double h,
                         const RandomKey& key) {
    LossEval e = obj.value_and_grad(x, key);
    std::vector<double> fd = finite_diff_gradient(obj, x, h, key);
    for (size_t i = 0; i < x.size(); ++i) {
      if (std::abs(e.gradient[i]) <= 1e-3) continue;
      double rel = std::abs(e.gradient[i] - fd[i]) / std::abs(e.gradient[i]);
      if (!(rel < 0.05)) all_ok = false;
    }
  };

  check(models::thermometer_objective({200, 60, 0.01, 40}), {100.0}, 0.1, RandomKey(1));

  models::ColorExperimentConfig ccfg;
  ccfg.hmc = {120, 30, 0.02, 40};
  ccfg.init = {1, 0};
  models::ColorScene cref;
  cref.temp = 6200.0;
  cref.brightness = 1.1;
  cref.color1 = {0.7, 0.3, 0.4};
  cref.color2 = {0.3, 0.6, 0.5};
  check(models::color_objective(ccfg), models::encode_color_stimulus(cref), 1e-5, RandomKey(2));

  models::TablesExperimentConfig tcfg;
  tcfg.n_tables = 1;
  tcfg.hmc = {120, 30, 0.004, 40};
  tcfg.init = {1, 0};
  models::TableScene tref;
  tref.r = 10.0;
  tref.theta = 2.5;
  tref.h = 1.0;
  tref.tables.push_back(models::TableBox{{3.0, 2.0, 2.5}, {0.8, -0.5}});
  check(models::tables_objective(tcfg), models::encode_tables_stimulus(tref), 1e-5, RandomKey(3));

  double elapsed = seconds_since(t0);
  report(4, "loss gradients within 5% of finite differences for every bundled model",
         all_ok && elapsed < 600.0);
}

TEST_CASE("criterion 5: reversible backward equals a store-everything reference") {
  ModelDefinition model = models::thermometer_model();
  std::vector<ObservationSite> obs = {models::thermometer_observation(100.0)};
  HmcSampler sampler(model, obs);
  HmcHyperparams h{50, 20, 0.01, 10};
  SampleSet set = sampler.sample(h, RandomKey(21));

  RandomKey key(31);
  std::vector<double> pos_adj(size_t(h.n_samples), 0.0);
  for (int i = h.skip; i < h.n_samples; ++i) pos_adj[size_t(i)] = key.normal();

  HmcAdjoints got = sampler.backward(set, pos_adj);
  HmcAdjoints want = dppl_test::reference_backward(model, obs, {}, set, pos_adj);
  double rel = std::abs(got.observations[0][0] - want.observations[0][0]) /
               std::max(1e-12, std::abs(want.observations[0][0]));
  report(5, "reversible backward matches stored-state reference within 1e-4 (N=50, L=20)",
         rel < 1e-4);
}

TEST_CASE("criterion 6: backward-pass memory does not grow with trajectory length") {
  ModelDefinition model = models::thermometer_model();
  std::vector<ObservationSite> obs = {models::thermometer_observation(100.0)};

  auto peak_for = [&](int leapfrog) -> std::size_t {
    HmcHyperparams h{100, leapfrog, 0.01, 10};
    HmcSampler sampler(model, obs);
    // warm up the sampler's dual workspaces outside the measured window
    SampleSet warm = sampler.sample({2, 2, 0.01, 1}, RandomKey(9));
    std::vector<double> warm_adj(2, 0.0);
    sampler.backward(warm, warm_adj);

    PeakProbe probe;
    SampleSet set = sampler.sample(h, RandomKey(5));
    std::vector<double> pos_adj(size_t(h.n_samples), 1.0 / h.n_samples);
    HmcAdjoints adj = sampler.backward(set, pos_adj);
    (void)adj;
    return probe.peak_delta();
  };

  std::size_t peak300 = peak_for(300);
  std::size_t peak30 = peak_for(30);
  double ratio = double(peak300) / double(peak30);
  std::printf("  peak allocation: L=300 %zu bytes, L=30 %zu bytes (ratio %.3f)\n", peak300, peak30,
              ratio);
  report(6, "peak allocation of hmc_sample+backward at L=300 within 10% of L=30",
         ratio < 1.10 && ratio > 0.90);
}

TEST_CASE("criterion 7: round-trip identifiability of the color and tables models") {
  // color: unambiguous neutral-light scene, 0.1 per channel
  bool color_ok = true;
  {
    models::ColorScene scene;
    scene.temp = 6500.0;
    scene.brightness = 1.0;
    scene.color1 = {0.8, 0.2, 0.2};
    scene.color2 = {0.2, 0.2, 0.8};
    models::PatchImage img = render_patches(scene);
    models::ColorExperimentConfig cfg;
    HmcSampler sampler(models::color_model(), {models::color_observation(img)}, {},
                       models::color_step_scale(), cfg.init);
    InferResult inf = sampler.infer(cfg.hmc, RandomKey(0));
    for (int c = 0; c < 3; ++c) {
      color_ok &= std::abs(inf.mean_returns[size_t(c)] - scene.color1[size_t(c)]) < 0.1;
      color_ok &= std::abs(inf.mean_returns[size_t(3 + c)] - scene.color2[size_t(c)]) < 0.1;
    }
  }

  // tables: scale-pinned single-table scene, 0.3 per axis
  bool tables_ok = true;
  {
    models::TableScene scene;
    scene.r = 8.5;
    scene.theta = 3.0;
    scene.h = 1.5;
    scene.tables.push_back(models::TableBox{{3.9, 3.4, 3.0}, {1.0, -0.8}});
    std::vector<models::ProjectedTable> obs = {models::project_scene_table(scene, 0)};
    models::TablesExperimentConfig cfg;
    HmcSampler sampler(models::tables_model(1), models::tables_observations(obs), {},
                       models::tables_step_scale(1), cfg.init);
    InferResult inf = sampler.infer(cfg.hmc, RandomKey(0));
    for (int k = 0; k < 3; ++k)
      tables_ok &= std::abs(inf.mean_returns[size_t(k)] - scene.tables[0].size[size_t(k)]) < 0.3;
  }
  report(7, "color recovered within 0.1/channel and table sizes within 0.3/axis",
         color_ok && tables_ok);
}

TEST_CASE("criterion 8: illusion-synthesis regressions") {
  // color: strictly improved loss in >= 80% of 30 seeds
  int color_improved = 0;
  {
    models::ColorExperimentConfig cfg;
    GdConfig gd{40, 0.1, 0.5, SeedPolicy::Fixed, 2.0};
    for (int seed = 0; seed < 30; ++seed) {
      Objective obj = models::color_objective(cfg);
      RandomKey key{std::uint64_t(seed)};
      std::vector<double> u0 = models::color_initial_stimulus(key.split(1000));
      OptimizationTrace tr = gradient_descent(obj, u0, gd, key);
      if (tr.best_loss() < tr.losses.front()) ++color_improved;
    }
  }
  std::printf("  color: %d/30 seeds improved\n", color_improved);
  report(8, "color optimization strictly improves in >= 80% of 30 seeds",
         color_improved >= 24);

  // tables: final loss below -0.2 in >= 50% of 10 seeds
  int tables_hit = 0;
  {
    models::TablesExperimentConfig cfg;
    GdConfig gd{30, 0.1, 0.5, SeedPolicy::Fixed, 2.0};
    for (int seed = 0; seed < 10; ++seed) {
      Objective obj = models::tables_objective(cfg);
      RandomKey key{std::uint64_t(seed)};
      std::vector<double> u0 = models::tables_initial_stimulus(key.split(1000), cfg.n_tables);
      OptimizationTrace tr = gradient_descent(obj, u0, gd, key);
      if (tr.best_loss() < -0.2) ++tables_hit;
    }
  }
  std::printf("  tables: %d/10 seeds reached loss < -0.2\n", tables_hit);
  report(8, "tables optimization reaches loss < -0.2 in >= 50% of 10 seeds", tables_hit >= 5);
}

TEST_CASE("criterion 9: reruns with identical config and seed are bit-identical") {
  bool ok = true;

  // full sampler output, bitwise
  {
    HmcHyperparams h{80, 40, 0.01, 20};
    SampleSet a = hmc_sample(models::thermometer_model(),
                             {models::thermometer_observation(100.0)}, {}, h, RandomKey(11));
    SampleSet b = hmc_sample(models::thermometer_model(),
                             {models::thermometer_observation(100.0)}, {}, h, RandomKey(11));
    ok &= a.positions == b.positions && a.end_momenta == b.end_momenta &&
          a.initial_position == b.initial_position;
  }

  // every experiment objective, bitwise value and gradient
  {
    models::ColorExperimentConfig ccfg;
    ccfg.hmc = {60, 24, 0.02, 20};
    Objective cobj = models::color_objective(ccfg);
    std::vector<double> cu = models::color_initial_stimulus(RandomKey(3));
    LossEval c1 = cobj.value_and_grad(cu, RandomKey(4));
    LossEval c2 = cobj.value_and_grad(cu, RandomKey(4));
    ok &= c1.value == c2.value && c1.gradient == c2.gradient;

    models::TablesExperimentConfig tcfg;
    tcfg.hmc = {60, 24, 0.004, 20};
    Objective tobj = models::tables_objective(tcfg);
    std::vector<double> tu = models::tables_initial_stimulus(RandomKey(5), tcfg.n_tables);
    LossEval t1 = tobj.value_and_grad(tu, RandomKey(6));
    LossEval t2 = tobj.value_and_grad(tu, RandomKey(6));
    ok &= t1.value == t2.value && t1.gradient == t2.gradient;

    Objective thobj = models::thermometer_objective({100, 50, 0.01, 20});
    std::vector<double> m0 = {100.0};
    LossEval th1 = thobj.value_and_grad(m0, RandomKey(7));
    LossEval th2 = thobj.value_and_grad(m0, RandomKey(7));
    ok &= th1.value == th2.value && th1.gradient == th2.gradient;
  }
  report(9, "identical config and seed reproduce bit-identical numerical output", ok);
}
