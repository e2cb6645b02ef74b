#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dppl/models/thermometer.hpp"
#include "dppl/optimize.hpp"

using namespace dppl;

namespace {

Objective quadratic_objective(double target) {
  Objective o;
  o.dim = 1;
  o.value = [target](std::span<const double> x, const RandomKey&) {
    return (x[0] - target) * (x[0] - target);
  };
  o.value_and_grad = [target](std::span<const double> x, const RandomKey&) {
    LossEval e;
    e.value = (x[0] - target) * (x[0] - target);
    e.gradient = {2.0 * (x[0] - target)};
    return e;
  };
  return o;
}

Objective norm_objective(int dim) {
  Objective o;
  o.dim = dim;
  auto val = [](std::span<const double> x, const RandomKey&) {
    double s = 0;
    for (double xi : x) s += xi * xi;
    return s;
  };
  o.value = val;
  o.value_and_grad = [val](std::span<const double> x, const RandomKey& k) {
    LossEval e;
    e.value = val(x, k);
    for (double xi : x) e.gradient.push_back(2.0 * xi);
    return e;
  };
  return o;
}

}  // namespace

TEST_CASE("gradient_descent: strongly convex quadratic converges") {
  GdConfig cfg{100, 0.1, 0.0, SeedPolicy::Fixed};
  OptimizationTrace tr = gradient_descent(quadratic_objective(5.0), {0.0}, cfg, RandomKey(0));
  CHECK(tr.iterates.size() == 101);
  CHECK(tr.losses.size() == 101);
  CHECK(tr.gradient_norms.size() == 101);
  CHECK(std::abs(tr.final_iterate()[0] - 5.0) < 1e-8);
}

TEST_CASE("gradient_descent: monotone losses on a smooth convex function") {
  GdConfig cfg{60, 0.1, 0.0, SeedPolicy::Fixed};
  OptimizationTrace tr = gradient_descent(norm_objective(3), {1.0, 1.0, 1.0}, cfg, RandomKey(0));
  for (size_t k = 1; k < tr.losses.size(); ++k) CHECK(tr.losses[k] <= tr.losses[k - 1]);
}

TEST_CASE("gradient_descent: momentum accelerates without breaking convergence") {
  GdConfig cfg{80, 0.05, 0.5, SeedPolicy::Fixed};
  OptimizationTrace tr = gradient_descent(quadratic_objective(2.0), {-3.0}, cfg, RandomKey(0));
  CHECK(std::abs(tr.final_iterate()[0] - 2.0) < 1e-6);
}

TEST_CASE("gradient_descent: non-finite loss is reported with the iterate index") {
  Objective bad;
  bad.dim = 1;
  bad.value = [](std::span<const double>, const RandomKey&) { return 1.0; };
  bad.value_and_grad = [](std::span<const double> x, const RandomKey&) {
    LossEval e;
    e.value = x[0] > 10.0 ? std::numeric_limits<double>::quiet_NaN() : -x[0];
    e.gradient = {-1.0};
    return e;
  };
  GdConfig cfg{100, 1.0, 0.0, SeedPolicy::Fixed};
  CHECK_THROWS_WITH_AS(gradient_descent(bad, {0.0}, cfg, RandomKey(0)),
                       doctest::Contains("iterate"), Error);
}

TEST_CASE("finite_diff_gradient: basic oracles") {
  auto quad = quadratic_objective(0.0);
  auto g = finite_diff_gradient(quad, std::vector<double>{3.0}, 1e-4, RandomKey(0));
  CHECK(std::abs(g[0] - 6.0) < 1e-6);

  Objective constant;
  constant.dim = 2;
  constant.value = [](std::span<const double>, const RandomKey&) { return 4.2; };
  constant.value_and_grad = [](std::span<const double>, const RandomKey&) {
    return LossEval{4.2, {0.0, 0.0}};
  };
  auto gc = finite_diff_gradient(constant, std::vector<double>{1.0, -1.0}, 1e-4, RandomKey(0));
  CHECK(std::abs(gc[0]) < 1e-9);
  CHECK(std::abs(gc[1]) < 1e-9);
}

TEST_CASE("thermometer objective: backward gradient and finite differences cross-check") {
  HmcHyperparams h{200, 60, 0.01, 40};
  Objective obj = models::thermometer_objective(h, 100.0);
  RandomKey key(3);
  std::vector<double> m = {100.0};
  LossEval e = obj.value_and_grad(m, key);
  auto fd = finite_diff_gradient(obj, m, 0.1, key);
  CHECK(e.gradient[0] == doctest::Approx(fd[0]).epsilon(0.05));
}

TEST_CASE("fixed-key objectives are bit-identical across evaluations") {
  HmcHyperparams h{60, 30, 0.01, 10};
  Objective obj = models::thermometer_objective(h, 100.0);
  RandomKey key(5);
  std::vector<double> m = {97.0};
  CHECK(obj.value(m, key) == obj.value(m, key));
}

TEST_CASE("inverse-inverse solve: 100 steps of gradient descent find the target reading") {
  HmcHyperparams h{1000, 300, 0.01, 100};
  Objective obj = models::thermometer_objective(h, 100.0);
  GdConfig cfg{100, 0.1, 0.0, SeedPolicy::Fixed};
  OptimizationTrace tr = gradient_descent(obj, {100.0}, cfg, RandomKey(0));
  // analytic solution 524/5
  CHECK(tr.final_iterate()[0] > 104.6);
  CHECK(tr.final_iterate()[0] < 105.0);
  // the solved reading makes the inferred temperature hit the target
  double inferred = models::thermometer_infer(tr.final_iterate()[0], h, RandomKey(0));
  CHECK(std::abs(inferred - 100.0) < 0.4);
  // and the analytic fixed point 524/5 closes the loop on its own
  double at_analytic = models::thermometer_infer(524.0 / 5.0, h, RandomKey(0));
  CHECK(std::abs(at_analytic - 100.0) < 0.4);
}
