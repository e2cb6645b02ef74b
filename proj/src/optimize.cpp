#include "dppl/optimize.hpp"

#include <cmath>
#include <string>

#include "dppl/errors.hpp"

namespace dppl {

namespace {

double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_finite(const LossEval& e, int iterate) {
  if (!std::isfinite(e.value))
    throw Error("non-finite loss at iterate " + std::to_string(iterate));
  for (double g : e.gradient)
    if (!std::isfinite(g))
      throw Error("non-finite gradient at iterate " + std::to_string(iterate));
}

}  // namespace

int OptimizationTrace::best_index() const {
  int best = 0;
  for (size_t k = 1; k < losses.size(); ++k)
    if (losses[k] < losses[size_t(best)]) best = int(k);
  return best;
}

OptimizationTrace gradient_descent(const Objective& objective, std::vector<double> init,
                                   const GdConfig& config, const RandomKey& key) {
  if (config.steps <= 0) throw Error("steps must be positive");
  if (!(config.learning_rate > 0)) throw Error("learning_rate must be positive");

  OptimizationTrace trace;
  std::vector<double> x = std::move(init);
  std::vector<double> velocity(x.size(), 0.0);

  for (int k = 0; k <= config.steps; ++k) {
    RandomKey step_key = config.seed_policy == SeedPolicy::Fixed ? key : key.split(std::uint64_t(k));
    LossEval e = objective.value_and_grad(x, step_key);
    check_finite(e, k);
    double gnorm = norm(e.gradient);
    trace.iterates.push_back(x);
    trace.losses.push_back(e.value);
    trace.gradient_norms.push_back(gnorm);
    if (k == config.steps) break;
    double clip = gnorm > config.max_grad_norm ? config.max_grad_norm / gnorm : 1.0;
    for (size_t i = 0; i < x.size(); ++i) {
      velocity[i] = config.momentum * velocity[i] - config.learning_rate * clip * e.gradient[i];
      x[i] += velocity[i];
    }
  }
  return trace;
}

std::vector<double> finite_diff_gradient(const Objective& objective, std::span<const double> x,
                                         double h, const RandomKey& key) {
  if (!(h > 0)) throw Error("finite difference step must be positive");
  std::vector<double> g(x.size());
  std::vector<double> xp(x.begin(), x.end());
  for (size_t i = 0; i < x.size(); ++i) {
    const double xi = xp[i];
    xp[i] = xi + h;
    double up = objective.value(xp, key);
    xp[i] = xi - h;
    double down = objective.value(xp, key);
    xp[i] = xi;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace dppl
