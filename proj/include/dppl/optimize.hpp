#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "dppl/random.hpp"

namespace dppl {

struct LossEval {
  double value = 0.0;
  std::vector<double> gradient;
};

// A differentiable scalar objective. Both entry points receive the sampler
// key so that, with a fixed key, the loss is a deterministic function of the
// parameters and finite differences measure the same map the backward pass
// differentiates.
struct Objective {
  int dim = 0;
  std::function<double(std::span<const double>, const RandomKey&)> value;
  std::function<LossEval(std::span<const double>, const RandomKey&)> value_and_grad;
};

enum class SeedPolicy {
  Fixed,  // same key every step: deterministic objective (default)
  Fresh,  // key split per step: averages over sampler noise
};

struct GdConfig {
  int steps = 100;
  double learning_rate = 0.1;
  double momentum = 0.0;  // 0 = plain gradient descent
  SeedPolicy seed_policy = SeedPolicy::Fixed;
  // Gradient-norm ceiling applied to the update (infinity = plain GD).
  // Backpropagating through very long sampler chains can hit chaotic
  // parameter regions whose exploding gradients would otherwise launch the
  // iterate into saturation.
  double max_grad_norm = std::numeric_limits<double>::infinity();
};

struct OptimizationTrace {
  std::vector<std::vector<double>> iterates;  // steps + 1 entries
  std::vector<double> losses;
  std::vector<double> gradient_norms;

  const std::vector<double>& final_iterate() const { return iterates.back(); }
  double final_loss() const { return losses.back(); }

  // Index of the lowest recorded loss. On rugged sampler-noise landscapes
  // the last iterate need not be the best one; experiments report this one.
  int best_index() const;
  const std::vector<double>& best_iterate() const { return iterates[size_t(best_index())]; }
  double best_loss() const { return losses[size_t(best_index())]; }
};

// x_{k+1} = x_k - lr * grad(x_k), optionally with a momentum term. Records
// every iterate including the initial one. Raises on a non-finite loss or
// gradient, naming the iterate.
OptimizationTrace gradient_descent(const Objective& objective, std::vector<double> init,
                                   const GdConfig& config, const RandomKey& key);

// Central differences per coordinate with the key held fixed across both
// evaluations (common random numbers).
std::vector<double> finite_diff_gradient(const Objective& objective, std::span<const double> x,
                                         double h, const RandomKey& key);

}  // namespace dppl
