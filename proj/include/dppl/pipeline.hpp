#pragma once

#include <memory>

#include "dppl/hmc.hpp"
#include "dppl/optimize.hpp"

namespace dppl {

// The differentiable chain every experiment optimizes:
//
//   params u --stimulus--> observed values --infer--> posterior mean returns
//            \------------------direct-------------------/--loss--> scalar
//
// The backward pass composes the loss vjp, the sampler's reversible
// backward, and the stimulus vjp, and sums the direct and through-inference
// parameter gradients.
class InferencePipeline {
public:
  // `stimulus`: traced u -> one output per model observation site.
  // `loss`: traced (u, mean_returns) -> scalar.
  InferencePipeline(CompiledFunction stimulus, CompiledFunction loss,
                    std::unique_ptr<HmcSampler> sampler, HmcHyperparams hyper);

  int param_dim() const { return stimulus_.input_shape(0).size(); }

  double value(std::span<const double> u, const RandomKey& key);

  // Binds the stimulus for `u` and runs posterior inference once.
  InferResult infer_at(std::span<const double> u, const RandomKey& key);

  // Backpropagating through a chain that wandered into a chaotic region can
  // trip the sampler's reconstruction-drift guard; the pathwise gradient
  // there is meaningless anyway. Such evaluations keep their loss value,
  // report a zero gradient, and bump backward_failures().
  LossEval value_and_grad(std::span<const double> u, const RandomKey& key);
  int backward_failures() const { return backward_failures_; }

  HmcSampler& sampler() { return *sampler_; }
  const HmcHyperparams& hyper() const { return hyper_; }

  // Wraps a shared pipeline as an optimizer objective.
  static Objective objective(std::shared_ptr<InferencePipeline> p);

private:
  InferResult run_inference(std::span<const double> u, const RandomKey& key);

  CompiledFunction stimulus_;
  CompiledFunction loss_;
  std::unique_ptr<HmcSampler> sampler_;
  HmcHyperparams hyper_;
  int backward_failures_ = 0;
};

}  // namespace dppl
