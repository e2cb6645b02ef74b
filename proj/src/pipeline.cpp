#include "dppl/pipeline.hpp"

namespace dppl {

InferencePipeline::InferencePipeline(CompiledFunction stimulus, CompiledFunction loss,
                                     std::unique_ptr<HmcSampler> sampler, HmcHyperparams hyper)
    : stimulus_(std::move(stimulus)),
      loss_(std::move(loss)),
      sampler_(std::move(sampler)),
      hyper_(hyper) {
  if (stimulus_.num_outputs() != int(sampler_->observations().size()))
    throw Error("stimulus outputs must match the model's observation sites");
  if (loss_.num_inputs() != 2 || loss_.output_shape(0).size() != 1)
    throw Error("loss must map (params, mean_returns) to a scalar");
}

InferResult InferencePipeline::run_inference(std::span<const double> u, const RandomKey& key) {
  stimulus_.set_input(0, u);
  stimulus_.forward();
  for (int j = 0; j < stimulus_.num_outputs(); ++j)
    sampler_->set_observation_values(j, stimulus_.output(j));
  return sampler_->infer(hyper_, key);
}

InferResult InferencePipeline::infer_at(std::span<const double> u, const RandomKey& key) {
  return run_inference(u, key);
}

double InferencePipeline::value(std::span<const double> u, const RandomKey& key) {
  InferResult inf = run_inference(u, key);
  loss_.set_input(0, u);
  loss_.set_input(1, inf.mean_returns);
  loss_.forward();
  return loss_.output_scalar();
}

LossEval InferencePipeline::value_and_grad(std::span<const double> u, const RandomKey& key) {
  InferResult inf = run_inference(u, key);

  loss_.set_input(0, u);
  loss_.set_input(1, inf.mean_returns);
  loss_.forward();
  LossEval out;
  out.value = loss_.output_scalar();
  loss_.reverse_scalar();
  auto u_direct = loss_.input_adjoint(0);
  auto mean_adj = loss_.input_adjoint(1);
  out.gradient.assign(u_direct.begin(), u_direct.end());

  try {
    HmcAdjoints adj = sampler_->infer_backward(inf, mean_adj);
    // pull the observation adjoints back through the stimulus map
    stimulus_.set_input(0, u);
    stimulus_.forward();
    stimulus_.reverse_all(adj.observations);
    auto u_stim = stimulus_.input_adjoint(0);
    for (size_t i = 0; i < out.gradient.size(); ++i) out.gradient[i] += u_stim[i];
  } catch (const ReconstructionError&) {
    ++backward_failures_;
    std::fill(out.gradient.begin(), out.gradient.end(), 0.0);
  }
  return out;
}

Objective InferencePipeline::objective(std::shared_ptr<InferencePipeline> p) {
  Objective obj;
  obj.dim = p->param_dim();
  obj.value = [p](std::span<const double> u, const RandomKey& key) { return p->value(u, key); };
  obj.value_and_grad = [p](std::span<const double> u, const RandomKey& key) {
    return p->value_and_grad(u, key);
  };
  return obj;
}

}  // namespace dppl
