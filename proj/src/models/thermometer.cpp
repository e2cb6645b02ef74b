#include "dppl/models/thermometer.hpp"

namespace dppl::models {

ModelDefinition thermometer_model() {
  ModelBuilder b;
  b.sample("T", Shape::scalar(), normal_dist(70.0, 5.0));
  b.observe("M", Shape::scalar(), 2.0);
  b.program([](const ProgramInputs& in) {
    ProgramOutputs out;
    out.predictions = {in.site("T")};
    out.returns = {in.site("T")};
    out.return_names = {"T"};
    return out;
  });
  return b.build();
}

ObservationSite thermometer_observation(double measurement) {
  return {"M", {measurement}, 2.0};
}

double thermometer_infer(double measurement, const HmcHyperparams& hyper, const RandomKey& key) {
  return infer(thermometer_model(), {thermometer_observation(measurement)}, {}, hyper, key)[0];
}

std::shared_ptr<InferencePipeline> thermometer_pipeline(const HmcHyperparams& hyper, double target) {
  CompiledFunction stimulus = CompiledFunction::trace(
      {Shape::vector(1)}, [](std::span<Value> in) { return std::vector<Value>{in[0]}; });
  CompiledFunction loss = CompiledFunction::trace(
      {Shape::vector(1), Shape::vector(1)}, [target](std::span<Value> in) {
        Value d = in[1] - target;
        return std::vector<Value>{sum(d * d)};
      });
  auto sampler = std::make_unique<HmcSampler>(
      thermometer_model(), std::vector<ObservationSite>{thermometer_observation(0.0)});
  return std::make_shared<InferencePipeline>(std::move(stimulus), std::move(loss),
                                             std::move(sampler), hyper);
}

Objective thermometer_objective(const HmcHyperparams& hyper, double target) {
  return InferencePipeline::objective(thermometer_pipeline(hyper, target));
}

}  // namespace dppl::models
