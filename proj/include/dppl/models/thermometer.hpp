#pragma once

#include "dppl/pipeline.hpp"

namespace dppl::models {

// One latent temperature T ~ N(70, 5); a noisy reading M ~ N(T, 2) is
// observed; T is returned.
ModelDefinition thermometer_model();

ObservationSite thermometer_observation(double measurement);

// Posterior mean of T given the bound measurement.
double thermometer_infer(double measurement, const HmcHyperparams& hyper, const RandomKey& key);

// loss(m) = (infer(M=m) - target)^2: what reading would make the inferred
// temperature equal the target?
std::shared_ptr<InferencePipeline> thermometer_pipeline(const HmcHyperparams& hyper,
                                                        double target = 100.0);
Objective thermometer_objective(const HmcHyperparams& hyper, double target = 100.0);

}  // namespace dppl::models
