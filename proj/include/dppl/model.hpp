#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dppl/compiled.hpp"
#include "dppl/distributions.hpp"

namespace dppl {

// One `sample` statement: a named latent with a prior, occupying a
// contiguous run of the flat unconstrained vector.
struct LatentSite {
  std::string name;
  Shape shape;
  DistributionSpec dist;
  int offset = 0;  // assigned at build time
};

// One `observe` statement's declaration: the observed values are bound per
// inference call, not baked into the model.
struct ObservationSpec {
  std::string name;
  Shape shape;
  double noise_stddev = 1.0;
};

// Observed values for one observation site.
struct ObservationSite {
  std::string name;
  std::vector<double> values;
  double noise_stddev = 1.0;
};

// What the deterministic program receives: constrained site values (in
// declaration order) and any external parameters.
struct ProgramInputs {
  std::vector<Value> sites;
  std::vector<Value> params;
  const Value& site(std::string_view name) const;
  const std::vector<std::string>* site_names = nullptr;
};

// What it produces: one prediction per observation site (in declaration
// order) and the returned quantities of interest.
struct ProgramOutputs {
  std::vector<Value> predictions;
  std::vector<Value> returns;
  std::vector<std::string> return_names;  // optional; defaults to return<i>
};

using Program = std::function<ProgramOutputs(const ProgramInputs&)>;

// A generative model: ordered latent declarations plus a deterministic,
// differentiable program. All randomness lives in the sampler; the program
// maps (unconstrained latents, parameters) to predictions and returns.
class ModelDefinition {
public:
  ModelDefinition() = default;

  int latent_dim() const { return latent_dim_; }
  const std::vector<LatentSite>& sites() const { return sites_; }
  const std::vector<std::string>& site_names() const { return site_names_; }
  const std::vector<ObservationSpec>& observation_specs() const { return obs_specs_; }
  const std::vector<Shape>& param_shapes() const { return param_shapes_; }
  const Program& program() const { return program_; }

  const LatentSite& site(std::string_view name) const;

  // Unconstrained log joint as a traced expression:
  //   sum over sites of [prior log-prob in constrained space + log-det]
  // + sum over observations of Normal(prediction, noise) log-prob.
  // `z` is the flat unconstrained latent vector; `observed` and `params`
  // follow declaration order.
  Value build_log_joint(const Value& z, std::span<const Value> observed,
                        std::span<const Value> params) const;

  // Constrained site values plus the summed log-det, as traced expressions.
  std::vector<Value> constrain_sites(const Value& z, Value* log_det_total) const;

private:
  friend class ModelBuilder;
  std::vector<LatentSite> sites_;
  std::vector<std::string> site_names_;
  std::vector<ObservationSpec> obs_specs_;
  std::vector<Shape> param_shapes_;
  Program program_;
  int latent_dim_ = 0;
};

class ModelBuilder {
public:
  ModelBuilder& sample(std::string name, Shape shape, DistributionSpec dist);
  ModelBuilder& observe(std::string name, Shape shape, double noise_stddev);
  ModelBuilder& param(Shape shape);
  ModelBuilder& program(Program p);
  ModelDefinition build();

private:
  ModelDefinition m_;
};

// Unnormalized log joint density at a concrete point. The differentiable
// surface of the same quantity is CompiledModel::log_joint_fn().
double log_joint(const ModelDefinition& model, std::span<const double> z,
                 std::span<const ObservationSite> observations,
                 const std::vector<std::vector<double>>& params = {});

// Independent prior draw of the flat unconstrained latent vector. Normal
// sites are drawn directly; Uniform sites are drawn in constrained space and
// mapped through the logit.
std::vector<double> prior_sample(const ModelDefinition& model, const RandomKey& key);

// Constrained values of every site for a concrete unconstrained vector.
std::vector<std::vector<double>> constrained_sites(const ModelDefinition& model,
                                                   std::span<const double> z);

// The model's two replayable surfaces, traced once:
//   log_joint(z, observed..., params...) -> scalar
//   returns(z, params...)                -> flat concatenation of returns
class CompiledModel {
public:
  explicit CompiledModel(const ModelDefinition& model);

  const ModelDefinition& definition() const { return *model_; }
  int latent_dim() const { return model_->latent_dim(); }
  int return_dim() const { return return_dim_; }
  int num_observations() const { return int(model_->observation_specs().size()); }
  int num_params() const { return int(model_->param_shapes().size()); }

  CompiledFunction& log_joint_fn() { return log_joint_fn_; }
  CompiledFunction& returns_fn() { return returns_fn_; }

  // (name, shape, offset) of each return segment in the flat return vector.
  struct ReturnSegment {
    std::string name;
    Shape shape;
    int offset;
  };
  const std::vector<ReturnSegment>& return_layout() const { return return_layout_; }

private:
  const ModelDefinition* model_;
  CompiledFunction log_joint_fn_;
  CompiledFunction returns_fn_;
  std::vector<ReturnSegment> return_layout_;
  int return_dim_ = 0;
};

}  // namespace dppl
