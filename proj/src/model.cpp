#include "dppl/model.hpp"

#include <algorithm>

namespace dppl {

const Value& ProgramInputs::site(std::string_view name) const {
  if (site_names) {
    for (size_t i = 0; i < site_names->size(); ++i)
      if ((*site_names)[i] == name) return sites[i];
  }
  throw Error("unknown latent site '" + std::string(name) + "'");
}

const LatentSite& ModelDefinition::site(std::string_view name) const {
  for (const LatentSite& s : sites_)
    if (s.name == name) return s;
  throw Error("unknown latent site '" + std::string(name) + "'");
}

ModelBuilder& ModelBuilder::sample(std::string name, Shape shape, DistributionSpec dist) {
  for (const LatentSite& s : m_.sites_)
    if (s.name == name) throw Error("duplicate latent site '" + name + "'");
  LatentSite site{std::move(name), std::move(shape), dist, m_.latent_dim_};
  m_.latent_dim_ += site.shape.size();
  m_.site_names_.push_back(site.name);
  m_.sites_.push_back(std::move(site));
  return *this;
}

ModelBuilder& ModelBuilder::observe(std::string name, Shape shape, double noise_stddev) {
  if (!(noise_stddev > 0)) throw Error("observation noise stddev must be positive");
  m_.obs_specs_.push_back({std::move(name), std::move(shape), noise_stddev});
  return *this;
}

ModelBuilder& ModelBuilder::param(Shape shape) {
  m_.param_shapes_.push_back(std::move(shape));
  return *this;
}

ModelBuilder& ModelBuilder::program(Program p) {
  m_.program_ = std::move(p);
  return *this;
}

ModelDefinition ModelBuilder::build() {
  if (!m_.program_) throw Error("model has no program");
  if (m_.sites_.empty()) throw Error("model has no latent sites");
  return std::move(m_);
}

std::vector<Value> ModelDefinition::constrain_sites(const Value& z, Value* log_det_total) const {
  if (z.size() != latent_dim_)
    throw ShapeError("latent vector has " + std::to_string(z.size()) + " elements, model needs " +
                     std::to_string(latent_dim_));
  std::vector<Value> constrained;
  constrained.reserve(sites_.size());
  Value total(0.0);
  for (const LatentSite& s : sites_) {
    Value zs = slice(z, s.offset, s.shape.size());
    ConstrainResult cr = to_constrained(s.dist, zs);
    total = total + cr.log_det_jacobian;
    constrained.push_back(cr.constrained.reshaped(s.shape));
  }
  if (log_det_total) *log_det_total = total;
  return constrained;
}

Value ModelDefinition::build_log_joint(const Value& z, std::span<const Value> observed,
                                       std::span<const Value> params) const {
  if (observed.size() != obs_specs_.size())
    throw ShapeError("expected " + std::to_string(obs_specs_.size()) + " observations, got " +
                     std::to_string(observed.size()));
  Value log_det(0.0);
  std::vector<Value> constrained = constrain_sites(z, &log_det);

  Value total = log_det;
  for (size_t i = 0; i < sites_.size(); ++i) total = total + log_prob(sites_[i].dist, constrained[i]);

  ProgramInputs in;
  in.sites = std::move(constrained);
  in.params.assign(params.begin(), params.end());
  in.site_names = &site_names_;
  ProgramOutputs out = program_(in);
  if (out.predictions.size() != obs_specs_.size())
    throw ShapeError("program produced " + std::to_string(out.predictions.size()) +
                     " predictions for " + std::to_string(obs_specs_.size()) + " observation sites");

  for (size_t i = 0; i < obs_specs_.size(); ++i) {
    const ObservationSpec& spec = obs_specs_[i];
    if (out.predictions[i].size() != spec.shape.size())
      throw ShapeError("prediction for '" + spec.name + "' has " +
                       std::to_string(out.predictions[i].size()) + " elements, expected " +
                       std::to_string(spec.shape.size()));
    total = total + normal_log_prob(observed[i], out.predictions[i], spec.noise_stddev);
  }
  return total;
}

double log_joint(const ModelDefinition& model, std::span<const double> z,
                 std::span<const ObservationSite> observations,
                 const std::vector<std::vector<double>>& params) {
  const auto& specs = model.observation_specs();
  if (observations.size() != specs.size())
    throw ShapeError("expected " + std::to_string(specs.size()) + " observation sites");
  std::vector<Value> obs;
  for (size_t i = 0; i < observations.size(); ++i) {
    if (observations[i].name != specs[i].name)
      throw Error("observation '" + observations[i].name + "' does not match declared site '" +
                  specs[i].name + "'");
    obs.emplace_back(observations[i].values, specs[i].shape);
  }
  std::vector<Value> pv;
  for (size_t i = 0; i < params.size(); ++i) pv.emplace_back(params[i], model.param_shapes()[i]);
  Value zv(std::vector<double>(z.begin(), z.end()), Shape::vector(model.latent_dim()));
  return model.build_log_joint(zv, obs, pv).scalar();
}

std::vector<double> prior_sample(const ModelDefinition& model, const RandomKey& key) {
  std::vector<double> z(static_cast<size_t>(model.latent_dim()));
  const auto& sites = model.sites();
  for (size_t i = 0; i < sites.size(); ++i) {
    const LatentSite& s = sites[i];
    RandomKey site_key = key.split(i);
    std::span<double> span(z.data() + s.offset, size_t(s.shape.size()));
    sample_constrained(s.dist, site_key, span);
    for (double& x : span) x = to_unconstrained(s.dist, x);
  }
  return z;
}

std::vector<std::vector<double>> constrained_sites(const ModelDefinition& model,
                                                   std::span<const double> z) {
  Value zv(std::vector<double>(z.begin(), z.end()), Shape::vector(model.latent_dim()));
  std::vector<Value> c = model.constrain_sites(zv, nullptr);
  std::vector<std::vector<double>> out;
  for (const Value& v : c) out.emplace_back(v.data().begin(), v.data().end());
  return out;
}

CompiledModel::CompiledModel(const ModelDefinition& model) : model_(&model) {
  const int d = model.latent_dim();
  const auto& obs_specs = model.observation_specs();
  const auto& param_shapes = model.param_shapes();

  std::vector<Shape> lj_inputs;
  lj_inputs.push_back(Shape::vector(d));
  for (const auto& o : obs_specs) lj_inputs.push_back(o.shape);
  for (const auto& p : param_shapes) lj_inputs.push_back(p);

  log_joint_fn_ = CompiledFunction::trace(lj_inputs, [&](std::span<Value> in) {
    std::span<Value> obs = in.subspan(1, obs_specs.size());
    std::span<Value> params = in.subspan(1 + obs_specs.size());
    return std::vector<Value>{model.build_log_joint(in[0], obs, params)};
  });

  std::vector<Shape> ret_inputs;
  ret_inputs.push_back(Shape::vector(d));
  for (const auto& p : param_shapes) ret_inputs.push_back(p);

  returns_fn_ = CompiledFunction::trace(ret_inputs, [&](std::span<Value> in) {
    std::vector<Value> constrained = model.constrain_sites(in[0], nullptr);
    ProgramInputs pin;
    pin.sites = std::move(constrained);
    pin.params.assign(in.begin() + 1, in.end());
    pin.site_names = &model.site_names();
    ProgramOutputs out = model.program()(pin);
    if (out.returns.empty()) throw Error("model program returns nothing");
    return_layout_.clear();
    return_dim_ = 0;
    Value flat;
    for (size_t i = 0; i < out.returns.size(); ++i) {
      std::string name =
          i < out.return_names.size() ? out.return_names[i] : "return" + std::to_string(i);
      return_layout_.push_back({std::move(name), out.returns[i].shape(), return_dim_});
      return_dim_ += out.returns[i].size();
      flat = i == 0 ? out.returns[i] : concat(flat, out.returns[i]);
    }
    if (out.returns.size() == 1) flat = flat.reshaped(Shape::vector(flat.size()));
    return std::vector<Value>{flat};
  });
}

}  // namespace dppl
