#include "dppl/hmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dppl {

void validate(const HmcHyperparams& h) {
  if (h.n_samples <= 0) throw Error("n_samples must be positive");
  if (h.leapfrog_steps <= 0) throw Error("leapfrog_steps must be positive");
  if (!(h.step_size > 0)) throw Error("step_size must be positive");
  if (h.skip < 0 || h.skip >= h.n_samples) throw Error("skip must satisfy 0 <= skip < n_samples");
}

void leapfrog_step(std::span<double> q, std::span<double> p, double eps, const ForceFn& force) {
  const size_t d = q.size();
  std::vector<double> f(d);
  force(q, f);
  for (size_t i = 0; i < d; ++i) p[i] += 0.5 * eps * f[i];
  for (size_t i = 0; i < d; ++i) q[i] += eps * p[i];
  force(q, f);
  for (size_t i = 0; i < d; ++i) p[i] += 0.5 * eps * f[i];
}

void inverse_leapfrog_step(std::span<double> q, std::span<double> p, double eps,
                           const ForceFn& force) {
  const size_t d = q.size();
  std::vector<double> f(d);
  force(q, f);
  for (size_t i = 0; i < d; ++i) p[i] -= 0.5 * eps * f[i];
  for (size_t i = 0; i < d; ++i) q[i] -= eps * p[i];
  force(q, f);
  for (size_t i = 0; i < d; ++i) p[i] -= 0.5 * eps * f[i];
}

HmcSampler::HmcSampler(const ModelDefinition& model, std::vector<ObservationSite> observations,
                       std::vector<std::vector<double>> params, std::vector<double> step_scale,
                       ChainInit init)
    : model_(model),
      compiled_(model_),
      observations_(std::move(observations)),
      params_(std::move(params)),
      step_scale_(std::move(step_scale)),
      init_(init) {
  const auto& specs = model_.observation_specs();
  if (observations_.size() != specs.size())
    throw Error("model declares " + std::to_string(specs.size()) + " observation sites, got " +
                std::to_string(observations_.size()));
  for (size_t i = 0; i < specs.size(); ++i) {
    if (observations_[i].name != specs[i].name)
      throw Error("observation '" + observations_[i].name + "' does not match declared site '" +
                  specs[i].name + "'");
    if (int(observations_[i].values.size()) != specs[i].shape.size())
      throw ShapeError("observation '" + specs[i].name + "' has wrong length");
  }
  if (params_.size() != model_.param_shapes().size())
    throw Error("model declares " + std::to_string(model_.param_shapes().size()) + " params, got " +
                std::to_string(params_.size()));
  if (step_scale_.empty()) step_scale_.assign(size_t(model_.latent_dim()), 1.0);
  if (int(step_scale_.size()) != model_.latent_dim())
    throw ShapeError("step_scale length does not match latent dimension");
}

void HmcSampler::set_observation_values(int i, std::span<const double> values) {
  auto& site = observations_[size_t(i)];
  if (values.size() != site.values.size()) throw ShapeError("observation length changed");
  site.values.assign(values.begin(), values.end());
  dual_bound_ = false;
}

void HmcSampler::set_param_values(int i, std::span<const double> values) {
  auto& p = params_[size_t(i)];
  if (values.size() != p.size()) throw ShapeError("param length changed");
  p.assign(values.begin(), values.end());
  dual_bound_ = false;
}

void HmcSampler::bind_fixed_inputs() {
  CompiledFunction& lj = compiled_.log_joint_fn();
  for (size_t i = 0; i < observations_.size(); ++i) lj.set_input(1 + int(i), observations_[i].values);
  for (size_t i = 0; i < params_.size(); ++i)
    lj.set_input(1 + int(observations_.size()) + int(i), params_[i]);
}

void HmcSampler::bind_fixed_inputs_dual() {
  if (dual_bound_) return;
  CompiledFunction& lj = compiled_.log_joint_fn();
  for (size_t i = 0; i < observations_.size(); ++i)
    lj.set_dual_input(1 + int(i), observations_[i].values);
  for (size_t i = 0; i < params_.size(); ++i)
    lj.set_dual_input(1 + int(observations_.size()) + int(i), params_[i]);
  dual_bound_ = true;
}

void HmcSampler::force(std::span<const double> q, std::span<double> f_out) {
  CompiledFunction& lj = compiled_.log_joint_fn();
  lj.set_input(0, q);
  lj.forward(false);
  lj.reverse_scalar();
  auto g = lj.input_adjoint(0);
  std::copy(g.begin(), g.end(), f_out.begin());
}

void HmcSampler::force_with_products(std::span<const double> q, std::span<const double> w,
                                     std::span<double> f_out, std::span<double> hzz_w,
                                     HmcAdjoints& mixed) {
  bind_fixed_inputs_dual();
  CompiledFunction& lj = compiled_.log_joint_fn();
  lj.set_dual_input(0, q, w);
  lj.forward_dual(false);
  lj.reverse_dual_scalar();
  auto gz = lj.input_adjoint_dual(0);
  for (size_t i = 0; i < gz.size(); ++i) {
    f_out[i] = gz[i].v;
    hzz_w[i] = gz[i].t;
  }
  for (size_t j = 0; j < observations_.size(); ++j) {
    auto go = lj.input_adjoint_dual(1 + int(j));
    auto& acc = mixed.observations[j];
    for (size_t i = 0; i < go.size(); ++i) acc[i] += go[i].t;
  }
  for (size_t j = 0; j < params_.size(); ++j) {
    auto gp = lj.input_adjoint_dual(1 + int(observations_.size()) + int(j));
    auto& acc = mixed.params[j];
    for (size_t i = 0; i < gp.size(); ++i) acc[i] += gp[i].t;
  }
}

SampleSet HmcSampler::sample(const HmcHyperparams& hyper, const RandomKey& key) {
  validate(hyper);
  const int d = latent_dim();
  const int n = hyper.n_samples;

  SampleSet set;
  set.latent_dim = d;
  set.hyper = hyper;
  set.step.resize(size_t(d), 0.0);
  for (int i = 0; i < d; ++i) set.step[size_t(i)] = hyper.step_size * step_scale_[size_t(i)];

  bind_fixed_inputs();

  std::vector<double> q = choose_initial_position(hyper, set.step, key);
  set.initial_position = q;
  set.positions.resize(size_t(n) * size_t(d));
  set.end_momenta.resize(size_t(n) * size_t(d));
  set.key_trace.reserve(size_t(n));

  std::vector<double> p(size_t(d), 0.0);
  std::vector<double> f(size_t(d), 0.0);
  force(q, f);
  run_trajectories(q, p, f, set.step, n, hyper.leapfrog_steps, key, 1, &set);
  return set;
}

void HmcSampler::run_trajectories(std::span<double> q, std::span<double> p, std::span<double> f,
                                  std::span<const double> s, int count, int steps,
                                  const RandomKey& key, std::uint64_t first_stream,
                                  SampleSet* record) {
  const int d = latent_dim();
  for (int traj = 0; traj < count; ++traj) {
    RandomKey traj_key = key.split(first_stream + std::uint64_t(traj));
    if (record) record->key_trace.push_back(traj_key);
    RandomKey draw = traj_key;
    draw.fill_normal(p);

    for (int l = 0; l < steps; ++l) {
      try {
        for (int i = 0; i < d; ++i) p[size_t(i)] += 0.5 * s[size_t(i)] * f[size_t(i)];
        for (int i = 0; i < d; ++i) q[size_t(i)] += s[size_t(i)] * p[size_t(i)];
        force(q, f);
        for (int i = 0; i < d; ++i) p[size_t(i)] += 0.5 * s[size_t(i)] * f[size_t(i)];
      } catch (const NonFiniteError&) {
        throw DivergenceError(traj, l);
      }
      for (int i = 0; i < d; ++i)
        if (!std::isfinite(q[size_t(i)]) || !std::isfinite(p[size_t(i)]) ||
            !std::isfinite(f[size_t(i)]))
          throw DivergenceError(traj, l);
    }
    if (record) {
      std::copy(q.begin(), q.end(), record->positions.begin() + size_t(traj) * size_t(d));
      std::copy(p.begin(), p.end(), record->end_momenta.begin() + size_t(traj) * size_t(d));
    }
  }
}

std::vector<double> HmcSampler::choose_initial_position(const HmcHyperparams& hyper,
                                                        std::span<const double> s,
                                                        const RandomKey& key) {
  RandomKey init_key = key.split(0);
  if (init_.candidates <= 1 && init_.probe_samples <= 0) return prior_sample(model_, init_key);

  const int d = latent_dim();
  const int n_cand = std::max(1, init_.candidates);
  std::vector<double> best_q;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> p(size_t(d), 0.0), f(size_t(d), 0.0);
  for (int c = 0; c < n_cand; ++c) {
    RandomKey ck = n_cand == 1 ? init_key : init_key.split(std::uint64_t(c));
    std::vector<double> q = prior_sample(model_, ck);
    try {
      if (init_.probe_samples > 0) {
        force(q, f);
        run_trajectories(q, p, f, s, init_.probe_samples, hyper.leapfrog_steps, ck, 1, nullptr);
      }
      double score = eval_log_joint(q);
      if (std::isfinite(score) && score > best_score) {
        best_score = score;
        best_q = q;
      }
    } catch (const DivergenceError&) {
      // a diverged probe just disqualifies this candidate
    }
  }
  if (best_q.empty()) throw Error("all chain-initialization probes diverged");
  return best_q;
}

HmcAdjoints HmcSampler::backward(const SampleSet& set, std::span<const double> position_adjoints) {
  const int d = set.latent_dim;
  const int n = set.count();
  const int steps = set.hyper.leapfrog_steps;
  const std::vector<double>& s = set.step;
  if (position_adjoints.size() != size_t(n) * size_t(d))
    throw ShapeError("expected one adjoint per position");

  HmcAdjoints adj;
  for (const auto& o : observations_) adj.observations.emplace_back(o.values.size(), 0.0);
  for (const auto& p : params_) adj.params.emplace_back(p.size(), 0.0);

  std::vector<double> q(size_t(d), 0.0), p(size_t(d), 0.0), phalf(size_t(d), 0.0);
  std::vector<double> qbar(size_t(d), 0.0), pbar(size_t(d), 0.0);
  std::vector<double> fbar(size_t(d), 0.0), f(size_t(d), 0.0), hw(size_t(d), 0.0);
  std::vector<double> carry(size_t(d), 0.0);
  std::vector<double> p0(size_t(d), 0.0);

  dual_bound_ = false;  // rebind: observations may have changed since tracing
  for (int traj = n - 1; traj >= 0; --traj) {
    auto qe = set.position(traj);
    auto pe = set.end_momentum(traj);
    std::copy(qe.begin(), qe.end(), q.begin());
    std::copy(pe.begin(), pe.end(), p.begin());
    const double* pos_adj = position_adjoints.data() + size_t(traj) * size_t(d);
    for (int i = 0; i < d; ++i) qbar[size_t(i)] = pos_adj[i] + carry[size_t(i)];
    std::fill(pbar.begin(), pbar.end(), 0.0);

    for (int l = steps - 1; l >= 0; --l) {
      // p' = p_half + (s/2) f(q'):  pull pbar through the end-point force
      for (int i = 0; i < d; ++i) fbar[size_t(i)] = 0.5 * s[size_t(i)] * pbar[size_t(i)];
      force_with_products(q, fbar, f, hw, adj);
      for (int i = 0; i < d; ++i) qbar[size_t(i)] += hw[size_t(i)];
      // invert the step: recover p_half and the previous position
      for (int i = 0; i < d; ++i) phalf[size_t(i)] = p[size_t(i)] - 0.5 * s[size_t(i)] * f[size_t(i)];
      for (int i = 0; i < d; ++i) q[size_t(i)] -= s[size_t(i)] * phalf[size_t(i)];
      // q' = q + s p_half
      for (int i = 0; i < d; ++i) pbar[size_t(i)] += s[size_t(i)] * qbar[size_t(i)];
      // p_half = p + (s/2) f(q):  pull through the start-point force
      for (int i = 0; i < d; ++i) fbar[size_t(i)] = 0.5 * s[size_t(i)] * pbar[size_t(i)];
      force_with_products(q, fbar, f, hw, adj);
      for (int i = 0; i < d; ++i) qbar[size_t(i)] += hw[size_t(i)];
      for (int i = 0; i < d; ++i) p[size_t(i)] = phalf[size_t(i)] - 0.5 * s[size_t(i)] * f[size_t(i)];
    }

    // The reconstructed trajectory start must match the stored previous
    // position and the replayed momentum draw; silent drift corrupts
    // gradients.
    std::span<const double> q_prev =
        traj == 0 ? std::span<const double>(set.initial_position) : set.position(traj - 1);
    RandomKey draw = set.key_trace[size_t(traj)];
    draw.fill_normal(p0);
    double drift = 0.0;
    for (int i = 0; i < d; ++i) {
      drift = std::max(drift, std::abs(q[size_t(i)] - q_prev[size_t(i)]));
      drift = std::max(drift, std::abs(p[size_t(i)] - p0[size_t(i)]));
    }
    if (!(drift <= reconstruction_drift_bound)) throw ReconstructionError(traj, drift);

    // position adjoint crosses the trajectory boundary; the momentum one
    // stops here (momenta are freshly drawn, independent of everything)
    carry = qbar;
  }
  return adj;
}

std::vector<double> HmcSampler::eval_returns(std::span<const double> z) {
  CompiledFunction& rf = compiled_.returns_fn();
  rf.set_input(0, z);
  for (size_t i = 0; i < params_.size(); ++i) rf.set_input(1 + int(i), params_[i]);
  rf.forward();
  auto o = rf.output(0);
  return {o.begin(), o.end()};
}

double HmcSampler::eval_log_joint(std::span<const double> z) {
  bind_fixed_inputs();
  CompiledFunction& lj = compiled_.log_joint_fn();
  lj.set_input(0, z);
  lj.forward();
  return lj.output_scalar();
}

InferResult HmcSampler::infer(const HmcHyperparams& hyper, const RandomKey& key) {
  InferResult result;
  result.samples = sample(hyper, key);
  const int r = result.samples.retained();
  result.mean_returns.assign(size_t(return_dim()), 0.0);
  for (int i = hyper.skip; i < hyper.n_samples; ++i) {
    std::vector<double> ret = eval_returns(result.samples.position(i));
    for (size_t k = 0; k < ret.size(); ++k) result.mean_returns[k] += ret[k];
  }
  for (double& x : result.mean_returns) x /= double(r);
  return result;
}

HmcAdjoints HmcSampler::infer_backward(const InferResult& result,
                                       std::span<const double> mean_adjoint) {
  const SampleSet& set = result.samples;
  const int d = set.latent_dim;
  const int n = set.count();
  const int r = set.retained();
  if (mean_adjoint.size() != size_t(return_dim())) throw ShapeError("mean adjoint length");

  std::vector<double> cot(mean_adjoint.begin(), mean_adjoint.end());
  for (double& x : cot) x /= double(r);

  std::vector<double> pos_adj(size_t(n) * size_t(d), 0.0);
  std::vector<std::vector<double>> param_extra;
  for (const auto& p : params_) param_extra.emplace_back(p.size(), 0.0);

  CompiledFunction& rf = compiled_.returns_fn();
  for (size_t i = 0; i < params_.size(); ++i) rf.set_input(1 + int(i), params_[i]);
  for (int i = set.hyper.skip; i < n; ++i) {
    rf.set_input(0, set.position(i));
    rf.forward();
    rf.reverse(cot);
    auto gz = rf.input_adjoint(0);
    std::copy(gz.begin(), gz.end(), pos_adj.begin() + size_t(i) * size_t(d));
    for (size_t j = 0; j < params_.size(); ++j) {
      auto gp = rf.input_adjoint(1 + int(j));
      for (size_t k = 0; k < gp.size(); ++k) param_extra[j][k] += gp[k];
    }
  }

  HmcAdjoints adj = backward(set, pos_adj);
  for (size_t j = 0; j < params_.size(); ++j)
    for (size_t k = 0; k < param_extra[j].size(); ++k) adj.params[j][k] += param_extra[j][k];
  return adj;
}

SampleSet hmc_sample(const ModelDefinition& model, std::vector<ObservationSite> observations,
                     std::vector<std::vector<double>> params, const HmcHyperparams& hyper,
                     const RandomKey& key, std::vector<double> step_scale) {
  HmcSampler sampler(model, std::move(observations), std::move(params), std::move(step_scale));
  return sampler.sample(hyper, key);
}

std::vector<double> infer(const ModelDefinition& model, std::vector<ObservationSite> observations,
                          std::vector<std::vector<double>> params, const HmcHyperparams& hyper,
                          const RandomKey& key, std::vector<double> step_scale) {
  HmcSampler sampler(model, std::move(observations), std::move(params), std::move(step_scale));
  return sampler.infer(hyper, key).mean_returns;
}

}  // namespace dppl
