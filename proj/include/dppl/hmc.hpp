#pragma once

#include "dppl/model.hpp"

namespace dppl {

// Sampler controls: N samples, L leapfrog steps per trajectory, step size
// eps, and the number of leading samples to discard as burn-in.
struct HmcHyperparams {
  int n_samples = 1000;
  int leapfrog_steps = 300;
  double step_size = 0.01;
  int skip = 100;
};

void validate(const HmcHyperparams& h);

// Chain initialization policy. The default is a single draw from the prior.
// Needle-shaped posteriors (tight observation noise) can strand a chain in
// a locally stable but poorly scoring basin, since without an accept/reject
// step nothing ever backtracks; probing a few prior draws with short chains
// and keeping the best-scoring end state makes burn-in robust while every
// start is still a prior sample.
struct ChainInit {
  int candidates = 1;      // prior draws to probe
  int probe_samples = 0;   // trajectories per probe chain (0 = score the draw itself)
};

// Chain output. Per trajectory only the end position, end momentum and the
// momentum key are retained; every interior state is recomputed by the
// backward pass, so storage is O(N * latent_dim) independent of L.
struct SampleSet {
  int latent_dim = 0;
  HmcHyperparams hyper;
  std::vector<double> step;  // per-dimension leapfrog step (eps * scale)
  std::vector<double> initial_position;
  std::vector<double> positions;    // n_samples x latent_dim, row-major
  std::vector<double> end_momenta;  // n_samples x latent_dim
  std::vector<RandomKey> key_trace;

  int count() const { return hyper.n_samples; }
  int retained() const { return hyper.n_samples - hyper.skip; }
  std::span<const double> position(int i) const {
    return {positions.data() + size_t(i) * size_t(latent_dim), size_t(latent_dim)};
  }
  std::span<const double> end_momentum(int i) const {
    return {end_momenta.data() + size_t(i) * size_t(latent_dim), size_t(latent_dim)};
  }
};

// Gradients of some scalar with respect to the observed values and external
// parameters, one vector per site / parameter.
struct HmcAdjoints {
  std::vector<std::vector<double>> observations;
  std::vector<std::vector<double>> params;
};

struct InferResult {
  SampleSet samples;
  std::vector<double> mean_returns;  // constrained, averaged over retained samples
};

// One leapfrog step of the simulated dynamics, in place:
//   p += (eps/2) f(q);  q += eps p;  p += (eps/2) f(q).
using ForceFn = std::function<void(std::span<const double> q, std::span<double> f_out)>;
void leapfrog_step(std::span<double> q, std::span<double> p, double eps, const ForceFn& force);

// Exact algebraic inverse of leapfrog_step.
void inverse_leapfrog_step(std::span<double> q, std::span<double> p, double eps,
                           const ForceFn& force);

// Hamiltonian Monte Carlo without the accept/reject correction, which makes
// every sample a smooth function of the observations and parameters. One
// persistent chain: each trajectory starts at the previous end position with
// a freshly drawn standard-normal momentum; the chain itself starts at a
// prior draw.
//
// backward() recovers gradients by sweeping trajectories last to first and
// reconstructing interior states with the inverse integrator, so its memory
// use does not grow with trajectory length. Instances own replay workspaces:
// one instance per thread.
class HmcSampler {
public:
  HmcSampler(const ModelDefinition& model, std::vector<ObservationSite> observations,
             std::vector<std::vector<double>> params = {}, std::vector<double> step_scale = {},
             ChainInit init = {});
  HmcSampler(const HmcSampler&) = delete;
  HmcSampler& operator=(const HmcSampler&) = delete;

  int latent_dim() const { return compiled_.latent_dim(); }
  int return_dim() const { return compiled_.return_dim(); }
  const CompiledModel& compiled() const { return compiled_; }
  const std::vector<ObservationSite>& observations() const { return observations_; }

  // Swaps in new observed values (same shapes); used when the observation is
  // itself an optimized quantity.
  void set_observation_values(int i, std::span<const double> values);
  void set_param_values(int i, std::span<const double> values);

  SampleSet sample(const HmcHyperparams& hyper, const RandomKey& key);

  // Pulls one adjoint per position (n_samples x latent_dim, zeros for
  // skipped samples) back to the observations and parameters.
  HmcAdjoints backward(const SampleSet& set, std::span<const double> position_adjoints);

  InferResult infer(const HmcHyperparams& hyper, const RandomKey& key);
  HmcAdjoints infer_backward(const InferResult& result, std::span<const double> mean_adjoint);

  // Constrained returned quantities at one latent point.
  std::vector<double> eval_returns(std::span<const double> z);

  // Unnormalized log joint at one latent point under the bound observations.
  double eval_log_joint(std::span<const double> z);

  // Backward reconstruction aborts when the recomputed trajectory start
  // drifts from the stored one by more than this (max-norm).
  double reconstruction_drift_bound = 1e-3;

private:
  void bind_fixed_inputs();
  void bind_fixed_inputs_dual();
  // force = d log_joint / dz; also accumulates, given a tangent seed w on z,
  // the products (d2 logjoint / dz dz) w and (d2 logjoint / d{obs,par} dz) w.
  void force(std::span<const double> q, std::span<double> f_out);
  void force_with_products(std::span<const double> q, std::span<const double> w,
                           std::span<double> f_out, std::span<double> hzz_w, HmcAdjoints& mixed);

  // Runs `count` trajectories from q (and its force f) in place.
  void run_trajectories(std::span<double> q, std::span<double> p, std::span<double> f,
                        std::span<const double> s, int count, int steps, const RandomKey& key,
                        std::uint64_t first_stream, SampleSet* record);
  std::vector<double> choose_initial_position(const HmcHyperparams& hyper,
                                              std::span<const double> s, const RandomKey& key);

  ModelDefinition model_;
  CompiledModel compiled_;
  std::vector<ObservationSite> observations_;
  std::vector<std::vector<double>> params_;
  std::vector<double> step_scale_;
  ChainInit init_;
  bool dual_bound_ = false;
};

// One-call conveniences; they compile the model per call.
SampleSet hmc_sample(const ModelDefinition& model, std::vector<ObservationSite> observations,
                     std::vector<std::vector<double>> params, const HmcHyperparams& hyper,
                     const RandomKey& key, std::vector<double> step_scale = {});

// Mean of the constrained returned quantities over retained samples.
std::vector<double> infer(const ModelDefinition& model, std::vector<ObservationSite> observations,
                          std::vector<std::vector<double>> params, const HmcHyperparams& hyper,
                          const RandomKey& key, std::vector<double> step_scale = {});

}  // namespace dppl
