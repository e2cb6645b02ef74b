#pragma once

// Store-everything backward pass, used only as a test oracle against the
// production reversible (recompute-in-reverse) backward. It replays the
// chain forward, retaining every interior position, then runs the same
// per-step adjoint recursion from the stored states instead of
// reconstructing them with the inverse integrator.

#include <vector>

#include "dppl/hmc.hpp"

namespace dppl_test {

// Pulls position adjoints back to (observations, params) using stored states.
inline dppl::HmcAdjoints reference_backward(const dppl::ModelDefinition& model,
                                            const std::vector<dppl::ObservationSite>& observations,
                                            const std::vector<std::vector<double>>& params,
                                            const dppl::SampleSet& set,
                                            std::span<const double> position_adjoints) {
  using namespace dppl;
  CompiledModel cm(model);
  CompiledFunction& lj = cm.log_joint_fn();
  const int d = set.latent_dim;
  const int n = set.count();
  const int steps = set.hyper.leapfrog_steps;
  const std::vector<double>& s = set.step;

  for (size_t i = 0; i < observations.size(); ++i) lj.set_input(1 + int(i), observations[i].values);
  for (size_t i = 0; i < params.size(); ++i)
    lj.set_input(1 + int(observations.size()) + int(i), params[i]);
  for (size_t i = 0; i < observations.size(); ++i)
    lj.set_dual_input(1 + int(i), observations[i].values);
  for (size_t i = 0; i < params.size(); ++i)
    lj.set_dual_input(1 + int(observations.size()) + int(i), params[i]);

  auto force = [&](std::span<const double> q, std::span<double> f) {
    lj.set_input(0, q);
    lj.forward(false);
    lj.reverse_scalar();
    auto g = lj.input_adjoint(0);
    std::copy(g.begin(), g.end(), f.begin());
  };

  // forward replay, storing every interior position: (steps+1) per trajectory
  std::vector<std::vector<std::vector<double>>> stored(size_t(n),
                                                       std::vector<std::vector<double>>{});
  {
    std::vector<double> q = set.initial_position;
    std::vector<double> p(size_t(d), 0.0), f(size_t(d), 0.0);
    force(q, f);
    for (int traj = 0; traj < n; ++traj) {
      RandomKey draw = set.key_trace[size_t(traj)];
      draw.fill_normal(p);
      stored[size_t(traj)].push_back(q);
      for (int l = 0; l < steps; ++l) {
        for (int i = 0; i < d; ++i) p[size_t(i)] += 0.5 * s[size_t(i)] * f[size_t(i)];
        for (int i = 0; i < d; ++i) q[size_t(i)] += s[size_t(i)] * p[size_t(i)];
        force(q, f);
        for (int i = 0; i < d; ++i) p[size_t(i)] += 0.5 * s[size_t(i)] * f[size_t(i)];
        stored[size_t(traj)].push_back(q);
      }
    }
  }

  // adjoint accumulators
  HmcAdjoints adj;
  for (const auto& o : observations) adj.observations.emplace_back(o.values.size(), 0.0);
  for (const auto& p : params) adj.params.emplace_back(p.size(), 0.0);

  // the second-order sweep: gradient tangents along a seed on z
  auto pull = [&](std::span<const double> q, std::span<const double> seed,
                  std::span<double> hzz_seed) {
    lj.set_dual_input(0, q, seed);
    lj.forward_dual(false);
    lj.reverse_dual_scalar();
    auto gz = lj.input_adjoint_dual(0);
    for (int i = 0; i < d; ++i) hzz_seed[size_t(i)] = gz[size_t(i)].t;
    for (size_t j = 0; j < observations.size(); ++j) {
      auto go = lj.input_adjoint_dual(1 + int(j));
      for (size_t k = 0; k < go.size(); ++k) adj.observations[j][k] += go[k].t;
    }
    for (size_t j = 0; j < params.size(); ++j) {
      auto gp = lj.input_adjoint_dual(1 + int(observations.size()) + int(j));
      for (size_t k = 0; k < gp.size(); ++k) adj.params[j][k] += gp[k].t;
    }
  };

  std::vector<double> qbar(size_t(d), 0.0), pbar(size_t(d), 0.0);
  std::vector<double> fbar(size_t(d), 0.0), hw(size_t(d), 0.0), carry(size_t(d), 0.0);
  for (int traj = n - 1; traj >= 0; --traj) {
    const double* pos_adj = position_adjoints.data() + size_t(traj) * size_t(d);
    for (int i = 0; i < d; ++i) qbar[size_t(i)] = pos_adj[i] + carry[size_t(i)];
    std::fill(pbar.begin(), pbar.end(), 0.0);
    for (int l = steps - 1; l >= 0; --l) {
      const auto& q_end = stored[size_t(traj)][size_t(l + 1)];
      const auto& q_start = stored[size_t(traj)][size_t(l)];
      for (int i = 0; i < d; ++i) fbar[size_t(i)] = 0.5 * s[size_t(i)] * pbar[size_t(i)];
      pull(q_end, fbar, hw);
      for (int i = 0; i < d; ++i) qbar[size_t(i)] += hw[size_t(i)];
      for (int i = 0; i < d; ++i) pbar[size_t(i)] += s[size_t(i)] * qbar[size_t(i)];
      for (int i = 0; i < d; ++i) fbar[size_t(i)] = 0.5 * s[size_t(i)] * pbar[size_t(i)];
      pull(q_start, fbar, hw);
      for (int i = 0; i < d; ++i) qbar[size_t(i)] += hw[size_t(i)];
    }
    carry = qbar;
  }
  return adj;
}

}  // namespace dppl_test
