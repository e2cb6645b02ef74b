#pragma once

#include "dppl/random.hpp"
#include "dppl/value.hpp"

namespace dppl {

enum class DistKind { Normal, Uniform };

// Prior distribution of a latent site. Parameters are fixed constants:
// Normal(mean, stddev) or Uniform(low, high), applied elementwise over the
// site's shape.
struct DistributionSpec {
  DistKind kind;
  double p0 = 0.0;  // mean / low
  double p1 = 1.0;  // stddev / high
};

inline DistributionSpec normal_dist(double mean, double stddev) {
  if (!(stddev > 0)) throw Error("Normal requires stddev > 0");
  return {DistKind::Normal, mean, stddev};
}

inline DistributionSpec uniform_dist(double low, double high) {
  if (!(low < high)) throw Error("Uniform requires low < high");
  return {DistKind::Uniform, low, high};
}

// Log density of x under the distribution, summed over elements. Uniform is
// only ever evaluated inside its support (the sigmoid transform below makes
// leaving it impossible).
Value log_prob(const DistributionSpec& dist, const Value& x);

// Gaussian log density with value-typed mean (the observation likelihood,
// where the mean is a model prediction). Summed over elements.
Value normal_log_prob(const Value& x, const Value& mean, double stddev);

struct ConstrainResult {
  Value constrained;
  Value log_det_jacobian;  // scalar
};

// Maps an unconstrained vector z to the distribution's support.
//   Normal:        identity, log-det 0.
//   Uniform(a,b):  x = a + (b-a)*sigmoid(z),
//                  log-det = sum[ log(b-a) + log sigmoid(z) + log sigmoid(-z) ].
ConstrainResult to_constrained(const DistributionSpec& dist, const Value& z);

// Inverse of to_constrained on concrete data (logit for Uniform).
double to_unconstrained(const DistributionSpec& dist, double x);

// One constrained-space draw per element, written to `out`.
void sample_constrained(const DistributionSpec& dist, RandomKey& key, std::span<double> out);

}  // namespace dppl
