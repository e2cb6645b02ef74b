#include "dppl/distributions.hpp"

#include <cmath>

namespace dppl {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))
}

Value log_prob(const DistributionSpec& dist, const Value& x) {
  const double n = double(x.size());
  switch (dist.kind) {
    case DistKind::Normal: {
      Value r = x - dist.p0;
      return sum(r * r) * (-0.5 / (dist.p1 * dist.p1)) - n * (std::log(dist.p1) + kLogSqrt2Pi);
    }
    case DistKind::Uniform:
      if (!x.symbolic()) {
        for (double xi : x.data())
          if (xi < dist.p0 || xi > dist.p1) throw Error("value outside Uniform support");
      }
      return Value(-n * std::log(dist.p1 - dist.p0));
  }
  throw Error("bad distribution kind");
}

Value normal_log_prob(const Value& x, const Value& mean, double stddev) {
  const double n = double(x.size());
  Value r = x - mean;
  return sum(r * r) * (-0.5 / (stddev * stddev)) - n * (std::log(stddev) + kLogSqrt2Pi);
}

ConstrainResult to_constrained(const DistributionSpec& dist, const Value& z) {
  switch (dist.kind) {
    case DistKind::Normal:
      return {z, Value(0.0)};
    case DistKind::Uniform: {
      const double width = dist.p1 - dist.p0;
      Value x = dist.p0 + width * sigmoid(z);
      Value log_det = sum(log_sigmoid(z)) + sum(log_sigmoid(-z)) + double(z.size()) * std::log(width);
      return {x, log_det};
    }
  }
  throw Error("bad distribution kind");
}

double to_unconstrained(const DistributionSpec& dist, double x) {
  switch (dist.kind) {
    case DistKind::Normal:
      return x;
    case DistKind::Uniform: {
      double u = (x - dist.p0) / (dist.p1 - dist.p0);
      if (!(u > 0.0 && u < 1.0)) throw Error("value outside Uniform support");
      return std::log(u) - std::log1p(-u);
    }
  }
  throw Error("bad distribution kind");
}

void sample_constrained(const DistributionSpec& dist, RandomKey& key, std::span<double> out) {
  switch (dist.kind) {
    case DistKind::Normal:
      for (double& x : out) x = key.normal(dist.p0, dist.p1);
      return;
    case DistKind::Uniform:
      for (double& x : out) x = key.uniform(dist.p0, dist.p1);
      return;
  }
  throw Error("bad distribution kind");
}

}  // namespace dppl
