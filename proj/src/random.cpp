#include "dppl/random.hpp"

#include <cmath>

namespace dppl {

double RandomKey::normal() {
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

void RandomKey::fill_normal(std::span<double> out) {
  for (double& x : out) x = normal();
}

}  // namespace dppl
