#include "dppl/models/color.hpp"

namespace dppl::models {

namespace {

// fitted by tools/make_planck_table.cpp (degree 12 Chebyshev in
// normalized mired); see data/planck_locus.csv
constexpr double kMiredLo = 83.33333333, kMiredHi = 1000;
// max |fit - table| on [2000K,10000K]: 2.20e-06 (at 2200K)
constexpr double kRed[] = {
    +2.58772111810621031e+00,
    +1.85767655936460518e+00,
    +1.13133918260470531e-03,
    -4.56537306857537906e-02,
    +1.07965486643187523e-02,
    -3.09449211799056557e-03,
    +1.10859937049461398e-03,
    -3.21723617436754877e-04,
    +3.81453478781436719e-05,
    +3.04223376239443163e-05,
    -3.52665717322134633e-05,
    +1.64415680621977151e-05,
    -1.14211253842678212e-05};
// max |fit - table| on [2000K,10000K]: 9.81e-07 (at 4350K)
constexpr double kGreen[] = {
    +5.39656732318922416e-01,
    -4.85797574022917733e-01,
    -3.67772985277810410e-02,
    +2.71489009169609240e-02,
    -6.65260969528267895e-03,
    +1.28093669147270168e-03,
    -1.04047226209213553e-04,
    -1.09031454487622009e-04,
    +1.01547330877290148e-04,
    -6.08952829015283877e-05,
    +2.92024149166108645e-05,
    -1.15256534563025443e-05,
    +2.85494158616670694e-06};
// max |fit - table| on [2000K,10000K]: 2.19e-03 (at 2200K)
constexpr double kBlue[] = {
    +3.53481849009982974e-01,
    -6.04142524843160333e-01,
    +3.71186263467868538e-01,
    -1.47092158299822695e-01,
    +2.77915565934322775e-02,
    +1.52638389017388108e-03,
    +1.70790624553709557e-03,
    -3.87072960071385480e-04,
    -3.72898183412389075e-03,
    +1.63115076726035231e-03,
    +9.18689404042748138e-04,
    -1.34273513020053271e-03,
    -1.55794096385027353e-03};

Value cheb_series(std::span<const double> coef, const Value& w) {
  Value tkm1(1.0), tk = w;
  Value acc = coef[0] + coef[1] * w;
  for (size_t k = 2; k < coef.size(); ++k) {
    Value tkp1 = 2.0 * (w * tk) - tkm1;
    acc = acc + coef[k] * tkp1;
    tkm1 = tk;
    tk = tkp1;
  }
  return acc;
}

}  // namespace

Value planck_to_rgb(const Value& temp) {
  Value mired = 1e6 / temp;
  Value w = (mired - kMiredLo) * (2.0 / (kMiredHi - kMiredLo)) - 1.0;
  Value rgb = concat(concat(cheb_series(kRed, w), cheb_series(kGreen, w)), cheb_series(kBlue, w));
  // the fit may dip a hair below zero inside the clamped low-temperature
  // region; lights must stay nonnegative
  return smooth_relu(rgb);
}

std::array<double, 3> planck_to_rgb(double temp) {
  if (temp < 1000.0 || temp > 12000.0)
    throw Error("temperature " + std::to_string(temp) + "K outside the fitted range [1000, 12000]");
  Value rgb = planck_to_rgb(Value(temp));
  return {rgb[0], rgb[1], rgb[2]};
}

}  // namespace dppl::models
