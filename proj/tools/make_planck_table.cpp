// Generates the black-body light table and the smooth fit used by
// planck_to_rgb:
//
//   * integrates Planck spectral radiance against the CIE 1931 2-degree
//     color matching functions over 380-780nm,
//   * normalizes each temperature to unit luminance, converts to linear
//     sRGB, clamps out-of-gamut negatives, and scales globally so the
//     largest channel at 6500K equals one,
//   * writes data/planck_locus.csv (temperature_K, r, g, b), and
//   * fits each channel's logarithm with a Chebyshev series in normalized
//     mired (1e6/T), printing the coefficients pasted into
//     src/models/planck.cpp.
//
// Usage: make_planck_table <out_csv>

#include <array>
#include <cmath>
#include <cstdio>
#include <vector>

namespace {

// CIE 1931 2-degree standard observer, 380-780nm at 10nm steps.
struct CmfRow {
  double lambda, x, y, z;
};
const CmfRow kCmf[] = {
    {380, 0.001368, 0.000039, 0.006450}, {390, 0.004243, 0.000120, 0.020050},
    {400, 0.014310, 0.000396, 0.067850}, {410, 0.043510, 0.001210, 0.207400},
    {420, 0.134380, 0.004000, 0.645600}, {430, 0.283900, 0.011600, 1.385600},
    {440, 0.348280, 0.023000, 1.747060}, {450, 0.336200, 0.038000, 1.772110},
    {460, 0.290800, 0.060000, 1.669200}, {470, 0.195360, 0.090980, 1.287640},
    {480, 0.095640, 0.139020, 0.812950}, {490, 0.032010, 0.208020, 0.465180},
    {500, 0.004900, 0.323000, 0.272000}, {510, 0.009300, 0.503000, 0.158200},
    {520, 0.063270, 0.710000, 0.078250}, {530, 0.165500, 0.862000, 0.042160},
    {540, 0.290400, 0.954000, 0.020300}, {550, 0.433450, 0.994950, 0.008750},
    {560, 0.594500, 0.995000, 0.003900}, {570, 0.762100, 0.952000, 0.002100},
    {580, 0.916300, 0.870000, 0.001650}, {590, 1.026300, 0.757000, 0.001100},
    {600, 1.062200, 0.631000, 0.000800}, {610, 1.002600, 0.503000, 0.000340},
    {620, 0.854450, 0.381000, 0.000190}, {630, 0.642400, 0.265000, 0.000050},
    {640, 0.447900, 0.175000, 0.000020}, {650, 0.283500, 0.107000, 0.000000},
    {660, 0.164900, 0.061000, 0.000000}, {670, 0.087400, 0.032000, 0.000000},
    {680, 0.046770, 0.017000, 0.000000}, {690, 0.022700, 0.008210, 0.000000},
    {700, 0.011359, 0.004102, 0.000000}, {710, 0.005790, 0.002091, 0.000000},
    {720, 0.002899, 0.001047, 0.000000}, {730, 0.001440, 0.000520, 0.000000},
    {740, 0.000690, 0.000249, 0.000000}, {750, 0.000332, 0.000120, 0.000000},
    {760, 0.000166, 0.000060, 0.000000}, {770, 0.000083, 0.000030, 0.000000},
    {780, 0.000042, 0.000015, 0.000000},
};

constexpr double kC2 = 1.4388e-2;  // second radiation constant, m*K

// Planck spectral radiance up to a temperature-independent factor.
double planck(double lambda_nm, double temp_k) {
  double lm = lambda_nm * 1e-9;
  return 1.0 / (std::pow(lm, 5.0) * (std::exp(kC2 / (lm * temp_k)) - 1.0));
}

std::array<double, 3> linear_srgb_of_temp(double temp_k) {
  double X = 0, Y = 0, Z = 0;
  for (const auto& row : kCmf) {
    double b = planck(row.lambda, temp_k);
    X += b * row.x;
    Y += b * row.y;
    Z += b * row.z;
  }
  X /= Y;
  Z /= Y;
  Y = 1.0;
  double r = 3.2406 * X - 1.5372 * Y - 0.4986 * Z;
  double g = -0.9689 * X + 1.8758 * Y + 0.0415 * Z;
  double b = 0.0557 * X - 0.2040 * Y + 1.0570 * Z;
  return {std::max(r, 0.0), std::max(g, 0.0), std::max(b, 0.0)};
}

constexpr double kTempLo = 1000.0, kTempHi = 12000.0;
constexpr double kMiredLo = 1e6 / kTempHi, kMiredHi = 1e6 / kTempLo;

double mired_coord(double temp_k) {
  double m = 1e6 / temp_k;
  return 2.0 * (m - kMiredLo) / (kMiredHi - kMiredLo) - 1.0;
}

double cheb_eval(const std::vector<double>& c, double w) {
  double tkm1 = 1.0, tk = w, acc = c[0] + (c.size() > 1 ? c[1] * w : 0.0);
  for (size_t k = 2; k < c.size(); ++k) {
    double tkp1 = 2.0 * w * tk - tkm1;
    acc += c[k] * tkp1;
    tkm1 = tk;
    tk = tkp1;
  }
  return acc;
}

// least squares in the Chebyshev basis via normal equations
std::vector<double> cheb_fit(const std::vector<double>& ws, const std::vector<double>& ys,
                             int degree) {
  const int m = degree + 1;
  std::vector<std::vector<long double>> A(m, std::vector<long double>(m, 0.0L));
  std::vector<long double> rhs(m, 0.0L);
  std::vector<double> basis(m);
  for (size_t s = 0; s < ws.size(); ++s) {
    double w = ws[s];
    basis[0] = 1.0;
    if (m > 1) basis[1] = w;
    for (int k = 2; k < m; ++k) basis[k] = 2.0 * w * basis[k - 1] - basis[k - 2];
    for (int i = 0; i < m; ++i) {
      rhs[i] += basis[i] * ys[s];
      for (int j = 0; j <= i; ++j) A[i][j] += (long double)basis[i] * basis[j];
    }
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) A[i][j] = A[j][i];
  // Gaussian elimination with partial pivoting
  for (int k = 0; k < m; ++k) {
    int piv = k;
    for (int r = k + 1; r < m; ++r)
      if (fabsl(A[r][k]) > fabsl(A[piv][k])) piv = r;
    std::swap(A[k], A[piv]);
    std::swap(rhs[k], rhs[piv]);
    for (int r = k + 1; r < m; ++r) {
      long double f = A[r][k] / A[k][k];
      for (int c = k; c < m; ++c) A[r][c] -= f * A[k][c];
      rhs[r] -= f * rhs[k];
    }
  }
  std::vector<double> coef(m);
  for (int i = m - 1; i >= 0; --i) {
    long double acc = rhs[i];
    for (int j = i + 1; j < m; ++j) acc -= A[i][j] * coef[j];
    coef[i] = double(acc / A[i][i]);
  }
  return coef;
}

}  // namespace

int main(int argc, char** argv) {
  const char* out_csv = argc > 1 ? argv[1] : "planck_locus.csv";

  // global scale: largest channel at 6500K becomes 1
  auto ref = linear_srgb_of_temp(6500.0);
  double scale = 1.0 / std::max(ref[0], std::max(ref[1], ref[2]));

  std::vector<double> temps, ws;
  std::vector<std::array<double, 3>> rgbs;
  for (double t = kTempLo; t <= kTempHi + 1e-9; t += 50.0) {
    auto rgb = linear_srgb_of_temp(t);
    for (double& c : rgb) c *= scale;
    temps.push_back(t);
    ws.push_back(mired_coord(t));
    rgbs.push_back(rgb);
  }

  FILE* csv = std::fopen(out_csv, "w");
  if (!csv) {
    std::perror("fopen");
    return 1;
  }
  std::fprintf(csv, "temperature_K,r,g,b\n");
  for (size_t i = 0; i < temps.size(); ++i) {
    if (std::fmod(temps[i], 100.0) != 0.0) continue;
    std::fprintf(csv, "%.0f,%.8f,%.8f,%.8f\n", temps[i], rgbs[i][0], rgbs[i][1], rgbs[i][2]);
  }
  std::fclose(csv);

  // fit each channel; report the worst error on [2000K, 10000K]
  const int degree = 12;
  std::printf("// fitted by tools/make_planck_table.cpp (degree %d Chebyshev in\n", degree);
  std::printf("// normalized mired); see data/planck_locus.csv\n");
  std::printf("constexpr double kMiredLo = %.10g, kMiredHi = %.10g;\n", kMiredLo, kMiredHi);
  const char* names[3] = {"kRed", "kGreen", "kBlue"};
  for (int c = 0; c < 3; ++c) {
    std::vector<double> ys;
    for (const auto& rgb : rgbs) ys.push_back(rgb[size_t(c)]);
    auto coef = cheb_fit(ws, ys, degree);
    double worst = 0, worst_t = 0;
    for (size_t i = 0; i < temps.size(); ++i) {
      if (temps[i] < 2000.0 || temps[i] > 10000.0) continue;
      double got = cheb_eval(coef, ws[i]);
      double err = std::abs(got - rgbs[i][size_t(c)]);
      if (err > worst) {
        worst = err;
        worst_t = temps[i];
      }
    }
    std::printf("// max |fit - table| on [2000K,10000K]: %.2e (at %.0fK)\n", worst, worst_t);
    std::printf("constexpr double %s[] = {", names[c]);
    for (size_t k = 0; k < coef.size(); ++k)
      std::printf("%s\n    %+.17e", k ? "," : "", coef[k]);
    std::printf("};\n");
  }
  return 0;
}
