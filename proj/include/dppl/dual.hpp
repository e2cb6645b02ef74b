#pragma once

#include <cmath>

namespace dppl {

using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;
using std::tanh;

// First-order dual number: carrier for the single level of forward-mode
// nesting. Evaluating a recorded computation (and its reverse sweep) in Dual
// arithmetic yields Jacobian-vector products of whatever the sweep computes.
struct Dual {
  double v = 0.0;  // primal
  double t = 0.0;  // tangent

  Dual() = default;
  Dual(double value) : v(value) {}
  Dual(double value, double tangent) : v(value), t(tangent) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    t += o.t;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    t -= o.t;
    return *this;
  }
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.t + b.t}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.t - b.t}; }
inline Dual operator-(Dual a) { return {-a.v, -a.t}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.t * b.v + a.v * b.t}; }
inline Dual operator/(Dual a, Dual b) {
  double inv = 1.0 / b.v;
  double q = a.v * inv;
  return {q, (a.t - q * b.t) * inv};
}

inline Dual operator*(Dual a, double s) { return {a.v * s, a.t * s}; }
inline Dual operator*(double s, Dual a) { return {a.v * s, a.t * s}; }
inline Dual operator/(Dual a, double s) { return {a.v / s, a.t / s}; }
inline Dual operator/(double s, Dual a) {
  double inv = 1.0 / a.v;
  double q = s * inv;
  return {q, -q * a.t * inv};
}
inline Dual operator+(Dual a, double s) { return {a.v + s, a.t}; }
inline Dual operator-(Dual a, double s) { return {a.v - s, a.t}; }

inline Dual exp(Dual a) {
  double e = std::exp(a.v);
  return {e, e * a.t};
}
inline Dual log(Dual a) { return {std::log(a.v), a.t / a.v}; }
inline Dual sqrt(Dual a) {
  double r = std::sqrt(a.v);
  return {r, 0.5 * a.t / r};
}
inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.t}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.t}; }
inline Dual tanh(Dual a) {
  double th = std::tanh(a.v);
  return {th, (1.0 - th * th) * a.t};
}
inline Dual pow(Dual a, double c) {
  double p = std::pow(a.v, c);
  return {p, c * std::pow(a.v, c - 1.0) * a.t};
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}
inline Dual sigmoid(Dual a) {
  double s = sigmoid(a.v);
  return {s, s * (1.0 - s) * a.t};
}

// log(sigmoid(x)), evaluated without overflow for large |x|.
inline double log_sigmoid(double x) {
  return x < 0.0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x));
}
inline Dual log_sigmoid(Dual a) { return {log_sigmoid(a.v), sigmoid(-a.v) * a.t}; }

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(Dual a) { return std::isfinite(a.v) && std::isfinite(a.t); }

inline double primal(double x) { return x; }
inline double primal(Dual a) { return a.v; }

}  // namespace dppl
