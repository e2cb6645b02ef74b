#pragma once

#include "dppl/compiled.hpp"

namespace dppl {

using UnaryFn = std::function<Value(const Value&)>;

struct GradResult {
  double value;    // f(x)
  Value gradient;  // same shape as x
};

// Reverse-mode gradient of a scalar-valued function. The function value is
// returned alongside the gradient from the same evaluation.
GradResult value_and_grad(const UnaryFn& f, const Value& x);
Value grad(const UnaryFn& f, const Value& x);

// cotangent' * J_f(x)
Value vjp(const UnaryFn& f, const Value& x, const Value& cotangent);

// J_f(x) * tangent
Value jvp(const UnaryFn& f, const Value& x, const Value& tangent);

// Hessian-vector product H_f(x) * v, computed as the jvp of grad(f): one
// forward-over-reverse evaluation, never a materialized Hessian.
Value hvp(const UnaryFn& f, const Value& x, const Value& v);

}  // namespace dppl
