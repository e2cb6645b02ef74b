#include "dppl/autodiff.hpp"

namespace dppl {

namespace {

CompiledFunction trace_unary(const UnaryFn& f, const Value& x) {
  return CompiledFunction::trace({x.shape()},
                                 [&](std::span<Value> in) { return std::vector<Value>{f(in[0])}; });
}

void require_scalar(const CompiledFunction& cf, const char* what) {
  if (cf.output_shape(0).size() != 1)
    throw ShapeError(std::string(what) + " requires a scalar-valued function, got output shape " +
                     cf.output_shape(0).str());
}

}  // namespace

GradResult value_and_grad(const UnaryFn& f, const Value& x) {
  CompiledFunction cf = trace_unary(f, x);
  require_scalar(cf, "grad");
  cf.set_input(0, x.data());
  cf.forward();
  double v = cf.output_scalar();
  cf.reverse_scalar();
  auto g = cf.input_adjoint(0);
  for (double gi : g)
    if (!std::isfinite(gi)) throw NonFiniteError("gradient");
  return {v, Value(std::vector<double>(g.begin(), g.end()), x.shape())};
}

Value grad(const UnaryFn& f, const Value& x) { return value_and_grad(f, x).gradient; }

Value vjp(const UnaryFn& f, const Value& x, const Value& cotangent) {
  CompiledFunction cf = trace_unary(f, x);
  if (cotangent.shape() != cf.output_shape(0))
    throw ShapeError("vjp: cotangent shape " + cotangent.shape().str() + " does not match output " +
                     cf.output_shape(0).str());
  cf.set_input(0, x.data());
  cf.forward();
  cf.reverse(cotangent.data());
  auto g = cf.input_adjoint(0);
  return Value(std::vector<double>(g.begin(), g.end()), x.shape());
}

Value jvp(const UnaryFn& f, const Value& x, const Value& tangent) {
  if (tangent.shape() != x.shape())
    throw ShapeError("jvp: tangent shape " + tangent.shape().str() + " does not match input " +
                     x.shape().str());
  CompiledFunction cf = trace_unary(f, x);
  cf.set_dual_input(0, x.data(), tangent.data());
  cf.forward_dual();
  auto o = cf.output_dual();
  std::vector<double> t(o.size());
  for (size_t k = 0; k < o.size(); ++k) t[k] = o[k].t;
  return Value(std::move(t), cf.output_shape(0));
}

Value hvp(const UnaryFn& f, const Value& x, const Value& v) {
  if (v.shape() != x.shape())
    throw ShapeError("hvp: vector shape " + v.shape().str() + " does not match input " +
                     x.shape().str());
  CompiledFunction cf = trace_unary(f, x);
  require_scalar(cf, "hvp");
  cf.set_dual_input(0, x.data(), v.data());
  cf.forward_dual();
  cf.reverse_dual_scalar();
  auto g = cf.input_adjoint_dual(0);
  std::vector<double> h(g.size());
  for (size_t k = 0; k < g.size(); ++k) {
    if (!is_finite(g[k])) throw NonFiniteError("hessian-vector product");
    h[k] = g[k].t;
  }
  return Value(std::move(h), x.shape());
}

}  // namespace dppl
