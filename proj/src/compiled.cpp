#include "dppl/compiled.hpp"

#include <algorithm>
#include <cmath>

namespace dppl {

CompiledFunction CompiledFunction::trace(std::vector<Shape> input_shapes, const TraceFn& f) {
  CompiledFunction cf;
  cf.input_shapes_ = std::move(input_shapes);
  {
    RecordGuard guard(&cf.tape_);
    std::vector<Value> inputs;
    inputs.reserve(cf.input_shapes_.size());
    for (const Shape& s : cf.input_shapes_) {
      Value v = make_leaf(s);
      cf.input_ids_.push_back(v.node());
      inputs.push_back(v);
    }
    std::vector<Value> outputs = f(inputs);
    if (outputs.empty()) throw Error("traced function produced no outputs");
    for (Value& o : outputs) {
      int id = o.symbolic() ? o.node() : cf.tape_.add_const(o.data());
      if (o.symbolic() && o.tape() != &cf.tape_)
        throw Error("traced output belongs to a different computation record");
      cf.output_ids_.push_back(id);
      cf.output_shapes_.push_back(o.shape());
    }
  }
  cf.vals_.assign(size_t(cf.tape_.total_elems()), 0.0);
  cf.adj_.assign(size_t(cf.tape_.total_elems()), 0.0);
  cf.tape_.write_consts<double>(cf.vals_);
  return cf;
}

std::span<double> CompiledFunction::node_span(std::vector<double>& buf, int id) {
  const Tape::Node& n = tape_.node(id);
  return {buf.data() + n.ofs, size_t(n.n)};
}

std::span<Dual> CompiledFunction::node_span_dual(std::vector<Dual>& buf, int id) {
  const Tape::Node& n = tape_.node(id);
  return {buf.data() + n.ofs, size_t(n.n)};
}

void CompiledFunction::set_input(int i, std::span<const double> x) {
  auto dst = node_span(vals_, input_ids_[size_t(i)]);
  if (x.size() != dst.size())
    throw ShapeError("input " + std::to_string(i) + ": got " + std::to_string(x.size()) +
                     " elements, expected " + std::to_string(dst.size()));
  std::copy(x.begin(), x.end(), dst.begin());
}

void CompiledFunction::forward(bool check_outputs) {
  tape_.forward<double>(vals_);
  if (!check_outputs) return;
  for (int j = 0; j < num_outputs(); ++j)
    for (double x : output(j))
      if (!std::isfinite(x)) {
        tape_.forward<double, true>(vals_);  // locate and name the culprit
        throw NonFiniteError("output");
      }
}

std::span<const double> CompiledFunction::output(int j) const {
  const Tape::Node& n = tape_.node(output_ids_[size_t(j)]);
  return {vals_.data() + n.ofs, size_t(n.n)};
}

double CompiledFunction::output_scalar(int j) const {
  auto o = output(j);
  if (o.size() != 1) throw ShapeError("output_scalar on non-scalar output");
  return o[0];
}

void CompiledFunction::reverse(std::span<const double> cotangent, int j) {
  std::fill(adj_.begin(), adj_.end(), 0.0);
  auto seed = node_span(adj_, output_ids_[size_t(j)]);
  if (cotangent.size() != seed.size()) throw ShapeError("cotangent shape mismatch");
  std::copy(cotangent.begin(), cotangent.end(), seed.begin());
  tape_.reverse<double>(vals_, adj_);
}

void CompiledFunction::reverse_scalar() {
  double one = 1.0;
  reverse({&one, 1});
}

void CompiledFunction::reverse_all(const std::vector<std::vector<double>>& cotangents) {
  if (int(cotangents.size()) != num_outputs()) throw ShapeError("one cotangent per output expected");
  std::fill(adj_.begin(), adj_.end(), 0.0);
  for (int j = 0; j < num_outputs(); ++j) {
    auto seed = node_span(adj_, output_ids_[size_t(j)]);
    if (cotangents[size_t(j)].size() != seed.size()) throw ShapeError("cotangent shape mismatch");
    for (size_t k = 0; k < seed.size(); ++k) seed[k] += cotangents[size_t(j)][k];
  }
  tape_.reverse<double>(vals_, adj_);
}

std::span<const double> CompiledFunction::input_adjoint(int i) const {
  const Tape::Node& n = tape_.node(input_ids_[size_t(i)]);
  return {adj_.data() + n.ofs, size_t(n.n)};
}

void CompiledFunction::ensure_dual() {
  if (dual_ready_) return;
  dvals_.assign(size_t(tape_.total_elems()), Dual{});
  dadj_.assign(size_t(tape_.total_elems()), Dual{});
  tape_.write_consts<Dual>(dvals_);
  dual_ready_ = true;
}

void CompiledFunction::set_dual_input(int i, std::span<const double> x) {
  set_dual_input(i, x, {});
}

void CompiledFunction::set_dual_input(int i, std::span<const double> x,
                                      std::span<const double> tangent) {
  ensure_dual();
  auto dst = node_span_dual(dvals_, input_ids_[size_t(i)]);
  if (x.size() != dst.size()) throw ShapeError("dual input shape mismatch");
  if (!tangent.empty() && tangent.size() != dst.size()) throw ShapeError("tangent shape mismatch");
  for (size_t k = 0; k < dst.size(); ++k) dst[k] = Dual{x[k], tangent.empty() ? 0.0 : tangent[k]};
}

void CompiledFunction::forward_dual(bool check_outputs) {
  ensure_dual();
  tape_.forward<Dual>(dvals_);
  if (!check_outputs) return;
  for (int j = 0; j < num_outputs(); ++j)
    for (const Dual& x : output_dual(j))
      if (!is_finite(x)) {
        tape_.forward<Dual, true>(dvals_);
        throw NonFiniteError("output");
      }
}

std::span<const Dual> CompiledFunction::output_dual(int j) const {
  const Tape::Node& n = tape_.node(output_ids_[size_t(j)]);
  return {dvals_.data() + n.ofs, size_t(n.n)};
}

void CompiledFunction::reverse_dual(std::span<const Dual> cotangent, int j) {
  ensure_dual();
  std::fill(dadj_.begin(), dadj_.end(), Dual{});
  auto seed = node_span_dual(dadj_, output_ids_[size_t(j)]);
  if (cotangent.size() != seed.size()) throw ShapeError("cotangent shape mismatch");
  std::copy(cotangent.begin(), cotangent.end(), seed.begin());
  tape_.reverse<Dual>(dvals_, dadj_);
}

void CompiledFunction::reverse_dual_scalar() {
  Dual one{1.0, 0.0};
  reverse_dual({&one, 1});
}

std::span<const Dual> CompiledFunction::input_adjoint_dual(int i) const {
  const Tape::Node& n = tape_.node(input_ids_[size_t(i)]);
  return {dadj_.data() + n.ofs, size_t(n.n)};
}

std::vector<std::vector<double>> CompiledFunction::eval(
    const std::vector<std::vector<double>>& inputs) {
  for (int i = 0; i < num_inputs(); ++i) set_input(i, inputs[size_t(i)]);
  forward();
  std::vector<std::vector<double>> outs;
  for (int j = 0; j < num_outputs(); ++j) {
    auto o = output(j);
    outs.emplace_back(o.begin(), o.end());
  }
  return outs;
}

double CompiledFunction::value_and_grad(const std::vector<std::vector<double>>& inputs,
                                        std::vector<std::vector<double>>& grads) {
  for (int i = 0; i < num_inputs(); ++i) set_input(i, inputs[size_t(i)]);
  forward();
  double v = output_scalar(0);
  reverse_scalar();
  grads.clear();
  for (int i = 0; i < num_inputs(); ++i) {
    auto g = input_adjoint(i);
    grads.emplace_back(g.begin(), g.end());
  }
  return v;
}

std::vector<std::vector<double>> CompiledFunction::vjp(
    const std::vector<std::vector<double>>& inputs, std::span<const double> cotangent, int j) {
  for (int i = 0; i < num_inputs(); ++i) set_input(i, inputs[size_t(i)]);
  forward();
  reverse(cotangent, j);
  std::vector<std::vector<double>> adjs;
  for (int i = 0; i < num_inputs(); ++i) {
    auto g = input_adjoint(i);
    adjs.emplace_back(g.begin(), g.end());
  }
  return adjs;
}

std::vector<std::vector<double>> CompiledFunction::jvp(
    const std::vector<std::vector<double>>& inputs, const std::vector<std::vector<double>>& tangents) {
  for (int i = 0; i < num_inputs(); ++i) set_dual_input(i, inputs[size_t(i)], tangents[size_t(i)]);
  forward_dual();
  std::vector<std::vector<double>> outs;
  for (int j = 0; j < num_outputs(); ++j) {
    auto o = output_dual(j);
    std::vector<double> t(o.size());
    for (size_t k = 0; k < o.size(); ++k) t[k] = o[k].t;
    outs.push_back(std::move(t));
  }
  return outs;
}

}  // namespace dppl
