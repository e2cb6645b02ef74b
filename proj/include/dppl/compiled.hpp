#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dppl/value.hpp"

namespace dppl {

// A function traced once into a Tape and replayed many times. Owns the value
// and adjoint workspaces, so replays allocate nothing. Evaluation methods
// mutate the workspaces: an instance is confined to one thread (clone one per
// thread for concurrent use).
class CompiledFunction {
public:
  using TraceFn = std::function<std::vector<Value>(std::span<Value>)>;

  // Runs `f` on symbolic inputs of the given shapes, recording every
  // operation. `f` must be deterministic straight-line code over Values.
  static CompiledFunction trace(std::vector<Shape> input_shapes, const TraceFn& f);

  int num_inputs() const { return static_cast<int>(input_ids_.size()); }
  int num_outputs() const { return static_cast<int>(output_ids_.size()); }
  const Shape& input_shape(int i) const { return input_shapes_[size_t(i)]; }
  const Shape& output_shape(int j) const { return output_shapes_[size_t(j)]; }
  int node_count() const { return tape_.size(); }

  // -- plain (double) evaluation --------------------------------------------

  void set_input(int i, std::span<const double> x);
  // Forward sweep over the record. With check_outputs, raises NonFiniteError
  // (re-running in per-operation checked mode to name the culprit) if any
  // output is non-finite.
  void forward(bool check_outputs = true);
  std::span<const double> output(int j = 0) const;
  double output_scalar(int j = 0) const;

  // Reverse sweep seeding output j with `cotangent` (its shape's length).
  void reverse(std::span<const double> cotangent, int j = 0);
  // Reverse sweep for a scalar function: seeds output 0 with 1.
  void reverse_scalar();
  // Reverse sweep seeding every output at once.
  void reverse_all(const std::vector<std::vector<double>>& cotangents);
  std::span<const double> input_adjoint(int i) const;

  // -- dual (forward-over-reverse) evaluation -------------------------------

  // Tangents default to zero; set any subset before forward_dual().
  void set_dual_input(int i, std::span<const double> x);
  void set_dual_input(int i, std::span<const double> x, std::span<const double> tangent);
  void forward_dual(bool check_outputs = true);
  std::span<const Dual> output_dual(int j = 0) const;
  void reverse_dual(std::span<const Dual> cotangent, int j = 0);
  void reverse_dual_scalar();
  // Adjoint of input i: .v is the plain adjoint, .t its directional
  // derivative along the seeded input tangents (Hessian-vector products for
  // scalar functions).
  std::span<const Dual> input_adjoint_dual(int i) const;

  // -- allocating conveniences ----------------------------------------------

  std::vector<std::vector<double>> eval(const std::vector<std::vector<double>>& inputs);
  // Scalar output 0 value plus gradients with respect to every input.
  double value_and_grad(const std::vector<std::vector<double>>& inputs,
                        std::vector<std::vector<double>>& grads);
  // Cotangent-Jacobian products for output j.
  std::vector<std::vector<double>> vjp(const std::vector<std::vector<double>>& inputs,
                                       std::span<const double> cotangent, int j = 0);
  // Jacobian-tangent products for every output.
  std::vector<std::vector<double>> jvp(const std::vector<std::vector<double>>& inputs,
                                       const std::vector<std::vector<double>>& tangents);

private:
  Tape tape_;
  std::vector<int> input_ids_;
  std::vector<int> output_ids_;
  std::vector<Shape> input_shapes_;
  std::vector<Shape> output_shapes_;

  std::vector<double> vals_;
  std::vector<double> adj_;
  std::vector<Dual> dvals_;
  std::vector<Dual> dadj_;
  bool dual_ready_ = false;

  void ensure_dual();
  std::span<double> node_span(std::vector<double>& buf, int id);
  std::span<Dual> node_span_dual(std::vector<Dual>& buf, int id);
};

}  // namespace dppl
