#pragma once

#include <span>
#include <vector>

#include "dppl/shape.hpp"
#include "dppl/tape.hpp"

namespace dppl {

// A shaped real array participating in differentiation.
//
// A Value is either concrete (it owns its numbers; `node() < 0`) or symbolic
// (it names a node of the active computation record and carries no numbers).
// Operations on concrete values with no active record evaluate eagerly;
// operations touching a symbolic value append a node to the record. The same
// model code therefore serves both as an ordinary forward computation and as
// a recordable, differentiable one.
class Value {
public:
  Value() = default;
  explicit Value(double scalar) : data_{scalar}, shape_{} {}
  Value(std::vector<double> data, Shape shape);

  static Value zeros(const Shape& s) { return Value(std::vector<double>(size_t(s.size()), 0.0), s); }

  const Shape& shape() const { return shape_; }
  int size() const { return shape_.size(); }
  bool symbolic() const { return node_ >= 0; }

  // Concrete access. Raises if the value is symbolic.
  std::span<const double> data() const;
  double scalar() const;
  double operator[](int i) const { return data()[size_t(i)]; }

  // Same elements viewed under a different shape (no copy, no new node).
  Value reshaped(const Shape& s) const;

  int node() const { return node_; }
  Tape* tape() const { return tape_; }

  static Value from_node(Tape* t, int node, const Shape& s);

private:
  std::vector<double> data_;
  Shape shape_;
  int node_ = -1;
  Tape* tape_ = nullptr;
};

// Establishes `tape` as the active computation record on this thread for the
// guard's lifetime. Records are confined to a single thread.
class RecordGuard {
public:
  explicit RecordGuard(Tape* tape);
  ~RecordGuard();
  RecordGuard(const RecordGuard&) = delete;
  RecordGuard& operator=(const RecordGuard&) = delete;

private:
  Tape* prev_;
};

Tape* active_tape();

// Creates a symbolic input on the active record.
Value make_leaf(const Shape& s);

// Elementwise arithmetic. Operands must have equal shapes, or one of them
// must be a scalar (which broadcasts).
Value operator+(const Value& a, const Value& b);
Value operator-(const Value& a, const Value& b);
Value operator*(const Value& a, const Value& b);
Value operator/(const Value& a, const Value& b);
Value operator-(const Value& a);

Value operator+(const Value& a, double b);
Value operator+(double a, const Value& b);
Value operator-(const Value& a, double b);
Value operator-(double a, const Value& b);
Value operator*(const Value& a, double b);
Value operator*(double a, const Value& b);
Value operator/(const Value& a, double b);
Value operator/(double a, const Value& b);

Value pow(const Value& a, double exponent);
Value exp(const Value& a);
Value log(const Value& a);
Value sqrt(const Value& a);
Value sin(const Value& a);
Value cos(const Value& a);
Value tanh(const Value& a);
Value sigmoid(const Value& a);
Value log_sigmoid(const Value& a);

// Clamps against a constant. The derivative is passed through only where the
// input is strictly inside the active side; keep these off differentiated
// paths.
Value min(const Value& a, double bound);
Value max(const Value& a, double bound);

Value sum(const Value& a);                    // scalar
Value dot(const Value& a, const Value& b);    // scalar
Value mean(const Value& a);                   // scalar

Value slice(const Value& a, int start, int len);  // flat-index slice, shape (len)
Value index(const Value& a, int i);               // scalar element
Value concat(const Value& a, const Value& b);     // flat concatenation

// sqrt(x.x + 1e-12): Euclidean norm with a softened origin so its gradient
// stays defined when the argument vanishes.
Value soft_norm(const Value& a);

// 0.5*(x + sqrt(x^2 + eps)): smooth strictly-positive ramp, ~max(x, 0).
Value smooth_relu(const Value& a, double eps = 1e-6);

}  // namespace dppl
