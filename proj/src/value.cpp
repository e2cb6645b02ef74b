#include "dppl/value.hpp"

#include <cmath>

namespace dppl {

namespace {

thread_local Tape* g_active_tape = nullptr;

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::Const: return "const";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Pow: return "pow";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::LogSigmoid: return "log_sigmoid";
    case Op::Sum: return "sum";
    case Op::Dot: return "dot";
    case Op::MinC: return "min";
    case Op::MaxC: return "max";
    case Op::Slice: return "slice";
    case Op::Concat: return "concat";
  }
  return "?";
}

Value::Value(std::vector<double> data, Shape shape) : data_(std::move(data)), shape_(std::move(shape)) {
  if (static_cast<int>(data_.size()) != shape_.size())
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
}

std::span<const double> Value::data() const {
  if (symbolic()) throw Error("symbolic value has no concrete data");
  return data_;
}

double Value::scalar() const {
  if (size() != 1) throw ShapeError("scalar() on value of shape " + shape_.str());
  return data()[0];
}

Value Value::reshaped(const Shape& s) const {
  if (s.size() != size()) throw ShapeError("cannot view " + shape_.str() + " as " + s.str());
  Value v = *this;
  v.shape_ = s;
  return v;
}

Value Value::from_node(Tape* t, int node, const Shape& s) {
  Value v;
  v.tape_ = t;
  v.node_ = node;
  v.shape_ = s;
  return v;
}

RecordGuard::RecordGuard(Tape* tape) : prev_(g_active_tape) { g_active_tape = tape; }
RecordGuard::~RecordGuard() { g_active_tape = prev_; }

Tape* active_tape() { return g_active_tape; }

Value make_leaf(const Shape& s) {
  Tape* t = g_active_tape;
  if (!t) throw Error("make_leaf requires an active computation record");
  int id = t->add_node(Op::Leaf, s.size());
  return Value::from_node(t, id, s);
}

namespace {

// Node id for `v` on tape `t`, interning concrete values as constants.
int node_on(Tape* t, const Value& v) {
  if (v.symbolic()) {
    if (v.tape() != t) throw Error("value belongs to a different computation record");
    return v.node();
  }
  return t->add_const(v.data());
}

Tape* tape_for(const Value& a, const Value* b = nullptr) {
  if (a.symbolic()) return a.tape();
  if (b && b->symbolic()) return b->tape();
  return nullptr;
}

void check_finite_result(std::span<const double> out, Op op) {
  for (double x : out)
    if (!std::isfinite(x)) throw NonFiniteError(op_name(op));
}

Shape broadcast_shape(const Value& a, const Value& b, Op op) {
  if (a.shape() == b.shape()) return a.shape();
  if (a.size() == 1) return b.shape();
  if (b.size() == 1) return a.shape();
  throw ShapeError(std::string(op_name(op)) + ": incompatible shapes " + a.shape().str() + " and " +
                   b.shape().str());
}

Value eager_binary(Op op, const Value& a, const Value& b, const Shape& rshape) {
  auto av = a.data();
  auto bv = b.data();
  const int n = rshape.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = av[a.size() == 1 ? 0 : size_t(i)];
    double y = bv[b.size() == 1 ? 0 : size_t(i)];
    switch (op) {
      case Op::Add: out[size_t(i)] = x + y; break;
      case Op::Sub: out[size_t(i)] = x - y; break;
      case Op::Mul: out[size_t(i)] = x * y; break;
      case Op::Div: out[size_t(i)] = x / y; break;
      default: throw Error("bad binary op");
    }
  }
  check_finite_result(out, op);
  return Value(std::move(out), rshape);
}

Value binary(Op op, const Value& a, const Value& b) {
  Shape rshape = broadcast_shape(a, b, op);
  Tape* t = tape_for(a, &b);
  if (!t) return eager_binary(op, a, b, rshape);
  int id = t->add_node(op, rshape.size(), node_on(t, a), node_on(t, b));
  return Value::from_node(t, id, rshape);
}

Value eager_unary(Op op, const Value& a, double c) {
  auto av = a.data();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < av.size(); ++i) {
    double x = av[i];
    switch (op) {
      case Op::Neg: out[i] = -x; break;
      case Op::Pow: out[i] = std::pow(x, c); break;
      case Op::Exp: out[i] = std::exp(x); break;
      case Op::Log: out[i] = std::log(x); break;
      case Op::Sqrt: out[i] = std::sqrt(x); break;
      case Op::Sin: out[i] = std::sin(x); break;
      case Op::Cos: out[i] = std::cos(x); break;
      case Op::Tanh: out[i] = std::tanh(x); break;
      case Op::Sigmoid: out[i] = sigmoid(x); break;
      case Op::LogSigmoid: out[i] = log_sigmoid(x); break;
      case Op::MinC: out[i] = x < c ? x : c; break;
      case Op::MaxC: out[i] = x > c ? x : c; break;
      default: throw Error("bad unary op");
    }
  }
  check_finite_result(out, op);
  return Value(std::move(out), a.shape());
}

Value unary(Op op, const Value& a, double c = 0.0) {
  Tape* t = tape_for(a);
  if (!t) return eager_unary(op, a, c);
  int id = t->add_node(op, a.size(), node_on(t, a), -1, 0, c);
  return Value::from_node(t, id, a.shape());
}

}  // namespace

Value operator+(const Value& a, const Value& b) { return binary(Op::Add, a, b); }
Value operator-(const Value& a, const Value& b) { return binary(Op::Sub, a, b); }
Value operator*(const Value& a, const Value& b) { return binary(Op::Mul, a, b); }
Value operator/(const Value& a, const Value& b) { return binary(Op::Div, a, b); }
Value operator-(const Value& a) { return unary(Op::Neg, a); }

Value operator+(const Value& a, double b) { return a + Value(b); }
Value operator+(double a, const Value& b) { return Value(a) + b; }
Value operator-(const Value& a, double b) { return a - Value(b); }
Value operator-(double a, const Value& b) { return Value(a) - b; }
Value operator*(const Value& a, double b) { return a * Value(b); }
Value operator*(double a, const Value& b) { return Value(a) * b; }
Value operator/(const Value& a, double b) { return a / Value(b); }
Value operator/(double a, const Value& b) { return Value(a) / b; }

Value pow(const Value& a, double exponent) { return unary(Op::Pow, a, exponent); }
Value exp(const Value& a) { return unary(Op::Exp, a); }
Value log(const Value& a) { return unary(Op::Log, a); }
Value sqrt(const Value& a) { return unary(Op::Sqrt, a); }
Value sin(const Value& a) { return unary(Op::Sin, a); }
Value cos(const Value& a) { return unary(Op::Cos, a); }
Value tanh(const Value& a) { return unary(Op::Tanh, a); }
Value sigmoid(const Value& a) { return unary(Op::Sigmoid, a); }
Value log_sigmoid(const Value& a) { return unary(Op::LogSigmoid, a); }
Value min(const Value& a, double bound) { return unary(Op::MinC, a, bound); }
Value max(const Value& a, double bound) { return unary(Op::MaxC, a, bound); }

Value sum(const Value& a) {
  Tape* t = tape_for(a);
  if (!t) {
    double acc = 0;
    for (double x : a.data()) acc += x;
    return Value(acc);
  }
  int id = t->add_node(Op::Sum, 1, node_on(t, a));
  return Value::from_node(t, id, Shape::scalar());
}

Value dot(const Value& a, const Value& b) {
  if (a.size() != b.size())
    throw ShapeError("dot: sizes " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  Tape* t = tape_for(a, &b);
  if (!t) {
    double acc = 0;
    auto av = a.data();
    auto bv = b.data();
    for (size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
    return Value(acc);
  }
  int id = t->add_node(Op::Dot, 1, node_on(t, a), node_on(t, b));
  return Value::from_node(t, id, Shape::scalar());
}

Value mean(const Value& a) { return sum(a) / double(a.size()); }

Value slice(const Value& a, int start, int len) {
  if (start < 0 || len < 0 || start + len > a.size())
    throw ShapeError("slice [" + std::to_string(start) + "," + std::to_string(start + len) + ") of " +
                     std::to_string(a.size()) + " elements");
  Shape rshape = len == 1 ? Shape::scalar() : Shape::vector(len);
  Tape* t = tape_for(a);
  if (!t) {
    auto av = a.data();
    return Value(std::vector<double>(av.begin() + start, av.begin() + start + len), rshape);
  }
  int id = t->add_node(Op::Slice, len, node_on(t, a), -1, start);
  return Value::from_node(t, id, rshape);
}

Value index(const Value& a, int i) { return slice(a, i, 1); }

Value concat(const Value& a, const Value& b) {
  Shape rshape = Shape::vector(a.size() + b.size());
  Tape* t = tape_for(a, &b);
  if (!t) {
    std::vector<double> out(a.data().begin(), a.data().end());
    out.insert(out.end(), b.data().begin(), b.data().end());
    return Value(std::move(out), rshape);
  }
  int id = t->add_node(Op::Concat, rshape.size(), node_on(t, a), node_on(t, b));
  return Value::from_node(t, id, rshape);
}

Value soft_norm(const Value& a) { return sqrt(dot(a, a) + 1e-12); }

Value smooth_relu(const Value& a, double eps) { return 0.5 * (a + sqrt(a * a + eps)); }

}  // namespace dppl
