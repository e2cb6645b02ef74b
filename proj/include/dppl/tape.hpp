#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dppl/dual.hpp"
#include "dppl/errors.hpp"

namespace dppl {

enum class Op : std::uint8_t {
  Leaf,
  Const,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,  // payload c = exponent
  Exp,
  Log,
  Sqrt,
  Sin,
  Cos,
  Tanh,
  Sigmoid,
  LogSigmoid,
  Sum,   // reduce to one element
  Dot,   // reduce pair to one element
  MinC,  // elementwise min(x, c)
  MaxC,  // elementwise max(x, c)
  Slice,  // aux = start offset within input
  Concat,
};

const char* op_name(Op op);

// Dynamic computation record. Nodes are appended in execution order, so the
// list is topologically sorted by construction; the reverse sweep walks it
// once back to front. Node values live in an external workspace buffer at
// fixed per-node offsets, which makes replaying the record allocation-free.
class Tape {
public:
  struct Node {
    Op op;
    std::int32_t a = -1;  // input node ids
    std::int32_t b = -1;
    std::int32_t ofs = 0;  // offset into the value workspace
    std::int32_t n = 0;    // element count
    std::int32_t aux = 0;  // slice start / const pool offset
    double c = 0.0;        // scalar payload (exponent, clamp bound)
  };

  int add_node(Op op, int n_elems, int a = -1, int b = -1, int aux = 0, double c = 0.0) {
    Node node;
    node.op = op;
    node.a = a;
    node.b = b;
    node.ofs = total_elems_;
    node.n = n_elems;
    node.aux = aux;
    node.c = c;
    total_elems_ += n_elems;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int add_const(std::span<const double> data) {
    int pool_ofs = static_cast<int>(const_pool_.size());
    const_pool_.insert(const_pool_.end(), data.begin(), data.end());
    return add_node(Op::Const, static_cast<int>(data.size()), -1, -1, pool_ofs);
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int total_elems() const { return total_elems_; }

  // Writes every Const node's payload into the workspace; done once per
  // workspace since replays never change constants.
  template <class S>
  void write_consts(std::span<S> vals) const {
    for (const Node& n : nodes_) {
      if (n.op != Op::Const) continue;
      for (int i = 0; i < n.n; ++i) vals[size_t(n.ofs + i)] = S(const_pool_[size_t(n.aux + i)]);
    }
  }

  // Forward sweep. Leaf and Const regions of `vals` must be pre-written.
  // With Checked set, every produced element is tested for finiteness and a
  // NonFiniteError naming the operation is raised on the first failure.
  template <class S, bool Checked = false>
  void forward(std::span<S> vals) const;

  // Reverse sweep. `adj` must be zeroed except for the output seeds.
  template <class S>
  void reverse(std::span<const S> vals, std::span<S> adj) const;

private:
  std::vector<Node> nodes_;
  std::vector<double> const_pool_;
  int total_elems_ = 0;
};

template <class S, bool Checked>
void Tape::forward(std::span<S> vals) const {
  S* v = vals.data();
  for (const Node& n : nodes_) {
    S* r = v + n.ofs;
    const S* a = n.a >= 0 ? v + nodes_[size_t(n.a)].ofs : nullptr;
    const S* b = n.b >= 0 ? v + nodes_[size_t(n.b)].ofs : nullptr;
    const int na = n.a >= 0 ? nodes_[size_t(n.a)].n : 0;
    const int nb = n.b >= 0 ? nodes_[size_t(n.b)].n : 0;
    switch (n.op) {
      case Op::Leaf:
      case Op::Const:
        continue;  // pre-written
      case Op::Add:
        if (na == nb) {
          for (int i = 0; i < n.n; ++i) r[i] = a[i] + b[i];
        } else if (nb == 1) {
          for (int i = 0; i < n.n; ++i) r[i] = a[i] + b[0];
        } else {
          for (int i = 0; i < n.n; ++i) r[i] = a[0] + b[i];
        }
        break;
      case Op::Sub:
        if (na == nb) {
          for (int i = 0; i < n.n; ++i) r[i] = a[i] - b[i];
        } else if (nb == 1) {
          for (int i = 0; i < n.n; ++i) r[i] = a[i] - b[0];
        } else {
          for (int i = 0; i < n.n; ++i) r[i] = a[0] - b[i];
        }
        break;
      case Op::Mul:
        if (na == nb) {
          for (int i = 0; i < n.n; ++i) r[i] = a[i] * b[i];
        } else if (nb == 1) {
          for (int i = 0; i < n.n; ++i) r[i] = a[i] * b[0];
        } else {
          for (int i = 0; i < n.n; ++i) r[i] = a[0] * b[i];
        }
        break;
      case Op::Div:
        if (na == nb) {
          for (int i = 0; i < n.n; ++i) r[i] = a[i] / b[i];
        } else if (nb == 1) {
          for (int i = 0; i < n.n; ++i) r[i] = a[i] / b[0];
        } else {
          for (int i = 0; i < n.n; ++i) r[i] = a[0] / b[i];
        }
        break;
      case Op::Neg:
        for (int i = 0; i < n.n; ++i) r[i] = -a[i];
        break;
      case Op::Pow:
        for (int i = 0; i < n.n; ++i) r[i] = pow(a[i], n.c);
        break;
      case Op::Exp:
        for (int i = 0; i < n.n; ++i) r[i] = exp(a[i]);
        break;
      case Op::Log:
        for (int i = 0; i < n.n; ++i) r[i] = log(a[i]);
        break;
      case Op::Sqrt:
        for (int i = 0; i < n.n; ++i) r[i] = sqrt(a[i]);
        break;
      case Op::Sin:
        for (int i = 0; i < n.n; ++i) r[i] = sin(a[i]);
        break;
      case Op::Cos:
        for (int i = 0; i < n.n; ++i) r[i] = cos(a[i]);
        break;
      case Op::Tanh:
        for (int i = 0; i < n.n; ++i) r[i] = tanh(a[i]);
        break;
      case Op::Sigmoid:
        for (int i = 0; i < n.n; ++i) r[i] = sigmoid(a[i]);
        break;
      case Op::LogSigmoid:
        for (int i = 0; i < n.n; ++i) r[i] = log_sigmoid(a[i]);
        break;
      case Op::Sum: {
        S acc = S(0.0);
        for (int i = 0; i < na; ++i) acc += a[i];
        r[0] = acc;
        break;
      }
      case Op::Dot: {
        S acc = S(0.0);
        for (int i = 0; i < na; ++i) acc += a[i] * b[i];
        r[0] = acc;
        break;
      }
      case Op::MinC:
        for (int i = 0; i < n.n; ++i) r[i] = primal(a[i]) < n.c ? a[i] : S(n.c);
        break;
      case Op::MaxC:
        for (int i = 0; i < n.n; ++i) r[i] = primal(a[i]) > n.c ? a[i] : S(n.c);
        break;
      case Op::Slice:
        for (int i = 0; i < n.n; ++i) r[i] = a[n.aux + i];
        break;
      case Op::Concat:
        for (int i = 0; i < na; ++i) r[i] = a[i];
        for (int i = 0; i < nb; ++i) r[na + i] = b[i];
        break;
    }
    if constexpr (Checked) {
      for (int i = 0; i < n.n; ++i)
        if (!is_finite(r[i])) throw NonFiniteError(op_name(n.op));
    }
  }
}

template <class S>
void Tape::reverse(std::span<const S> vals, std::span<S> adj) const {
  const S* v = vals.data();
  S* g = adj.data();
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const Node& n = *it;
    if (n.op == Op::Leaf || n.op == Op::Const) continue;
    const S* r = v + n.ofs;
    const S* rb = g + n.ofs;
    const int aofs = nodes_[size_t(n.a)].ofs;
    const int na = nodes_[size_t(n.a)].n;
    S* ab = g + aofs;
    const S* av = v + aofs;
    S* bb = nullptr;
    const S* bv = nullptr;
    int nb = 0;
    if (n.b >= 0) {
      bb = g + nodes_[size_t(n.b)].ofs;
      bv = v + nodes_[size_t(n.b)].ofs;
      nb = nodes_[size_t(n.b)].n;
    }
    switch (n.op) {
      case Op::Leaf:
      case Op::Const:
        break;
      case Op::Add:
        if (na == nb) {
          for (int i = 0; i < n.n; ++i) {
            ab[i] += rb[i];
            bb[i] += rb[i];
          }
        } else if (nb == 1) {
          for (int i = 0; i < n.n; ++i) {
            ab[i] += rb[i];
            bb[0] += rb[i];
          }
        } else {
          for (int i = 0; i < n.n; ++i) {
            ab[0] += rb[i];
            bb[i] += rb[i];
          }
        }
        break;
      case Op::Sub:
        if (na == nb) {
          for (int i = 0; i < n.n; ++i) {
            ab[i] += rb[i];
            bb[i] -= rb[i];
          }
        } else if (nb == 1) {
          for (int i = 0; i < n.n; ++i) {
            ab[i] += rb[i];
            bb[0] -= rb[i];
          }
        } else {
          for (int i = 0; i < n.n; ++i) {
            ab[0] += rb[i];
            bb[i] -= rb[i];
          }
        }
        break;
      case Op::Mul:
        if (na == nb) {
          for (int i = 0; i < n.n; ++i) {
            ab[i] += rb[i] * bv[i];
            bb[i] += rb[i] * av[i];
          }
        } else if (nb == 1) {
          for (int i = 0; i < n.n; ++i) {
            ab[i] += rb[i] * bv[0];
            bb[0] += rb[i] * av[i];
          }
        } else {
          for (int i = 0; i < n.n; ++i) {
            ab[0] += rb[i] * bv[i];
            bb[i] += rb[i] * av[0];
          }
        }
        break;
      case Op::Div:
        if (na == nb) {
          for (int i = 0; i < n.n; ++i) {
            ab[i] += rb[i] / bv[i];
            bb[i] -= rb[i] * r[i] / bv[i];
          }
        } else if (nb == 1) {
          for (int i = 0; i < n.n; ++i) {
            ab[i] += rb[i] / bv[0];
            bb[0] -= rb[i] * r[i] / bv[0];
          }
        } else {
          for (int i = 0; i < n.n; ++i) {
            ab[0] += rb[i] / bv[i];
            bb[i] -= rb[i] * r[i] / bv[i];
          }
        }
        break;
      case Op::Neg:
        for (int i = 0; i < n.n; ++i) ab[i] -= rb[i];
        break;
      case Op::Pow:
        for (int i = 0; i < n.n; ++i) ab[i] += rb[i] * (n.c * pow(av[i], n.c - 1.0));
        break;
      case Op::Exp:
        for (int i = 0; i < n.n; ++i) ab[i] += rb[i] * r[i];
        break;
      case Op::Log:
        for (int i = 0; i < n.n; ++i) ab[i] += rb[i] / av[i];
        break;
      case Op::Sqrt:
        for (int i = 0; i < n.n; ++i) ab[i] += rb[i] * (S(0.5) / r[i]);
        break;
      case Op::Sin:
        for (int i = 0; i < n.n; ++i) ab[i] += rb[i] * cos(av[i]);
        break;
      case Op::Cos:
        for (int i = 0; i < n.n; ++i) ab[i] -= rb[i] * sin(av[i]);
        break;
      case Op::Tanh:
        for (int i = 0; i < n.n; ++i) ab[i] += rb[i] * (S(1.0) - r[i] * r[i]);
        break;
      case Op::Sigmoid:
        for (int i = 0; i < n.n; ++i) ab[i] += rb[i] * r[i] * (S(1.0) - r[i]);
        break;
      case Op::LogSigmoid:
        for (int i = 0; i < n.n; ++i) ab[i] += rb[i] * sigmoid(-av[i]);
        break;
      case Op::Sum:
        for (int i = 0; i < na; ++i) ab[i] += rb[0];
        break;
      case Op::Dot:
        for (int i = 0; i < na; ++i) {
          ab[i] += rb[0] * bv[i];
          bb[i] += rb[0] * av[i];
        }
        break;
      case Op::MinC:
        for (int i = 0; i < n.n; ++i)
          if (primal(av[i]) < n.c) ab[i] += rb[i];
        break;
      case Op::MaxC:
        for (int i = 0; i < n.n; ++i)
          if (primal(av[i]) > n.c) ab[i] += rb[i];
        break;
      case Op::Slice:
        for (int i = 0; i < n.n; ++i) ab[n.aux + i] += rb[i];
        break;
      case Op::Concat:
        for (int i = 0; i < na; ++i) ab[i] += rb[i];
        for (int i = 0; i < nb; ++i) bb[i] += rb[na + i];
        break;
    }
  }
}

}  // namespace dppl
