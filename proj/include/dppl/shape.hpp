#pragma once

#include <initializer_list>
#include <string>
#include <vector>

namespace dppl {

// Dimension list of a value. An empty list denotes a scalar (one element).
class Shape {
public:
  Shape() = default;
  Shape(std::initializer_list<int> dims) : dims_(dims) {}
  explicit Shape(std::vector<int> dims) : dims_(std::move(dims)) {}

  static Shape scalar() { return Shape{}; }
  static Shape vector(int n) { return Shape{n}; }

  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  const std::vector<int>& dims() const { return dims_; }

  int size() const {
    int n = 1;
    for (int d : dims_) n *= d;
    return n;
  }

  bool operator==(const Shape& o) const { return dims_ == o.dims_; }
  bool operator!=(const Shape& o) const { return dims_ != o.dims_; }

  std::string str() const {
    std::string s = "(";
    for (size_t i = 0; i < dims_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(dims_[i]);
    }
    return s + ")";
  }

private:
  std::vector<int> dims_;
};

}  // namespace dppl
