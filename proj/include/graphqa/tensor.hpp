#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace graphqa {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

// Dense row-major f64 array. Rank 1 tensors are vectors, rank 2 matrices;
// scalars are shape {1}.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);

  static Tensor scalar(double v);
  static Tensor vec(std::vector<double> v);
  static Tensor mat(std::size_t rows, std::size_t cols, double fill = 0.0);

  std::size_t numel() const { return data.size(); }
  bool is_scalar() const { return shape.size() == 1 && shape[0] == 1; }
  bool is_vector() const { return shape.size() == 1; }
  bool is_matrix() const { return shape.size() == 2; }

  std::size_t rows() const;
  std::size_t cols() const;

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  bool all_finite() const;
  void fill(double v);
};

bool same_shape(const Tensor& a, const Tensor& b);

// Softmax of a plain value vector, max-subtracted. Used on the
// prediction (no-gradient) path; the tape has its own softmax op.
std::vector<double> softmax_values(const std::vector<double>& v);

// Argmax with ties broken toward the lowest index.
std::size_t argmax(const std::vector<double>& v);

}  // namespace graphqa
