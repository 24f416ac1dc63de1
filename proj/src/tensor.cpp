#include "graphqa/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "graphqa/errors.hpp"

namespace graphqa {

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

namespace {
std::size_t product(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}
}  // namespace

Tensor::Tensor(Shape s, double fill_value) : shape(std::move(s)) {
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor dimension must be positive, got shape " + shape_str(shape));
  }
  data.assign(product(shape), fill_value);
}

Tensor Tensor::scalar(double v) {
  Tensor t(Shape{1});
  t.data[0] = v;
  return t;
}

Tensor Tensor::vec(std::vector<double> v) {
  Tensor t;
  t.shape = {v.size()};
  t.data = std::move(v);
  if (t.data.empty()) throw ShapeError("vector tensor must be nonempty");
  return t;
}

Tensor Tensor::mat(std::size_t rows, std::size_t cols, double fill_value) {
  return Tensor(Shape{rows, cols}, fill_value);
}

std::size_t Tensor::rows() const {
  if (!is_matrix()) throw ShapeError("rows() on non-matrix of shape " + shape_str(shape));
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (!is_matrix()) throw ShapeError("cols() on non-matrix of shape " + shape_str(shape));
  return shape[1];
}

double& Tensor::at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
double Tensor::at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

std::vector<double> softmax_values(const std::vector<double>& v) {
  if (v.empty()) throw DomainError("softmax of empty vector");
  double m = v[0];
  for (double x : v) {
    if (std::isnan(x)) throw DomainError("softmax input contains NaN");
    m = std::max(m, x);
  }
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

std::size_t argmax(const std::vector<double>& v) {
  if (v.empty()) throw DomainError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace graphqa
