#include "graphqa/params.hpp"

#include <cmath>

#include "graphqa/errors.hpp"
#include "graphqa/rng.hpp"

namespace graphqa {

namespace {
// fan_in/fan_out for a {out, in} matrix; vectors count as both.
std::pair<std::size_t, std::size_t> fans(const Shape& shape) {
  if (shape.size() == 2) return {shape[1], shape[0]};
  return {shape[0], shape[0]};
}
}  // namespace

Param& ParameterStore::create(const std::string& name, Shape shape) {
  Param& p = create_zeros(name, std::move(shape));
  auto [fan_in, fan_out] = fans(p.value.shape);
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng(hash64(name) ^ seed_);
  for (double& v : p.value.data) v = rng.uniform(-bound, bound);
  return p;
}

Param& ParameterStore::create_zeros(const std::string& name, Shape shape) {
  if (index_.count(name))
    throw ConfigError("duplicate parameter name: " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Tensor(shape);
  p->grad = Tensor(std::move(shape));
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Param& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("unknown parameter: " + name);
  return *params_[it->second];
}

const Param& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("unknown parameter: " + name);
  return *params_[it->second];
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) p->grad.fill(0.0);
}

std::size_t ParameterStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.numel();
  return n;
}

}  // namespace graphqa
