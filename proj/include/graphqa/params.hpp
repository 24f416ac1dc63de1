#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "graphqa/tensor.hpp"

namespace graphqa {

// One learnable array. grad always has the same shape as value and
// accumulates additively across backward passes until zeroed.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Named parameter set. Initialization is uniform in
// +-sqrt(6 / (fan_in + fan_out)), seeded per name so creation order
// does not change the draw.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed) : seed_(seed) {}

  Param& create(const std::string& name, Shape shape);
  Param& create_zeros(const std::string& name, Shape shape);

  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  void zero_grads();

  // Insertion order; stable for the life of the store.
  const std::vector<std::unique_ptr<Param>>& all() const { return params_; }
  std::vector<std::unique_ptr<Param>>& all() { return params_; }

  std::uint64_t seed() const { return seed_; }
  std::size_t total_elements() const;

 private:
  std::uint64_t seed_;
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace graphqa
