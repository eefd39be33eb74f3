//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_MODEL_PARAMS_HPP
#define CLIFFMASK_MODEL_PARAMS_HPP

#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cliffmask/core/error.hpp"
#include "cliffmask/core/rng.hpp"

namespace cliffmask::model {

// One flat arena for parameters, gradients and momentum so the optimizer,
// the checkpoint writer and the gradient checker all walk the same memory
// in the same declaration order.
template <typename T>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
  };

  int declare(const std::string& name, std::vector<int> shape) {
    if (allocated_) {
      raise(Errc::kConfigInvalid, "parameter declared after allocation");
    }
    if (index_.count(name)) {
      raise(Errc::kConfigInvalid, "duplicate parameter '" + name + "'");
    }
    Entry e;
    e.name = name;
    e.shape = std::move(shape);
    e.size = 1;
    for (int d : e.shape) e.size *= static_cast<std::size_t>(d);
    e.offset = total_;
    total_ += e.size;
    index_[name] = static_cast<int>(entries_.size());
    entries_.push_back(std::move(e));
    return static_cast<int>(entries_.size()) - 1;
  }

  void allocate() {
    data_.assign(total_, T(0));
    grad_.assign(total_, T(0));
    mom_.assign(total_, T(0));
    allocated_ = true;
  }

  T* data(int id) { return data_.data() + entries_[std::size_t(id)].offset; }
  const T* data(int id) const {
    return data_.data() + entries_[std::size_t(id)].offset;
  }
  T* grad(int id) { return grad_.data() + entries_[std::size_t(id)].offset; }
  const Entry& entry(int id) const { return entries_[std::size_t(id)]; }
  int find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }

  std::size_t size() const { return total_; }
  int num_entries() const { return static_cast<int>(entries_.size()); }
  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<T>& flat_data() { return data_; }
  const std::vector<T>& flat_data() const { return data_; }
  std::vector<T>& flat_grad() { return grad_; }
  std::vector<T>& flat_momentum() { return mom_; }

  void zero_grad() { std::fill(grad_.begin(), grad_.end(), T(0)); }
  void reset_momentum() { std::fill(mom_.begin(), mom_.end(), T(0)); }

  // Declaration-order init keeps reruns bitwise identical.
  void init_normal(int id, Rng& rng, double stddev) {
    T* p = data(id);
    for (std::size_t i = 0; i < entries_[std::size_t(id)].size; ++i) {
      p[i] = static_cast<T>(rng.gaussian() * stddev);
    }
  }
  void init_constant(int id, T value) {
    T* p = data(id);
    for (std::size_t i = 0; i < entries_[std::size_t(id)].size; ++i) {
      p[i] = value;
    }
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, int> index_;
  std::vector<T> data_, grad_, mom_;
  std::size_t total_ = 0;
  bool allocated_ = false;
};

}  // namespace cliffmask::model

#endif  // CLIFFMASK_MODEL_PARAMS_HPP
