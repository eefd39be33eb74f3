//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_MODEL_OPTIM_HPP
#define CLIFFMASK_MODEL_OPTIM_HPP

#include "cliffmask/core/error.hpp"
#include "cliffmask/model/params.hpp"

namespace cliffmask::model {

struct OptimizerConfig {
  double lr = 0.01;
  double weight_decay = 1e-5;
  double momentum = 0.9;
  int batch_size = 128;

  void validate() const {
    if (!(lr >= 0.0)) raise(Errc::kConfigInvalid, "learning rate < 0");
    if (!(momentum >= 0.0) || momentum >= 1.0) {
      raise(Errc::kConfigInvalid, "momentum outside [0,1)");
    }
    if (weight_decay < 0.0) raise(Errc::kConfigInvalid, "weight decay < 0");
    if (batch_size <= 0) raise(Errc::kConfigInvalid, "batch size < 1");
  }
};

// SGD with momentum and decoupled weight decay over the flat arena.
// The decay term multiplies the parameter directly (never enters the
// momentum buffer), so lr = 0 leaves parameters bit-identical.
template <typename T>
inline void sgd_step(ParamStore<T>& params, const OptimizerConfig& opt) {
  opt.validate();
  std::vector<T>& data = params.flat_data();
  std::vector<T>& grad = params.flat_grad();
  std::vector<T>& mom = params.flat_momentum();
  const T lr = static_cast<T>(opt.lr);
  const T mu = static_cast<T>(opt.momentum);
  const T wd = static_cast<T>(opt.weight_decay);
  for (std::size_t i = 0; i < data.size(); ++i) {
    mom[i] = mu * mom[i] + grad[i];
    data[i] -= lr * (mom[i] + wd * data[i]);
  }
}

}  // namespace cliffmask::model

#endif  // CLIFFMASK_MODEL_OPTIM_HPP
