// AdamW with decoupled weight decay, global-norm gradient clipping, and the
// stepwise learning-rate schedule (constant, one drop by a fixed factor).
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "egoact/nn.hpp"

namespace egoact {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

  // Decoupled decay: weights shrink by lr*wd directly, gradients untouched.
  // Parameters without an entry in `grads` are treated as zero-gradient.
  void step(ParamStore& params, const std::map<std::string, Tensor>& grads, double lr,
            double weight_decay) {
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (const std::string& name : params.names()) {
      Tensor& p = params.get(name);
      Slot& slot = slots_[name];
      if (slot.m.size() != p.data.size()) {
        slot.m.assign(p.data.size(), 0.0);
        slot.v.assign(p.data.size(), 0.0);
      }
      auto it = grads.find(name);
      const std::vector<double>* g = it == grads.end() ? nullptr : &it->second.data;
      if (g) require(g->size() == p.data.size(), "AdamW: gradient shape mismatch for " + name);
      for (size_t i = 0; i < p.data.size(); ++i) {
        double gi = g ? (*g)[i] : 0.0;
        slot.m[i] = cfg_.beta1 * slot.m[i] + (1.0 - cfg_.beta1) * gi;
        slot.v[i] = cfg_.beta2 * slot.v[i] + (1.0 - cfg_.beta2) * gi * gi;
        double mhat = slot.m[i] / bc1;
        double vhat = slot.v[i] / bc2;
        p.data[i] -= lr * weight_decay * p.data[i];
        p.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

  std::int64_t steps_taken() const { return t_; }

 private:
  struct Slot {
    std::vector<double> m, v;
  };
  AdamWConfig cfg_;
  std::map<std::string, Slot> slots_;
  std::int64_t t_ = 0;
};

// Scales gradients in place so their global L2 norm is at most max_norm.
inline double clip_grad_norm(std::map<std::string, Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (auto& [name, g] : grads)
    for (double v : g.data) sq += v * v;
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double s = max_norm / norm;
    for (auto& [name, g] : grads)
      for (double& v : g.data) v *= s;
  }
  return norm;
}

// lr for epoch e: base before drop_epoch, base/drop_factor at and after it
inline double lr_at(int epoch, double base_lr, int epochs, int drop_epoch, double drop_factor) {
  require(epoch >= 0 && epoch < epochs, "lr_at: epoch out of range");
  return epoch < drop_epoch ? base_lr : base_lr / drop_factor;
}

}  // namespace egoact
