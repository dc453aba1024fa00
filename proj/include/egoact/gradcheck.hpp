// Central finite-difference gradient checking against autodiff output.
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "egoact/nn.hpp"

namespace egoact {

using LossFn = std::function<double(const ParamStore&)>;

inline double relative_error(double a, double b) {
  double denom = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / denom;
}

inline double central_difference(const LossFn& f, ParamStore& store, const std::string& name,
                                 size_t idx, double h) {
  Tensor& t = store.get(name);
  double orig = t.data[idx];
  t.data[idx] = orig + h;
  double up = f(store);
  t.data[idx] = orig - h;
  double down = f(store);
  t.data[idx] = orig;
  return (up - down) / (2.0 * h);
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  int coords_checked = 0;
  std::string worst_param;
};

// Compares autodiff gradients against central differences on a deterministic
// random subset of coordinates from every named tensor.
inline GradCheckReport check_gradients(const LossFn& f, ParamStore& store,
                                       const std::map<std::string, Tensor>& grads,
                                       Rng& coord_rng, int coords_per_tensor, double h) {
  GradCheckReport report;
  for (const std::string& name : store.names()) {
    auto it = grads.find(name);
    require(it != grads.end(), "check_gradients: missing gradient for " + name);
    const Tensor& g = it->second;
    size_t n = g.data.size();
    int picks = std::min<int>(coords_per_tensor, static_cast<int>(n));
    for (int k = 0; k < picks; ++k) {
      size_t idx = static_cast<size_t>(coord_rng.bounded(n));
      double fd = central_difference(f, store, name, idx, h);
      double rel = relative_error(g.data[idx], fd);
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
      }
      ++report.coords_checked;
    }
  }
  return report;
}

}  // namespace egoact
