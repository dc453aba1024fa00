// Transformer building blocks on top of the autodiff graph: parameter store,
// multi-head attention, pre-norm encoder/decoder layers, MLP.
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "egoact/graph.hpp"
#include "egoact/tensor.hpp"

namespace egoact {

// Named parameter tensors in stable insertion order. Insertion order fixes
// checkpoint layout and the optimizer's update order, so runs reproduce.
class ParamStore {
 public:
  Tensor& create(const std::string& name, std::vector<int> shape) {
    require(index_.find(name) == index_.end(), "ParamStore: duplicate name " + name);
    index_[name] = static_cast<int>(names_.size());
    names_.push_back(name);
    values_.push_back(Tensor::zeros(std::move(shape)));
    values_.back().requires_grad = true;
    return values_.back();
  }

  Tensor& create_normal(const std::string& name, std::vector<int> shape, Rng& rng,
                        double sigma) {
    Tensor& t = create(name, std::move(shape));
    for (double& v : t.data) v = rng.normal(0.0, sigma);
    return t;
  }

  Tensor& create_const(const std::string& name, std::vector<int> shape, double v) {
    Tensor& t = create(name, std::move(shape));
    for (double& x : t.data) x = v;
    return t;
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  Tensor& get(const std::string& name) {
    auto it = index_.find(name);
    require(it != index_.end(), "ParamStore: unknown parameter " + name);
    return values_[it->second];
  }

  const Tensor& get(const std::string& name) const {
    auto it = index_.find(name);
    require(it != index_.end(), "ParamStore: unknown parameter " + name);
    return values_[it->second];
  }

  const std::vector<std::string>& names() const { return names_; }
  size_t size() const { return names_.size(); }

  std::int64_t total_count() const {
    std::int64_t n = 0;
    for (const Tensor& t : values_) n += t.numel();
    return n;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<Tensor> values_;
};

// Caches param leaf nodes so each named tensor enters a graph once.
class ParamNodes {
 public:
  ParamNodes(Graph& g, const ParamStore& store) : g_(g), store_(store) {}

  NodeId operator()(const std::string& name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    NodeId id = g_.param(name, store_.get(name));
    ids_.emplace(name, id);
    return id;
  }

 private:
  Graph& g_;
  const ParamStore& store_;
  std::unordered_map<std::string, NodeId> ids_;
};

inline NodeId linear(Graph& g, NodeId x, NodeId w, NodeId b) {
  return g.add_rowwise(g.matmul(x, w), b);
}

inline NodeId linear(Graph& g, ParamNodes& p, NodeId x, const std::string& prefix) {
  return linear(g, x, p(prefix + ".w"), p(prefix + ".b"));
}

// Xavier scale keeps activation variance stable through the stack; the
// configurable init_std applies to embeddings and tokens, not weight matrices.
inline void create_linear(ParamStore& s, const std::string& prefix, int in, int out, Rng& rng) {
  s.create_normal(prefix + ".w", {in, out}, rng, std::sqrt(2.0 / (in + out)));
  s.create_const(prefix + ".b", {out}, 0.0);
}

inline void create_layer_norm(ParamStore& s, const std::string& prefix, int dim) {
  s.create_const(prefix + ".g", {dim}, 1.0);
  s.create_const(prefix + ".b", {dim}, 0.0);
}

inline NodeId layer_norm(Graph& g, ParamNodes& p, NodeId x, const std::string& prefix,
                         double eps) {
  return g.layer_norm_rows(x, p(prefix + ".g"), p(prefix + ".b"), eps);
}

// Scaled dot-product attention over n_heads slices of the model dim.
// q_in: [n_q, d], k_in/v_in: [n_kv, d]; output [n_q, d].
inline NodeId multi_head_attention(Graph& g, ParamNodes& p, NodeId q_in, NodeId k_in,
                                   NodeId v_in, const std::string& prefix, int n_heads) {
  int d = g.value(q_in).cols();
  require(n_heads >= 1 && d % n_heads == 0, "attention: model dim not divisible by heads");
  require(g.value(k_in).cols() == d && g.value(v_in).cols() == d,
          "attention: q/k/v dim mismatch");
  require(g.value(k_in).rows() == g.value(v_in).rows(), "attention: k/v length mismatch");
  int dh = d / n_heads;
  NodeId q = linear(g, p, q_in, prefix + ".q");
  NodeId k = linear(g, p, k_in, prefix + ".k");
  NodeId v = linear(g, p, v_in, prefix + ".v");
  std::vector<NodeId> heads;
  heads.reserve(n_heads);
  for (int h = 0; h < n_heads; ++h) {
    NodeId qh = g.slice_cols(q, h * dh, (h + 1) * dh);
    NodeId kh = g.slice_cols(k, h * dh, (h + 1) * dh);
    NodeId vh = g.slice_cols(v, h * dh, (h + 1) * dh);
    NodeId scores = g.scale(g.matmul(qh, g.transpose(kh)), 1.0 / std::sqrt(double(dh)));
    NodeId attn = g.softmax_rows(scores);
    heads.push_back(g.matmul(attn, vh));
  }
  return linear(g, p, g.concat_cols(heads), prefix + ".o");
}

inline void create_attention(ParamStore& s, const std::string& prefix, int d, Rng& rng) {
  create_linear(s, prefix + ".q", d, d, rng);
  create_linear(s, prefix + ".k", d, d, rng);
  create_linear(s, prefix + ".v", d, d, rng);
  create_linear(s, prefix + ".o", d, d, rng);
}

inline NodeId mlp_block(Graph& g, ParamNodes& p, NodeId x, const std::string& prefix) {
  return linear(g, p, g.gelu(linear(g, p, x, prefix + ".fc1")), prefix + ".fc2");
}

inline void create_mlp_block(ParamStore& s, const std::string& prefix, int d, int hidden,
                             Rng& rng) {
  create_linear(s, prefix + ".fc1", d, hidden, rng);
  create_linear(s, prefix + ".fc2", hidden, d, rng);
}

// Pre-norm encoder layer: x += attn(LN(x)); x += mlp(LN(x)).
inline NodeId encoder_layer(Graph& g, ParamNodes& p, NodeId x, const std::string& prefix,
                            int n_heads, double eps) {
  NodeId h = layer_norm(g, p, x, prefix + ".ln1", eps);
  x = g.add(x, multi_head_attention(g, p, h, h, h, prefix + ".attn", n_heads));
  x = g.add(x, mlp_block(g, p, layer_norm(g, p, x, prefix + ".ln2", eps), prefix + ".mlp"));
  return x;
}

inline void create_encoder_layer(ParamStore& s, const std::string& prefix, int d, int hidden,
                                 Rng& rng) {
  create_layer_norm(s, prefix + ".ln1", d);
  create_attention(s, prefix + ".attn", d, rng);
  create_layer_norm(s, prefix + ".ln2", d);
  create_mlp_block(s, prefix + ".mlp", d, hidden, rng);
}

// Pre-norm decoder layer with cross attention to a memory sequence.
inline NodeId decoder_layer(Graph& g, ParamNodes& p, NodeId x, NodeId memory,
                            const std::string& prefix, int n_heads, double eps) {
  NodeId h = layer_norm(g, p, x, prefix + ".ln1", eps);
  x = g.add(x, multi_head_attention(g, p, h, h, h, prefix + ".self", n_heads));
  NodeId q = layer_norm(g, p, x, prefix + ".ln2", eps);
  x = g.add(x, multi_head_attention(g, p, q, memory, memory, prefix + ".cross", n_heads));
  x = g.add(x, mlp_block(g, p, layer_norm(g, p, x, prefix + ".ln3", eps), prefix + ".mlp"));
  return x;
}

inline void create_decoder_layer(ParamStore& s, const std::string& prefix, int d, int hidden,
                                 Rng& rng) {
  create_layer_norm(s, prefix + ".ln1", d);
  create_attention(s, prefix + ".self", d, rng);
  create_layer_norm(s, prefix + ".ln2", d);
  create_attention(s, prefix + ".cross", d, rng);
  create_layer_norm(s, prefix + ".ln3", d);
  create_mlp_block(s, prefix + ".mlp", d, hidden, rng);
}

}  // namespace egoact
