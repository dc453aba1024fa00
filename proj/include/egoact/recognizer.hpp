// Temporal action recognizer: per-frame pose tokens plus a learnable action
// token through a transformer encoder; the action token's final state feeds
// an MLP classifier.
#pragma once

#include <string>
#include <vector>

#include "egoact/nn.hpp"
#include "egoact/scene.hpp"

namespace egoact {

struct RecognizerConfig {
  int model_dim = 64;
  int n_heads = 4;
  int ffn_dim = 128;
  int layers = 3;
  int n_clips = 64;
  int k_act = 8;
  int k_obj = 4;
  double ln_eps = 1e-5;
  double init_std = 0.02;

  int frame_input_dim() const { return 3 * kPoseCoords + k_obj; }
};

inline void init_recognizer_params(ParamStore& s, const RecognizerConfig& cfg, Rng& rng) {
  require(cfg.model_dim % cfg.n_heads == 0, "recognizer: model dim not divisible by heads");
  create_linear(s, "tok_proj", cfg.frame_input_dim(), cfg.model_dim, rng);
  s.create_normal("action_token", {1, cfg.model_dim}, rng, cfg.init_std);
  s.create_normal("pos_embed", {cfg.n_clips + 1, cfg.model_dim}, rng, cfg.init_std);
  for (int i = 0; i < cfg.layers; ++i)
    create_encoder_layer(s, "layer" + std::to_string(i), cfg.model_dim, cfg.ffn_dim, rng);
  create_layer_norm(s, "final_ln", cfg.model_dim);
  create_linear(s, "head.fc1", cfg.model_dim, cfg.model_dim, rng);
  create_linear(s, "head.fc2", cfg.model_dim, cfg.k_act, rng);
}

// left (63) + right (63) + object (63) coordinates + object-class one-hot.
// Coordinates are centered around the cube midpoint before projection so the
// token input has no large shared offset.
inline std::vector<double> pose_input_vector(const FramePose& pose, int object_class,
                                             int k_obj) {
  require(object_class >= 0 && object_class < k_obj,
          "pose_input_vector: object class out of range");
  std::vector<double> v;
  v.reserve(3 * kPoseCoords + k_obj);
  auto push = [&](const Point3& p) {
    for (double x : p) v.push_back(x - 0.5);
  };
  for (const auto& p : pose.left.joints) push(p);
  for (const auto& p : pose.right.joints) push(p);
  for (const auto& p : pose.object.points) push(p);
  for (int c = 0; c < k_obj; ++c) v.push_back(c == object_class ? 1.0 : 0.0);
  return v;
}

// all sampled frames tokenized with one projection: [N, model_dim]
inline NodeId tokenize_frames(Graph& g, ParamNodes& p, const std::vector<FramePose>& poses,
                              const std::vector<int>& object_classes,
                              const RecognizerConfig& cfg) {
  require(poses.size() == object_classes.size(), "tokenize_frames: length mismatch");
  int n = static_cast<int>(poses.size());
  Tensor in = Tensor::zeros({n, cfg.frame_input_dim()});
  for (int i = 0; i < n; ++i) {
    std::vector<double> v = pose_input_vector(poses[i], object_classes[i], cfg.k_obj);
    for (int j = 0; j < cfg.frame_input_dim(); ++j) in.at(i, j) = v[j];
  }
  return linear(g, p, g.input(in), "tok_proj");
}

inline NodeId tokenize_frame(Graph& g, ParamNodes& p, const FramePose& pose, int object_class,
                             const RecognizerConfig& cfg) {
  return tokenize_frames(g, p, {pose}, {object_class}, cfg);
}

// [action_token; frame tokens] + positional embeddings -> encoder stack ->
// MLP on the position-0 output
inline NodeId recognizer_forward(Graph& g, ParamNodes& p, NodeId frame_tokens,
                                 const RecognizerConfig& cfg) {
  require(g.value(frame_tokens).rows() == cfg.n_clips,
          "recognizer_forward: expected exactly n_clips frame tokens");
  NodeId x = g.concat_rows({p("action_token"), frame_tokens});
  x = g.add(x, p("pos_embed"));
  for (int i = 0; i < cfg.layers; ++i)
    x = encoder_layer(g, p, x, "layer" + std::to_string(i), cfg.n_heads, cfg.ln_eps);
  x = layer_norm(g, p, x, "final_ln", cfg.ln_eps);
  NodeId cls = g.slice_rows(x, 0, 1);
  return linear(g, p, g.gelu(linear(g, p, cls, "head.fc1")), "head.fc2");
}

inline std::vector<double> action_logits(const ParamStore& params,
                                         const std::vector<FramePose>& poses,
                                         const std::vector<int>& object_classes,
                                         const RecognizerConfig& cfg) {
  Graph g;
  ParamNodes p(g, params);
  NodeId logits = recognizer_forward(g, p, tokenize_frames(g, p, poses, object_classes, cfg), cfg);
  return g.value(logits).data;
}

// argmax with lowest-index tie-break
inline int argmax_class(const std::vector<double>& logits) {
  int best = 0;
  for (size_t i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace egoact
