// Set-prediction keypoint estimator: patch-embedded grid tokens through a
// transformer encoder, learned queries through a decoder with cross
// attention, then a class head and a sigmoid-bounded keypoint head per query.
//
// Class indices: 0 left hand, 1 right hand, 2..2+K_obj-1 object classes,
// last index no-entity.
#pragma once

#include <string>
#include <vector>

#include "egoact/nn.hpp"
#include "egoact/scene.hpp"

namespace egoact {

struct EstimatorConfig {
  int model_dim = 64;
  int n_heads = 4;
  int ffn_dim = 128;
  int enc_layers = 3;
  int dec_layers = 3;
  int num_queries = 12;
  int patch = 8;
  int k_obj = 4;
  GridShape grid;
  double ln_eps = 1e-5;
  double init_std = 0.02;

  int n_classes() const { return k_obj + 3; }
  int tokens() const { return (grid.height / patch) * (grid.width / patch); }
  int patch_dim() const { return grid.channels * patch * patch; }
};

constexpr int kClassLeft = 0;
constexpr int kClassRight = 1;
constexpr int kClassObjectBase = 2;

inline int no_entity_class(int k_obj) { return k_obj + 2; }

struct QueryPrediction {
  std::vector<double> class_logits;  // length C
  std::vector<double> keypoints;     // 63, sigmoid-bounded
};

using QueryPredictionSet = std::vector<QueryPrediction>;

inline void init_estimator_params(ParamStore& s, const EstimatorConfig& cfg, Rng& rng) {
  require(cfg.grid.height % cfg.patch == 0 && cfg.grid.width % cfg.patch == 0,
          "estimator: grid dims must be divisible by patch size");
  require(cfg.model_dim % cfg.n_heads == 0, "estimator: model dim not divisible by heads");
  create_linear(s, "patch_embed", cfg.patch_dim(), cfg.model_dim, rng);
  s.create_normal("pos_embed", {cfg.tokens(), cfg.model_dim}, rng, cfg.init_std);
  s.create_normal("query_embed", {cfg.num_queries, cfg.model_dim}, rng, cfg.init_std);
  for (int i = 0; i < cfg.enc_layers; ++i)
    create_encoder_layer(s, "enc" + std::to_string(i), cfg.model_dim, cfg.ffn_dim, rng);
  create_layer_norm(s, "enc_final_ln", cfg.model_dim);
  for (int i = 0; i < cfg.dec_layers; ++i)
    create_decoder_layer(s, "dec" + std::to_string(i), cfg.model_dim, cfg.ffn_dim, rng);
  create_layer_norm(s, "dec_final_ln", cfg.model_dim);
  create_linear(s, "class_head", cfg.model_dim, cfg.n_classes(), rng);
  create_linear(s, "kp_head.fc1", cfg.model_dim, cfg.model_dim, rng);
  create_linear(s, "kp_head.fc2", cfg.model_dim, cfg.model_dim, rng);
  create_linear(s, "kp_head.fc3", cfg.model_dim, kPoseCoords, rng);
}

// Non-overlapping patches in row-major patch order; within a patch the layout
// is channel, then row, then column. Exposed so tests can check that shifting
// the grid by a whole patch permutes patch payloads.
inline Tensor grid_to_patches(const ObservationGrid& grid, int patch) {
  const GridShape& s = grid.shape;
  require(s.height % patch == 0 && s.width % patch == 0,
          "grid_to_patches: grid dims must be divisible by patch size");
  int py = s.height / patch, px = s.width / patch;
  int dim = s.channels * patch * patch;
  Tensor out = Tensor::zeros({py * px, dim});
  for (int ty = 0; ty < py; ++ty)
    for (int tx = 0; tx < px; ++tx) {
      int token = ty * px + tx;
      int k = 0;
      for (int c = 0; c < s.channels; ++c)
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx)
            out.at(token, k++) = grid.at(c, ty * patch + dy, tx * patch + dx);
    }
  return out;
}

inline NodeId embed_grid(Graph& g, ParamNodes& p, const ObservationGrid& grid,
                         const EstimatorConfig& cfg) {
  NodeId patches = g.input(grid_to_patches(grid, cfg.patch));
  return g.add(linear(g, p, patches, "patch_embed"), p("pos_embed"));
}

struct EstimatorOutput {
  NodeId logits;     // [Q, C]
  NodeId keypoints;  // [Q, 63]
};

inline EstimatorOutput estimator_forward(Graph& g, ParamNodes& p, const ObservationGrid& grid,
                                         const EstimatorConfig& cfg) {
  require(grid.shape == cfg.grid, "estimator_forward: grid shape mismatch");
  NodeId x = embed_grid(g, p, grid, cfg);
  for (int i = 0; i < cfg.enc_layers; ++i)
    x = encoder_layer(g, p, x, "enc" + std::to_string(i), cfg.n_heads, cfg.ln_eps);
  NodeId memory = layer_norm(g, p, x, "enc_final_ln", cfg.ln_eps);

  NodeId q = p("query_embed");
  for (int i = 0; i < cfg.dec_layers; ++i)
    q = decoder_layer(g, p, q, memory, "dec" + std::to_string(i), cfg.n_heads, cfg.ln_eps);
  q = layer_norm(g, p, q, "dec_final_ln", cfg.ln_eps);

  EstimatorOutput out;
  out.logits = linear(g, p, q, "class_head");
  NodeId h = g.gelu(linear(g, p, q, "kp_head.fc1"));
  h = g.gelu(linear(g, p, h, "kp_head.fc2"));
  out.keypoints = g.sigmoid(linear(g, p, h, "kp_head.fc3"));
  return out;
}

inline QueryPredictionSet to_prediction_set(const Graph& g, const EstimatorOutput& out) {
  const Tensor& logits = g.value(out.logits);
  const Tensor& kps = g.value(out.keypoints);
  QueryPredictionSet set(logits.rows());
  for (int qi = 0; qi < logits.rows(); ++qi) {
    set[qi].class_logits.assign(logits.data.begin() + static_cast<size_t>(qi) * logits.cols(),
                                logits.data.begin() +
                                    static_cast<size_t>(qi + 1) * logits.cols());
    set[qi].keypoints.assign(kps.data.begin() + static_cast<size_t>(qi) * kPoseCoords,
                             kps.data.begin() + static_cast<size_t>(qi + 1) * kPoseCoords);
  }
  return set;
}

// one estimator pass on a single grid, values only
inline QueryPredictionSet estimator_predict(const ParamStore& params,
                                            const ObservationGrid& grid,
                                            const EstimatorConfig& cfg) {
  Graph g;
  ParamNodes p(g, params);
  return to_prediction_set(g, estimator_forward(g, p, grid, cfg));
}

struct SelectedEntities {
  FramePose pose;
  int object_class = 0;
  double conf_left = 0.0;
  double conf_right = 0.0;
  double conf_object = 0.0;
  int query_left = 0;
  int query_right = 0;
  int query_object = 0;
};

namespace detail {

inline void fill_points_from_flat(std::array<Point3, 21>& pts, const std::vector<double>& kp) {
  for (int i = 0; i < 21; ++i)
    for (int ax = 0; ax < 3; ++ax) pts[i][ax] = kp[static_cast<size_t>(i) * 3 + ax];
}

}  // namespace detail

// Picks, per entity role, the query with the highest class probability.
// Ties break toward the lowest query index (then lowest object class); a
// query may serve several roles since exclusivity is not enforced.
inline SelectedEntities select_entities(const QueryPredictionSet& preds, int k_obj) {
  require(preds.size() >= 3, "select_entities: need at least 3 queries");
  SelectedEntities out;
  int q_count = static_cast<int>(preds.size());
  std::vector<std::vector<double>> probs(q_count);
  for (int qi = 0; qi < q_count; ++qi) probs[qi] = softmax(preds[qi].class_logits);

  auto argmax_role = [&](int cls) {
    int best_q = 0;
    double best_p = -1.0;
    for (int qi = 0; qi < q_count; ++qi)
      if (probs[qi][cls] > best_p) {
        best_p = probs[qi][cls];
        best_q = qi;
      }
    return std::pair(best_q, best_p);
  };

  auto [lq, lp] = argmax_role(kClassLeft);
  auto [rq, rp] = argmax_role(kClassRight);
  out.query_left = lq;
  out.query_right = rq;
  out.conf_left = lp;
  out.conf_right = rp;

  int best_q = 0, best_c = 0;
  double best_p = -1.0;
  for (int qi = 0; qi < q_count; ++qi)
    for (int c = 0; c < k_obj; ++c)
      if (probs[qi][kClassObjectBase + c] > best_p) {
        best_p = probs[qi][kClassObjectBase + c];
        best_q = qi;
        best_c = c;
      }
  out.query_object = best_q;
  out.object_class = best_c;
  out.conf_object = best_p;

  out.pose.left.side = HandSide::kLeft;
  out.pose.right.side = HandSide::kRight;
  detail::fill_points_from_flat(out.pose.left.joints, preds[lq].keypoints);
  detail::fill_points_from_flat(out.pose.right.joints, preds[rq].keypoints);
  detail::fill_points_from_flat(out.pose.object.points, preds[best_q].keypoints);
  out.pose.object.class_id = best_c;
  return out;
}

}  // namespace egoact
