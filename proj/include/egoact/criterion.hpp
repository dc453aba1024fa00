// Matching cost construction and the Hungarian set loss: softmax-probability
// matching cost as in DETR (probability, not CE, in the cost; CE in the
// loss), L1 keypoint regression averaged over all 63 coordinates, and
// down-weighted no-entity terms.
#pragma once

#include <array>
#include <vector>

#include "egoact/estimator.hpp"
#include "egoact/hungarian.hpp"

namespace egoact {

struct TargetEntity {
  int class_id = 0;  // left / right / object class, never no-entity
  std::array<double, kPoseCoords> keypoints{};
};

struct CriterionConfig {
  double match_cls = 1.0;
  double match_kp = 5.0;
  double loss_cls = 1.0;
  double loss_kp = 5.0;
  double w_noentity = 0.1;
};

inline std::array<double, kPoseCoords> flatten_points(const std::array<Point3, 21>& pts) {
  std::array<double, kPoseCoords> out{};
  for (int i = 0; i < 21; ++i)
    for (int ax = 0; ax < 3; ++ax) out[static_cast<size_t>(i) * 3 + ax] = pts[i][ax];
  return out;
}

// fixed target order: left hand, right hand, object
inline std::vector<TargetEntity> targets_from_pose(const FramePose& pose) {
  std::vector<TargetEntity> out(3);
  out[0].class_id = kClassLeft;
  out[0].keypoints = flatten_points(pose.left.joints);
  out[1].class_id = kClassRight;
  out[1].keypoints = flatten_points(pose.right.joints);
  out[2].class_id = kClassObjectBase + pose.object.class_id;
  out[2].keypoints = flatten_points(pose.object.points);
  return out;
}

inline double mean_l1(const std::vector<double>& a, const std::array<double, kPoseCoords>& b) {
  double s = 0.0;
  for (int i = 0; i < kPoseCoords; ++i) s += std::abs(a[i] - b[i]);
  return s / kPoseCoords;
}

// cost(q, t) = -match_cls * p_q(class_t) + match_kp * meanL1(kp_q, kp_t)
inline CostMatrix matching_cost(const QueryPredictionSet& preds,
                                const std::vector<TargetEntity>& targets,
                                const CriterionConfig& cfg) {
  int q_count = static_cast<int>(preds.size());
  int t_count = static_cast<int>(targets.size());
  require(t_count >= 1, "matching_cost: no targets");
  require(t_count <= q_count, "matching_cost: more targets than queries");
  CostMatrix m(q_count, t_count,
               std::vector<double>(static_cast<size_t>(q_count) * t_count, 0.0));
  for (int qi = 0; qi < q_count; ++qi) {
    std::vector<double> probs = softmax(preds[qi].class_logits);
    for (int ti = 0; ti < t_count; ++ti) {
      m.at(qi, ti) = -cfg.match_cls * probs[targets[ti].class_id] +
                     cfg.match_kp * mean_l1(preds[qi].keypoints, targets[ti].keypoints);
    }
  }
  return m;
}

struct LossBreakdown {
  double class_loss = 0.0;
  double keypoint_loss = 0.0;
  double total = 0.0;
  Assignment assignment;
};

struct HungarianLossNodes {
  NodeId total;
  NodeId class_term;
  NodeId keypoint_term;
};

// Builds the loss as graph nodes over the raw prediction nodes:
//   class term   = (1/Q) sum_q w_q * CE(logits_q, class_q)   with w_q = 1 for
//                  matched queries and w_noentity otherwise
//   keypoint term = mean over matched pairs of meanL1
//   total        = loss_cls * class + loss_kp * keypoint
// The assignment itself is computed from detached values.
inline HungarianLossNodes hungarian_loss_nodes(Graph& g, NodeId logits, NodeId keypoints,
                                               const std::vector<TargetEntity>& targets,
                                               const CriterionConfig& cfg,
                                               Assignment* assignment_out = nullptr) {
  QueryPredictionSet preds;
  {
    const Tensor& lv = g.value(logits);
    const Tensor& kv = g.value(keypoints);
    require(lv.rows() == kv.rows() && kv.cols() == kPoseCoords,
            "hungarian_loss: prediction shape mismatch");
    preds.resize(lv.rows());
    for (int qi = 0; qi < lv.rows(); ++qi) {
      preds[qi].class_logits.assign(
          lv.data.begin() + static_cast<size_t>(qi) * lv.cols(),
          lv.data.begin() + static_cast<size_t>(qi + 1) * lv.cols());
      preds[qi].keypoints.assign(
          kv.data.begin() + static_cast<size_t>(qi) * kPoseCoords,
          kv.data.begin() + static_cast<size_t>(qi + 1) * kPoseCoords);
    }
  }
  int q_count = static_cast<int>(preds.size());
  int c_count = static_cast<int>(preds[0].class_logits.size());
  int no_entity = c_count - 1;

  Assignment assignment = solve_assignment(matching_cost(preds, targets, cfg));
  if (assignment_out) *assignment_out = assignment;

  std::vector<int> class_targets(q_count, no_entity);
  std::vector<double> class_weights(q_count, cfg.w_noentity / q_count);
  std::vector<int> matched_rows;
  std::vector<double> matched_targets;
  matched_rows.reserve(assignment.pairs.size());
  for (auto [qi, ti] : assignment.pairs) {
    class_targets[qi] = targets[ti].class_id;
    class_weights[qi] = 1.0 / q_count;
    matched_rows.push_back(qi);
    for (double v : targets[ti].keypoints) matched_targets.push_back(v);
  }

  HungarianLossNodes out;
  out.class_term = g.cross_entropy_rows(logits, class_targets, class_weights);
  NodeId matched = g.gather_rows(keypoints, matched_rows);
  out.keypoint_term = g.mean_abs_diff(
      matched, Tensor({static_cast<int>(assignment.pairs.size()), kPoseCoords},
                      std::move(matched_targets)));
  out.total = g.add(g.scale(out.class_term, cfg.loss_cls), g.scale(out.keypoint_term, cfg.loss_kp));
  return out;
}

// value-level wrapper used for reporting and tests
inline LossBreakdown hungarian_loss(const QueryPredictionSet& preds,
                                    const std::vector<TargetEntity>& targets,
                                    const CriterionConfig& cfg) {
  require(!preds.empty(), "hungarian_loss: no predictions");
  int c_count = static_cast<int>(preds[0].class_logits.size());
  Graph g;
  Tensor logits = Tensor::zeros({static_cast<int>(preds.size()), c_count});
  Tensor kps = Tensor::zeros({static_cast<int>(preds.size()), kPoseCoords});
  for (size_t qi = 0; qi < preds.size(); ++qi) {
    for (int c = 0; c < c_count; ++c) logits.at(static_cast<int>(qi), c) = preds[qi].class_logits[c];
    for (int i = 0; i < kPoseCoords; ++i) kps.at(static_cast<int>(qi), i) = preds[qi].keypoints[i];
  }
  LossBreakdown breakdown;
  HungarianLossNodes nodes = hungarian_loss_nodes(g, g.input(logits), g.input(kps), targets,
                                                  cfg, &breakdown.assignment);
  breakdown.class_loss = g.value(nodes.class_term).data[0];
  breakdown.keypoint_loss = g.value(nodes.keypoint_term).data[0];
  breakdown.total = g.value(nodes.total).data[0];
  return breakdown;
}

}  // namespace egoact
