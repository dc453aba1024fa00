// Evaluation metrics: top-1 accuracy, MPJPE, mean-pose baseline, confusion.
#pragma once

#include <cmath>
#include <vector>

#include "egoact/scene.hpp"

namespace egoact {

inline double evaluate_top1(const std::vector<int>& predictions, const std::vector<int>& labels) {
  require(!predictions.empty(), "evaluate_top1: empty input");
  require(predictions.size() == labels.size(), "evaluate_top1: length mismatch");
  int correct = 0;
  for (size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

// mean Euclidean error over all 63 points of one frame
inline double frame_mpjpe(const FramePose& pred, const FramePose& gt) {
  auto dist = [](const Point3& a, const Point3& b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };
  double sum = 0.0;
  for (int j = 0; j < kHandJointCount; ++j) {
    sum += dist(pred.left.joints[j], gt.left.joints[j]);
    sum += dist(pred.right.joints[j], gt.right.joints[j]);
  }
  for (int i = 0; i < kObjectPointCount; ++i)
    sum += dist(pred.object.points[i], gt.object.points[i]);
  return sum / (2 * kHandJointCount + kObjectPointCount);
}

inline double evaluate_mpjpe(const std::vector<FramePose>& pred,
                             const std::vector<FramePose>& gt) {
  require(pred.size() == gt.size(), "evaluate_mpjpe: length mismatch");
  require(!pred.empty(), "evaluate_mpjpe: empty input");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) sum += frame_mpjpe(pred[i], gt[i]);
  return sum / static_cast<double>(pred.size());
}

// constant predictor: the per-point mean over a set of training poses
inline FramePose mean_pose(const std::vector<FramePose>& poses) {
  require(!poses.empty(), "mean_pose: empty input");
  FramePose mean;
  mean.left.side = HandSide::kLeft;
  mean.right.side = HandSide::kRight;
  auto add_scaled = [](Point3& acc, const Point3& p, double w) {
    for (int i = 0; i < 3; ++i) acc[i] += w * p[i];
  };
  double w = 1.0 / static_cast<double>(poses.size());
  for (const auto& pose : poses) {
    for (int j = 0; j < kHandJointCount; ++j) {
      add_scaled(mean.left.joints[j], pose.left.joints[j], w);
      add_scaled(mean.right.joints[j], pose.right.joints[j], w);
    }
    for (int i = 0; i < kObjectPointCount; ++i)
      add_scaled(mean.object.points[i], pose.object.points[i], w);
  }
  return mean;
}

struct ConfusionMatrix {
  int k = 0;
  std::vector<int> counts;  // k x k, row = true label, col = prediction

  explicit ConfusionMatrix(int classes = 0) : k(classes), counts(static_cast<size_t>(classes) * classes, 0) {}
  void add(int truth, int pred) { ++counts[static_cast<size_t>(truth) * k + pred]; }
  int at(int truth, int pred) const { return counts[static_cast<size_t>(truth) * k + pred]; }
};

}  // namespace egoact
