#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "egoact/common.hpp"
#include "egoact/scene.hpp"

using namespace egoact;

namespace {

SceneConfig tiny_config(bool render = false) {
  SceneConfig cfg;
  cfg.t_min = 24;
  cfg.t_max = 32;
  cfg.grid = {3, 32, 32};
  cfg.render_grids = render;
  return cfg;
}

double point_dist(const Point3& a, const Point3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void check_object_invariants(const ObjectKeypoints& obj, double tol) {
  for (int ax = 0; ax < 3; ++ax) {
    double mean = 0.0;
    for (int i = 0; i < 8; ++i) mean += obj.points[i][ax];
    mean /= 8.0;
    CHECK(std::abs(obj.points[20][ax] - mean) < tol);
  }
  for (int e = 0; e < 12; ++e) {
    const auto& [a, b] = kBoxEdges[e];
    for (int ax = 0; ax < 3; ++ax) {
      double mid = 0.5 * (obj.points[a][ax] + obj.points[b][ax]);
      CHECK(std::abs(obj.points[8 + e][ax] - mid) < tol);
    }
  }
}

}  // namespace

TEST_CASE("unit cube object keypoints") {
  ObjectKeypoints obj = make_object_keypoints({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5},
                                              {0.0, 0.0, 0.0}, 0);
  // corners hit every sign combination of 0.5 +/- 0.5
  for (int i = 0; i < 8; ++i) {
    CHECK(obj.points[i][0] == ((i & 4) ? 1.0 : 0.0));
    CHECK(obj.points[i][1] == ((i & 2) ? 1.0 : 0.0));
    CHECK(obj.points[i][2] == ((i & 1) ? 1.0 : 0.0));
  }
  CHECK(obj.points[20][0] == 0.5);
  CHECK(obj.points[20][1] == 0.5);
  CHECK(obj.points[20][2] == 0.5);
  check_object_invariants(obj, 1e-9);
}

TEST_CASE("object keypoints invariants over random poses") {
  Rng rng(314);
  for (int trial = 0; trial < 10000; ++trial) {
    Point3 center = {rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
    Point3 he = {rng.uniform(0.02, 0.12), rng.uniform(0.02, 0.12), rng.uniform(0.02, 0.12)};
    Point3 ypr = {rng.uniform(-3.0, 3.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    check_object_invariants(make_object_keypoints(center, he, ypr, 0), 1e-9);
  }
}

TEST_CASE("quarter-turn yaw matches hand-rotated corner") {
  // Rz(pi/2): (x, y, z) -> (-y, x, z); corner 7 is local (+hx, +hy, +hz)
  Point3 center = {0.5, 0.5, 0.5};
  Point3 he = {0.10, 0.05, 0.02};
  ObjectKeypoints obj =
      make_object_keypoints(center, he, {1.5707963267948966, 0.0, 0.0}, 0);
  CHECK(std::abs(obj.points[7][0] - (0.5 - 0.05)) < 1e-9);
  CHECK(std::abs(obj.points[7][1] - (0.5 + 0.10)) < 1e-9);
  CHECK(std::abs(obj.points[7][2] - (0.5 + 0.02)) < 1e-9);
}

TEST_CASE("degenerate half extents rejected") {
  CHECK_THROWS_AS(make_object_keypoints({0.5, 0.5, 0.5}, {0.0, 0.1, 0.1}, {0, 0, 0}, 0),
                  std::invalid_argument);
  // box poking out of the cube is an error the generator retries on
  CHECK_THROWS_AS(make_object_keypoints({0.95, 0.5, 0.5}, {0.2, 0.1, 0.1}, {0, 0, 0}, 0),
                  std::invalid_argument);
}

TEST_CASE("video generation is deterministic") {
  SceneConfig cfg = tiny_config(true);
  VideoSample a = generate_video(3, 99, cfg);
  VideoSample b = generate_video(3, 99, cfg);
  REQUIRE(a.length() == b.length());
  for (int f = 0; f < a.length(); ++f) {
    for (int j = 0; j < kHandJointCount; ++j)
      for (int ax = 0; ax < 3; ++ax) {
        CHECK(a.poses[f].left.joints[j][ax] == b.poses[f].left.joints[j][ax]);
        CHECK(a.poses[f].right.joints[j][ax] == b.poses[f].right.joints[j][ax]);
      }
    for (int i = 0; i < kObjectPointCount; ++i)
      for (int ax = 0; ax < 3; ++ax)
        CHECK(a.poses[f].object.points[i][ax] == b.poses[f].object.points[i][ax]);
    CHECK(a.grids[f].values == b.grids[f].values);
  }
  VideoSample c = generate_video(3, 100, cfg);
  bool any_diff = c.length() != a.length();
  if (!any_diff)
    any_diff = c.poses[0].object.points[20] != a.poses[0].object.points[20];
  CHECK(any_diff);
}

TEST_CASE("generated poses stay inside the unit cube") {
  SceneConfig cfg = tiny_config();
  Rng seed_rng(5);
  for (int trial = 0; trial < 400; ++trial) {
    int action = trial % cfg.k_act;
    VideoSample v = generate_video(action, seed_rng.next_u64(), cfg);
    REQUIRE(v.length() >= cfg.t_min);
    REQUIRE(v.length() <= cfg.t_max);
    for (const auto& pose : v.poses) {
      for (const auto& p : pose.left.joints)
        for (double x : p) {
          CHECK(x >= 0.0);
          CHECK(x <= 1.0);
        }
      for (const auto& p : pose.right.joints)
        for (double x : p) {
          CHECK(x >= 0.0);
          CHECK(x <= 1.0);
        }
      check_object_invariants(pose.object, 1e-9);
    }
  }
}

TEST_CASE("zero jitter follows the closed-form motion signatures") {
  SceneConfig cfg = tiny_config();
  cfg.jitter = 0.0;
  cfg.t_min = cfg.t_max = 64;

  auto centroid_z = [](const VideoSample& v, int f) { return v.poses[f].object.points[20][2]; };
  auto centroid_y = [](const VideoSample& v, int f) { return v.poses[f].object.points[20][1]; };
  auto centroid_x = [](const VideoSample& v, int f) { return v.poses[f].object.points[20][0]; };
  int last = 63;

  SECTION("lift raises the object") {
    VideoSample v = generate_video(0, 7, cfg);
    CHECK(centroid_z(v, last) - centroid_z(v, 0) > 0.15);
  }
  SECTION("lower sinks the object") {
    VideoSample v = generate_video(1, 7, cfg);
    CHECK(centroid_z(v, 0) - centroid_z(v, last) > 0.15);
  }
  SECTION("shake oscillates in x with no net travel") {
    VideoSample v = generate_video(2, 7, cfg);
    double lo = 1.0, hi = 0.0;
    for (int f = 0; f <= last; ++f) {
      lo = std::min(lo, centroid_x(v, f));
      hi = std::max(hi, centroid_x(v, f));
    }
    CHECK(hi - lo > 0.04);
    CHECK(std::abs(centroid_x(v, last) - centroid_x(v, 0)) < 0.02);
  }
  SECTION("spin rotates corners while the centroid rests") {
    VideoSample v = generate_video(3, 7, cfg);
    CHECK(point_dist(v.poses[0].object.points[20], v.poses[last].object.points[20]) < 0.01);
    CHECK(point_dist(v.poses[0].object.points[0], v.poses[last].object.points[0]) > 0.03);
  }
  SECTION("push travels away, pull comes back") {
    VideoSample push = generate_video(4, 7, cfg);
    VideoSample pull = generate_video(5, 7, cfg);
    CHECK(centroid_y(push, last) - centroid_y(push, 0) > 0.12);
    CHECK(centroid_y(pull, 0) - centroid_y(pull, last) > 0.12);
  }
  SECTION("converge closes hand-object distance, retreat opens it") {
    VideoSample conv = generate_video(6, 7, cfg);
    VideoSample retr = generate_video(7, 7, cfg);
    auto wrist_gap = [&](const VideoSample& v, int f) {
      return point_dist(v.poses[f].left.joints[0], v.poses[f].object.points[20]) +
             point_dist(v.poses[f].right.joints[0], v.poses[f].object.points[20]);
    };
    CHECK(wrist_gap(conv, 0) - wrist_gap(conv, last) > 0.15);
    CHECK(wrist_gap(retr, last) - wrist_gap(retr, 0) > 0.15);
  }
}

TEST_CASE("horizontal flip is an exact involution") {
  SceneConfig cfg = tiny_config(true);
  cfg.t_min = cfg.t_max = 6;
  for (int trial = 0; trial < 20; ++trial) {
    VideoSample v = generate_video(trial % cfg.k_act, 1000 + trial, cfg);
    VideoSample ff = horizontal_flip(horizontal_flip(v));
    REQUIRE(ff.length() == v.length());
    for (int f = 0; f < v.length(); ++f) {
      for (int j = 0; j < kHandJointCount; ++j)
        for (int ax = 0; ax < 3; ++ax) {
          CHECK(ff.poses[f].left.joints[j][ax] == v.poses[f].left.joints[j][ax]);
          CHECK(ff.poses[f].right.joints[j][ax] == v.poses[f].right.joints[j][ax]);
        }
      for (int i = 0; i < kObjectPointCount; ++i)
        for (int ax = 0; ax < 3; ++ax)
          CHECK(ff.poses[f].object.points[i][ax] == v.poses[f].object.points[i][ax]);
      for (size_t i = 0; i < v.grids[f].values.size(); ++i)
        CHECK(std::abs(ff.grids[f].values[i] - v.grids[f].values[i]) < 1e-9);
    }
    CHECK(ff.action_id == v.action_id);
  }
}

TEST_CASE("flip swaps hand roles") {
  // mirror exactness is guaranteed on the quantized coordinate grid
  FramePose pose;
  pose.left.side = HandSide::kLeft;
  pose.right.side = HandSide::kRight;
  for (auto& p : pose.left.joints) p = {quantize_coord(0.2), 0.4, 0.3};
  for (auto& p : pose.right.joints) p = {quantize_coord(0.7), 0.4, 0.3};
  pose.object = make_object_keypoints({0.5, 0.5, 0.5}, {0.05, 0.05, 0.05}, {0, 0, 0}, 2);
  FramePose flipped = horizontal_flip(pose);
  CHECK(flipped.right.side == HandSide::kRight);
  CHECK(flipped.right.joints[0][0] == 1.0 - quantize_coord(0.2));  // old left hand
  CHECK(flipped.left.joints[0][0] == 1.0 - quantize_coord(0.7));   // old right hand
  CHECK(flipped.right.joints[0][0] == Catch::Approx(0.8).margin(1e-9));
  CHECK(flipped.left.joints[0][0] == Catch::Approx(0.3).margin(1e-9));
  CHECK(flipped.object.class_id == 2);
}

TEST_CASE("re-render of flipped pose equals mirrored render") {
  SceneConfig cfg = tiny_config(true);
  cfg.t_min = cfg.t_max = 4;
  for (int trial = 0; trial < 8; ++trial) {
    VideoSample v = generate_video(trial, 40 + trial, cfg);
    for (int f = 0; f < v.length(); ++f) {
      ObservationGrid rerendered =
          render_frame(horizontal_flip(v.poses[f]), cfg.grid, cfg.splat_sigma_px);
      ObservationGrid mirrored = mirror_grid(v.grids[f]);
      REQUIRE(rerendered.values.size() == mirrored.values.size());
      for (size_t i = 0; i < mirrored.values.size(); ++i)
        CHECK(std::abs(rerendered.values[i] - mirrored.values[i]) < 1e-9);
    }
  }
}

TEST_CASE("render projection and depth coding") {
  FramePose pose;
  // park everything except one left-hand joint far from the probe pixel
  for (auto& p : pose.left.joints) p = {0.1, 0.1, 0.0};
  for (auto& p : pose.right.joints) p = {0.9, 0.1, 0.0};
  for (auto& p : pose.object.points) p = {0.9, 0.9, 0.0};
  pose.left.joints[0] = {0.5, 0.5, 0.0};

  GridShape shape{3, 48, 48};
  SECTION("probe splat peaks at the projected pixel") {
    // scan a window around the probe; the parked joints sit near pixel 4
    ObservationGrid g = render_frame(pose, shape, 1.5);
    double max_val = 0.0;
    for (int y = 14; y < 34; ++y)
      for (int x = 14; x < 34; ++x) max_val = std::max(max_val, g.at(0, y, x));
    CHECK(g.at(0, 24, 24) == max_val);
    CHECK(max_val > 0.0);
    CHECK(g.at(1, 24, 24) == 0.0);  // other channels untouched at the probe
    CHECK(g.at(2, 24, 24) == 0.0);
  }
  SECTION("peak intensity halves from z=1 to z=0") {
    ObservationGrid g0 = render_frame(pose, shape, 1.5);
    pose.left.joints[0][2] = 1.0;
    ObservationGrid g1 = render_frame(pose, shape, 1.5);
    CHECK(g1.at(0, 24, 24) < 1.0);  // no clamping at the probe
    CHECK(g0.at(0, 24, 24) == Catch::Approx(0.5 * g1.at(0, 24, 24)).epsilon(1e-12));
  }
  SECTION("values stay in [0,1] even with stacked splats") {
    FramePose stacked;
    for (auto& p : stacked.left.joints) p = {0.5, 0.5, 1.0};
    for (auto& p : stacked.right.joints) p = {0.5, 0.5, 1.0};
    for (auto& p : stacked.object.points) p = {0.5, 0.5, 1.0};
    ObservationGrid g = render_frame(stacked, shape, 1.5);
    for (double v : g.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(g.at(0, 24, 24) == 1.0);  // 21 stacked splats clamp at the cap
  }
}

TEST_CASE("mean-displacement nearest-centroid oracle separates classes") {
  // Baseline learnability calibration: 100 samples per class, split 50/50
  // into centroid-fitting and evaluation halves.
  SceneConfig cfg;
  cfg.render_grids = false;
  const int per_class = 100;
  const int feat_dim = 18;

  auto featurize = [&](const VideoSample& v) {
    std::vector<double> f(feat_dim, 0.0);
    int t = v.length();
    auto entity_point = [&](int frame, int entity, int point) -> const Point3& {
      const FramePose& p = v.poses[frame];
      if (entity == 0) return p.left.joints[point];
      if (entity == 1) return p.right.joints[point];
      return p.object.points[point];
    };
    for (int e = 0; e < 3; ++e) {
      int count = 21;
      for (int ax = 0; ax < 3; ++ax) {
        double net = 0.0;
        for (int pt = 0; pt < count; ++pt)
          net += entity_point(t - 1, e, pt)[ax] - entity_point(0, e, pt)[ax];
        f[e * 3 + ax] = net / count;
        double path = 0.0;
        for (int fr = 1; fr < t; ++fr)
          for (int pt = 0; pt < count; ++pt)
            path += std::abs(entity_point(fr, e, pt)[ax] - entity_point(fr - 1, e, pt)[ax]);
        f[9 + e * 3 + ax] = path / (count * (t - 1));
      }
    }
    return f;
  };

  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  Rng seed_rng(424242);
  for (int c = 0; c < cfg.k_act; ++c)
    for (int i = 0; i < per_class; ++i) {
      VideoSample v = generate_video(c, seed_rng.next_u64(), cfg);
      features.push_back(featurize(v));
      labels.push_back(c);
    }

  // standardize dimensions over the fitting half
  std::vector<double> mean(feat_dim, 0.0), std(feat_dim, 0.0);
  int fit_count = 0;
  for (size_t i = 0; i < features.size(); ++i) {
    if (static_cast<int>(i) % per_class >= per_class / 2) continue;
    for (int d = 0; d < feat_dim; ++d) mean[d] += features[i][d];
    ++fit_count;
  }
  for (int d = 0; d < feat_dim; ++d) mean[d] /= fit_count;
  for (size_t i = 0; i < features.size(); ++i) {
    if (static_cast<int>(i) % per_class >= per_class / 2) continue;
    for (int d = 0; d < feat_dim; ++d) {
      double diff = features[i][d] - mean[d];
      std[d] += diff * diff;
    }
  }
  for (int d = 0; d < feat_dim; ++d) std[d] = std::sqrt(std[d] / fit_count) + 1e-9;

  std::vector<std::vector<double>> centroids(cfg.k_act, std::vector<double>(feat_dim, 0.0));
  std::vector<int> counts(cfg.k_act, 0);
  for (size_t i = 0; i < features.size(); ++i) {
    if (static_cast<int>(i) % per_class >= per_class / 2) continue;
    for (int d = 0; d < feat_dim; ++d)
      centroids[labels[i]][d] += (features[i][d] - mean[d]) / std[d];
    ++counts[labels[i]];
  }
  for (int c = 0; c < cfg.k_act; ++c)
    for (int d = 0; d < feat_dim; ++d) centroids[c][d] /= counts[c];

  int correct = 0, total = 0;
  for (size_t i = 0; i < features.size(); ++i) {
    if (static_cast<int>(i) % per_class < per_class / 2) continue;
    double best = 1e300;
    int best_c = -1;
    for (int c = 0; c < cfg.k_act; ++c) {
      double dist = 0.0;
      for (int d = 0; d < feat_dim; ++d) {
        double diff = (features[i][d] - mean[d]) / std[d] - centroids[c][d];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        best_c = c;
      }
    }
    correct += best_c == labels[i] ? 1 : 0;
    ++total;
  }
  double acc = double(correct) / total;
  INFO("nearest-centroid accuracy = " << acc);
  CHECK(acc > 0.80);
}
