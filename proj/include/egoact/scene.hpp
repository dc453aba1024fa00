// Procedural two-hands-plus-object scenes with ground-truth keypoints.
//
// Coordinates live in the normalized cube [0,1]^3 and are snapped to a 2^-32
// grid (see quantize_coord) so horizontal mirroring is exact. Conventions:
//   - Hand joints (21): wrist, then thumb/index/middle/ring/pinky with four
//     joints each, base to tip.
//   - Object keypoints (21): 8 box corners indexed by sign bits
//     (bit2 -> +x, bit1 -> +y, bit0 -> +z), then 12 edge midpoints in the
//     order given by kBoxEdges, then the centroid.
//   - Rotations are yaw-pitch-roll: R = Rz(yaw) * Ry(pitch) * Rx(roll).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "egoact/common.hpp"

namespace egoact {

using Point3 = std::array<double, 3>;

constexpr int kHandJointCount = 21;
constexpr int kObjectPointCount = 21;
constexpr int kPoseCoords = 63;  // 21 points * 3

enum class HandSide { kLeft, kRight };

struct HandKeypoints {
  std::array<Point3, kHandJointCount> joints{};
  HandSide side = HandSide::kLeft;
};

struct ObjectKeypoints {
  std::array<Point3, kObjectPointCount> points{};
  int class_id = 0;
};

struct FramePose {
  HandKeypoints left;
  HandKeypoints right;
  ObjectKeypoints object;
};

struct GridShape {
  int channels = 3;
  int height = 48;
  int width = 48;
  std::int64_t numel() const {
    return static_cast<std::int64_t>(channels) * height * width;
  }
  bool operator==(const GridShape&) const = default;
};

struct ObservationGrid {
  GridShape shape;
  std::vector<double> values;  // channel-major, row-major within a channel

  double& at(int c, int y, int x) {
    return values[(static_cast<size_t>(c) * shape.height + y) * shape.width + x];
  }
  double at(int c, int y, int x) const {
    return values[(static_cast<size_t>(c) * shape.height + y) * shape.width + x];
  }
};

struct VideoSample {
  std::string id;
  std::vector<FramePose> poses;
  std::vector<ObservationGrid> grids;  // empty when rendering is skipped
  int action_id = 0;
  int length() const { return static_cast<int>(poses.size()); }
};

struct SceneConfig {
  int k_act = 8;
  int k_obj = 4;
  int t_min = 96;
  int t_max = 160;
  double jitter = 0.01;
  GridShape grid;
  double splat_sigma_px = 1.5;
  bool render_grids = true;
};

// edge k joins corners kBoxEdges[k].first/second; 4 edges along x, y, z each
constexpr std::array<std::pair<int, int>, 12> kBoxEdges = {{
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // along x
    {0, 2}, {1, 3}, {4, 6}, {5, 7},  // along y
    {0, 1}, {2, 3}, {4, 5}, {6, 7},  // along z
}};

inline const std::array<std::string, 8>& action_class_names() {
  static const std::array<std::string, 8> names = {
      "lift", "lower", "shake", "spin", "push", "pull", "converge", "retreat"};
  return names;
}

inline const std::array<std::string, 4>& object_class_names() {
  static const std::array<std::string, 4> names = {"cube", "slab", "rod", "block"};
  return names;
}

namespace detail {

struct Rot3 {
  std::array<std::array<double, 3>, 3> m;
  Point3 apply(const Point3& p) const {
    return {m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2],
            m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2],
            m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2]};
  }
};

inline Rot3 rotation_ypr(double yaw, double pitch, double roll) {
  double cy = std::cos(yaw), sy = std::sin(yaw);
  double cp = std::cos(pitch), sp = std::sin(pitch);
  double cr = std::cos(roll), sr = std::sin(roll);
  // Rz(yaw) * Ry(pitch) * Rx(roll)
  Rot3 r;
  r.m[0] = {cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr};
  r.m[1] = {sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr};
  r.m[2] = {-sp, cp * sr, cp * cr};
  return r;
}

inline double smoothstep(double p) {
  p = std::clamp(p, 0.0, 1.0);
  return p * p * (3.0 - 2.0 * p);
}

}  // namespace detail

// Box keypoints in the canonical 8 corners + 12 edge midpoints + centroid
// layout. Throws when any point leaves the unit cube; generate_video retries
// with smaller motion in that case.
inline ObjectKeypoints make_object_keypoints(const Point3& center, const Point3& half_extents,
                                             const Point3& yaw_pitch_roll, int class_id) {
  require(half_extents[0] > 0 && half_extents[1] > 0 && half_extents[2] > 0,
          "make_object_keypoints: half extents must be positive");
  detail::Rot3 rot =
      detail::rotation_ypr(yaw_pitch_roll[0], yaw_pitch_roll[1], yaw_pitch_roll[2]);
  ObjectKeypoints out;
  out.class_id = class_id;
  for (int i = 0; i < 8; ++i) {
    Point3 local = {(i & 4) ? half_extents[0] : -half_extents[0],
                    (i & 2) ? half_extents[1] : -half_extents[1],
                    (i & 1) ? half_extents[2] : -half_extents[2]};
    Point3 world = rot.apply(local);
    for (int a = 0; a < 3; ++a) world[a] += center[a];
    out.points[i] = world;
  }
  for (int e = 0; e < 12; ++e) {
    const auto& [a, b] = kBoxEdges[e];
    for (int ax = 0; ax < 3; ++ax)
      out.points[8 + e][ax] = 0.5 * (out.points[a][ax] + out.points[b][ax]);
  }
  out.points[20] = center;
  for (auto& p : out.points)
    for (double& v : p) {
      v = quantize_coord(v);
      require(v >= 0.0 && v <= 1.0, "make_object_keypoints: point outside unit cube");
    }
  return out;
}

namespace detail {

// Right-hand template around the palm center; left hands mirror x. Wrist
// first, then four joints per finger, base to tip.
inline const std::array<Point3, kHandJointCount>& hand_template() {
  static const std::array<Point3, kHandJointCount> t = {{
      {0.000, -0.040, -0.005},                                                      // wrist
      {-0.030, -0.015, 0.004}, {-0.042, 0.000, 0.003}, {-0.050, 0.012, 0.001}, {-0.055, 0.022, 0.000},  // thumb
      {-0.022, 0.012, 0.004},  {-0.024, 0.028, 0.002}, {-0.025, 0.044, 0.001}, {-0.026, 0.058, 0.000},  // index
      {-0.007, 0.014, 0.004},  {-0.007, 0.032, 0.002}, {-0.008, 0.050, 0.001}, {-0.008, 0.066, 0.000},  // middle
      {0.008, 0.012, 0.004},   {0.008, 0.028, 0.002},  {0.009, 0.046, 0.001},  {0.009, 0.060, 0.000},   // ring
      {0.022, 0.008, 0.004},   {0.023, 0.022, 0.002},  {0.024, 0.036, 0.001},  {0.025, 0.048, 0.000},   // pinky
  }};
  return t;
}

struct HandPlacement {
  Point3 palm;       // palm center in scene coordinates
  double yaw = 0.0;  // rotation about z
  double scale = 1.0;
};

inline HandKeypoints place_hand(const HandPlacement& hp, HandSide side, Rng& rng,
                                double jitter) {
  HandKeypoints out;
  out.side = side;
  Rot3 rot = rotation_ypr(hp.yaw, 0.0, 0.0);
  const auto& tmpl = hand_template();
  for (int j = 0; j < kHandJointCount; ++j) {
    Point3 local = tmpl[j];
    if (side == HandSide::kLeft) local[0] = -local[0];
    for (double& v : local) v *= hp.scale;
    Point3 world = rot.apply(local);
    for (int a = 0; a < 3; ++a) world[a] += hp.palm[a];
    for (double& v : world) v += (jitter > 0.0 ? rng.normal(0.0, jitter) : 0.0);
    for (double& v : world) v = quantize_coord(v);
    out.joints[j] = world;
  }
  return out;
}

inline bool hand_in_bounds(const HandKeypoints& h) {
  for (const auto& p : h.joints)
    for (double v : p)
      if (v < 0.0 || v > 1.0) return false;
  return true;
}

}  // namespace detail

// Gaussian splat render: one channel per entity (0 left hand, 1 right hand,
// 2 object). Splat amplitude is (0.5 + 0.5 z) for every entity so depth is
// recoverable from intensity; overlapping splats sum and clamp to [0,1].
inline ObservationGrid render_frame(const FramePose& pose, const GridShape& shape,
                                    double sigma_px) {
  ObservationGrid grid;
  grid.shape = shape;
  grid.values.assign(static_cast<size_t>(shape.numel()), 0.0);
  require(shape.channels == 3, "render_frame: expected 3 channels");
  const double inv2s2 = 1.0 / (2.0 * sigma_px * sigma_px);
  const int radius = static_cast<int>(std::ceil(4.0 * sigma_px));

  auto splat = [&](int channel, const Point3& p) {
    double cx = p[0] * shape.width - 0.5;
    double cy = p[1] * shape.height - 0.5;
    double amp = 0.5 + 0.5 * p[2];
    int x0 = std::max(0, static_cast<int>(std::floor(cx)) - radius);
    int x1 = std::min(shape.width - 1, static_cast<int>(std::ceil(cx)) + radius);
    int y0 = std::max(0, static_cast<int>(std::floor(cy)) - radius);
    int y1 = std::min(shape.height - 1, static_cast<int>(std::ceil(cy)) + radius);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        double dx = x - cx, dy = y - cy;
        grid.at(channel, y, x) += amp * std::exp(-(dx * dx + dy * dy) * inv2s2);
      }
  };

  for (const auto& p : pose.left.joints) splat(0, p);
  for (const auto& p : pose.right.joints) splat(1, p);
  for (const auto& p : pose.object.points) splat(2, p);
  for (double& v : grid.values) v = std::min(v, 1.0);
  return grid;
}

// x -> 1 - x on every keypoint; exact on the quantized grid
inline Point3 mirror_x(const Point3& p) { return {1.0 - p[0], p[1], p[2]}; }

inline HandKeypoints flip_hand(const HandKeypoints& h, HandSide new_side) {
  HandKeypoints out;
  out.side = new_side;
  for (int j = 0; j < kHandJointCount; ++j) out.joints[j] = mirror_x(h.joints[j]);
  return out;
}

inline FramePose horizontal_flip(const FramePose& pose) {
  FramePose out;
  out.left = flip_hand(pose.right, HandSide::kLeft);
  out.right = flip_hand(pose.left, HandSide::kRight);
  out.object.class_id = pose.object.class_id;
  for (int i = 0; i < kObjectPointCount; ++i)
    out.object.points[i] = mirror_x(pose.object.points[i]);
  return out;
}

// mirror columns and swap the two hand channels
inline ObservationGrid mirror_grid(const ObservationGrid& g) {
  ObservationGrid out;
  out.shape = g.shape;
  out.values.assign(g.values.size(), 0.0);
  for (int c = 0; c < g.shape.channels; ++c) {
    int src = c == 0 ? 1 : (c == 1 ? 0 : c);
    for (int y = 0; y < g.shape.height; ++y)
      for (int x = 0; x < g.shape.width; ++x)
        out.at(c, y, x) = g.at(src, y, g.shape.width - 1 - x);
  }
  return out;
}

// Mirrors keypoints (hands swap sides), mirrors grids, keeps the label.
inline VideoSample horizontal_flip(const VideoSample& v) {
  VideoSample out;
  out.id = v.id;
  out.action_id = v.action_id;
  out.poses.reserve(v.poses.size());
  for (const auto& p : v.poses) out.poses.push_back(horizontal_flip(p));
  out.grids.reserve(v.grids.size());
  for (const auto& g : v.grids) out.grids.push_back(mirror_grid(g));
  return out;
}

namespace detail {

// all per-video randomness drawn up front so motion is a closed-form path
struct VideoLatents {
  int t = 0;
  int object_class = 0;
  Point3 obj_start{};
  Point3 half_extents{};
  double obj_yaw = 0.0;
  double hand_scale = 1.0;
  bool right_acts = true;
  double event_start = 0.2;
  double event_end = 0.8;
  double spin_dir = 1.0;
  double spin_turns = 1.0;
  double shake_cycles = 2.0;
  double shake_amp = 0.06;
  double idle_phase = 0.0;
  double wander_phase = 0.0;
  double travel = 1.0;  // amplitude multiplier, shrunk on retries
};

inline VideoLatents draw_latents(int action_id, const SceneConfig& cfg, Rng& rng,
                                 double amplitude) {
  VideoLatents lat;
  lat.t = cfg.t_min + static_cast<int>(rng.bounded(
                          static_cast<std::uint64_t>(cfg.t_max - cfg.t_min + 1)));
  lat.object_class = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(cfg.k_obj)));
  lat.obj_start = {0.40 + 0.20 * rng.uniform(), 0.42 + 0.13 * rng.uniform(),
                   0.24 + 0.16 * rng.uniform()};
  // object classes differ by box proportions so shape identifies the class
  static constexpr std::array<Point3, 4> kBaseExtents = {{
      {0.050, 0.050, 0.050},  // cube
      {0.075, 0.075, 0.022},  // slab
      {0.095, 0.028, 0.028},  // rod
      {0.038, 0.038, 0.085},  // block
  }};
  Point3 base = kBaseExtents[lat.object_class % 4];
  double size_scale = rng.uniform(0.85, 1.15);
  for (int a = 0; a < 3; ++a) lat.half_extents[a] = base[a] * size_scale;
  lat.obj_yaw = rng.uniform(-0.35, 0.35);
  lat.hand_scale = rng.uniform(0.85, 1.05);
  lat.right_acts = rng.coin(0.5);
  lat.event_start = rng.uniform(0.08, 0.22);
  lat.event_end = rng.uniform(0.78, 0.92);
  lat.spin_dir = rng.coin(0.5) ? 1.0 : -1.0;
  lat.spin_turns = rng.uniform(0.60, 0.85);  // fraction of a full turn, never wrapping
  lat.shake_cycles = rng.coin(0.5) ? 2.0 : 3.0;
  lat.shake_amp = rng.uniform(0.07, 0.10);
  lat.idle_phase = rng.uniform(0.0, 6.283185307179586);
  lat.wander_phase = rng.uniform(0.0, 6.283185307179586);
  lat.travel = amplitude;
  // pull starts displaced so the motion has room to come back
  if (action_id == 5) lat.obj_start[1] += 0.20 * amplitude;
  if (action_id == 1) lat.obj_start[2] += 0.22 * amplitude;  // lower starts high
  return lat;
}

struct ObjectState {
  Point3 center;
  double yaw;
  double roll;
};

// closed-form object pose at progress u in [0,1] through the video
inline ObjectState object_state_at(int action_id, const VideoLatents& lat, double u) {
  double p = smoothstep((u - lat.event_start) / (lat.event_end - lat.event_start));
  ObjectState st{lat.obj_start, lat.obj_yaw, 0.0};
  const double a = lat.travel;
  switch (action_id) {
    case 0:  // lift: rises and tilts slightly
      st.center[2] += 0.22 * a * p;
      st.roll = 0.25 * a * p;
      break;
    case 1:  // lower: starts high, descends
      st.center[2] -= 0.22 * a * p;
      st.roll = -0.20 * a * p;
      break;
    case 2: {  // shake: lateral oscillation under a smooth envelope
      double env = std::sin(3.141592653589793 * std::clamp(u, 0.0, 1.0));
      st.center[0] += lat.shake_amp * a * env *
                      std::sin(6.283185307179586 * lat.shake_cycles * p);
      break;
    }
    case 3:  // spin: yaw rotation in place
      st.yaw += lat.spin_dir * lat.spin_turns * 6.283185307179586 * p;
      break;
    case 4:  // push: travels away (+y)
      st.center[1] += 0.20 * a * p;
      break;
    case 5:  // pull: travels toward the viewer (-y)
      st.center[1] -= 0.20 * a * p;
      break;
    default:  // converge/retreat: object rests
      break;
  }
  return st;
}

// hand palm targets at progress u; returns left and right placements
inline std::pair<HandPlacement, HandPlacement> hand_states_at(int action_id,
                                                              const VideoLatents& lat,
                                                              const ObjectState& obj,
                                                              double u) {
  const double a = lat.travel;
  double p = smoothstep((u - lat.event_start) / (lat.event_end - lat.event_start));
  // approach runs before the event window opens
  double approach = smoothstep(u / std::max(lat.event_start, 1e-9));

  Point3 left_rest = {lat.obj_start[0] - 0.24 * a, lat.obj_start[1] - 0.04,
                      lat.obj_start[2] + 0.10};
  Point3 right_rest = {lat.obj_start[0] + 0.24 * a, lat.obj_start[1] - 0.04,
                       lat.obj_start[2] + 0.10};
  // grip sits just above the box top
  double grip_dz = lat.half_extents[2] + 0.035;

  auto wander = [&](const Point3& rest, double phase) {
    Point3 out = rest;
    out[0] += 0.015 * std::cos(6.283185307179586 * u + phase);
    out[1] += 0.015 * std::sin(6.283185307179586 * u + phase);
    return out;
  };
  auto toward = [&](const Point3& from, const Point3& to, double w) {
    Point3 out;
    for (int ax = 0; ax < 3; ++ax) out[ax] = from[ax] + (to[ax] - from[ax]) * w;
    return out;
  };

  Point3 grip = {obj.center[0], obj.center[1] - 0.01, obj.center[2] + grip_dz};

  HandPlacement left{wander(left_rest, lat.idle_phase), 0.25, lat.hand_scale};
  HandPlacement right{wander(right_rest, lat.wander_phase), -0.25, lat.hand_scale};

  switch (action_id) {
    case 6: {  // converge: both hands close in on the object flanks
      Point3 lflank = {obj.center[0] - lat.half_extents[0] - 0.045, obj.center[1],
                       obj.center[2]};
      Point3 rflank = {obj.center[0] + lat.half_extents[0] + 0.045, obj.center[1],
                       obj.center[2]};
      left.palm = toward(wander(left_rest, lat.idle_phase), lflank, p);
      right.palm = toward(wander(right_rest, lat.wander_phase), rflank, p);
      break;
    }
    case 7: {  // retreat: reverse of converge
      Point3 lflank = {obj.center[0] - lat.half_extents[0] - 0.045, obj.center[1],
                       obj.center[2]};
      Point3 rflank = {obj.center[0] + lat.half_extents[0] + 0.045, obj.center[1],
                       obj.center[2]};
      left.palm = toward(lflank, wander(left_rest, lat.idle_phase), p);
      right.palm = toward(rflank, wander(right_rest, lat.wander_phase), p);
      break;
    }
    case 3: {  // spin: acting hand circles above the object
      HandPlacement& act = lat.right_acts ? right : left;
      double theta = lat.spin_dir * lat.spin_turns * 6.283185307179586 * p;
      Point3 orbit = {obj.center[0] + 0.07 * std::cos(theta),
                      obj.center[1] + 0.07 * std::sin(theta), obj.center[2] + grip_dz};
      const Point3& rest = lat.right_acts ? right_rest : left_rest;
      act.palm = toward(wander(rest, lat.wander_phase), orbit, approach);
      break;
    }
    default: {  // single acting hand rides the grip point
      HandPlacement& act = lat.right_acts ? right : left;
      const Point3& rest = lat.right_acts ? right_rest : left_rest;
      act.palm = toward(wander(rest, lat.wander_phase), grip, approach);
      break;
    }
  }
  return {left, right};
}

}  // namespace detail

// Deterministic function of (action_id, seed, config). Hands and the object
// follow the per-class parametric motions above with Gaussian jitter; the
// whole video is re-drawn with smaller motion if anything leaves the cube.
inline VideoSample generate_video(int action_id, std::uint64_t seed, const SceneConfig& cfg) {
  require(action_id >= 0 && action_id < cfg.k_act, "generate_video: action_id out of range");
  require(cfg.t_min >= 1 && cfg.t_max >= cfg.t_min, "generate_video: bad T range");

  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng rng(seed * 1000003ULL + static_cast<std::uint64_t>(action_id) * 7919ULL +
            static_cast<std::uint64_t>(attempt) * 104729ULL);
    double amplitude = std::pow(0.85, attempt);
    detail::VideoLatents lat = detail::draw_latents(action_id, cfg, rng, amplitude);

    VideoSample video;
    video.action_id = action_id;
    video.poses.reserve(lat.t);
    bool ok = true;

    for (int f = 0; f < lat.t && ok; ++f) {
      double u = lat.t == 1 ? 0.0 : static_cast<double>(f) / (lat.t - 1);
      detail::ObjectState obj = detail::object_state_at(action_id, lat, u);
      auto [left, right] = detail::hand_states_at(action_id, lat, obj, u);

      // jitter perturbs poses, not individual object points, so the box
      // geometry invariants stay exact
      if (cfg.jitter > 0.0) {
        for (int a = 0; a < 3; ++a) obj.center[a] += rng.normal(0.0, cfg.jitter);
        obj.yaw += rng.normal(0.0, cfg.jitter);
      }

      FramePose pose;
      try {
        pose.object =
            make_object_keypoints(obj.center, lat.half_extents, {obj.yaw, 0.0, obj.roll},
                                  lat.object_class);
      } catch (const std::invalid_argument&) {
        ok = false;
        break;
      }
      pose.left = detail::place_hand(left, HandSide::kLeft, rng, cfg.jitter);
      pose.right = detail::place_hand(right, HandSide::kRight, rng, cfg.jitter);
      if (!detail::hand_in_bounds(pose.left) || !detail::hand_in_bounds(pose.right)) {
        ok = false;
        break;
      }
      video.poses.push_back(pose);
    }

    if (!ok) continue;
    if (cfg.render_grids) {
      video.grids.reserve(video.poses.size());
      for (const auto& pose : video.poses)
        video.grids.push_back(render_frame(pose, cfg.grid, cfg.splat_sigma_px));
    }
    return video;
  }
  throw std::runtime_error("generate_video: could not keep poses in bounds");
}

}  // namespace egoact
