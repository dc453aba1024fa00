// Built-in oracle suites behind the `selftest` CLI command: Hungarian solver
// vs brute force, gradient checks on both full losses, sampler properties,
// scene geometry invariants, and mirror involution.
#pragma once

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "egoact/train.hpp"

namespace egoact {

struct SelftestReport {
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& name) {
    if (ok) {
      ++passed;
    } else {
      ++failed;
      failures.push_back(name);
    }
  }
  bool all_passed() const { return failed == 0; }
};

namespace selftest_detail {

inline void hungarian_suite(SelftestReport& r) {
  Rng rng(60001);
  bool all_match = true, contract_ok = true;
  for (int trial = 0; trial < 150; ++trial) {
    int rows = rng.int_in(1, 6), cols = rng.int_in(1, 6);
    std::vector<double> costs(static_cast<size_t>(rows) * cols);
    bool integer_costs = trial % 2 == 0;
    for (double& c : costs)
      c = integer_costs ? double(rng.int_in(-9, 9)) : rng.uniform(-4.0, 4.0);
    CostMatrix m(rows, cols, costs);
    Assignment fast = solve_assignment(m);
    Assignment slow = brute_force_assignment(m);
    double tol = integer_costs ? 0.0 : 1e-9;
    all_match = all_match && std::abs(fast.total_cost - slow.total_cost) <= tol;
    contract_ok =
        contract_ok && fast.pairs.size() == static_cast<size_t>(std::min(rows, cols));
  }
  r.check(all_match, "hungarian matches brute force");
  r.check(contract_ok, "hungarian covers min(rows, cols) pairs");

  bool shift_ok = true;
  for (int trial = 0; trial < 30; ++trial) {
    int n = rng.int_in(2, 6);
    std::vector<double> costs(static_cast<size_t>(n) * n);
    for (double& c : costs) c = rng.uniform(-3.0, 3.0);
    CostMatrix m(n, n, costs);
    double base = solve_assignment(m).total_cost;
    int row = rng.int_in(0, n - 1);
    double shift = rng.uniform(-2.0, 2.0);
    for (int c = 0; c < n; ++c) m.at(row, c) += shift;
    shift_ok = shift_ok && std::abs(solve_assignment(m).total_cost - (base + shift)) < 1e-9;
  }
  r.check(shift_ok, "row shifts move the optimum by the constant");
}

inline void gradient_suite(SelftestReport& r) {
  TrainConfig cfg;
  cfg.model_dim = 32;
  cfg.n_heads = 2;
  cfg.ffn_dim = 48;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.recognizer_layers = 1;
  cfg.num_queries = 5;
  cfg.n_clips = 4;
  cfg.scene.grid = {3, 24, 24};
  cfg.scene.t_min = cfg.scene.t_max = 8;

  {
    VideoSample video = generate_video(3, 17, cfg.scene);
    auto targets = targets_from_pose(video.poses[2]);
    const ObservationGrid& grid = video.grids[2];
    ParamStore params;
    Rng init(23);
    init_estimator_params(params, cfg.estimator_config(), init);
    LossFn f = [&](const ParamStore& s) {
      Graph g;
      ParamNodes p(g, s);
      return g.value(estimator_loss_nodes(g, p, grid, targets, cfg, nullptr)).data[0];
    };
    Graph g;
    ParamNodes p(g, params);
    NodeId loss = estimator_loss_nodes(g, p, grid, targets, cfg, nullptr);
    g.backward(loss);
    auto grads = g.named_grads();
    Rng coords(31);
    GradCheckReport rep = check_gradients(f, params, grads, coords, 2, 1e-5);
    r.check(rep.max_rel_error < 1e-4, "estimator loss gradient vs finite differences");
  }
  {
    SceneConfig scfg = cfg.scene;
    scfg.render_grids = false;
    VideoSample video = generate_video(5, 29, scfg);
    RecognizerConfig rcfg = cfg.recognizer_config();
    std::vector<FramePose> poses(video.poses.begin(), video.poses.begin() + rcfg.n_clips);
    std::vector<int> classes(rcfg.n_clips, video.poses[0].object.class_id);
    ParamStore params;
    Rng init(37);
    init_recognizer_params(params, rcfg, init);
    LossFn f = [&](const ParamStore& s) {
      Graph g;
      ParamNodes p(g, s);
      NodeId logits =
          recognizer_forward(g, p, tokenize_frames(g, p, poses, classes, rcfg), rcfg);
      return g.value(g.cross_entropy_rows(logits, {video.action_id}, {1.0})).data[0];
    };
    Graph g;
    ParamNodes p(g, params);
    NodeId logits = recognizer_forward(g, p, tokenize_frames(g, p, poses, classes, rcfg), rcfg);
    g.backward(g.cross_entropy_rows(logits, {video.action_id}, {1.0}));
    auto grads = g.named_grads();
    Rng coords(41);
    GradCheckReport rep = check_gradients(f, params, grads, coords, 2, 1e-5);
    r.check(rep.max_rel_error < 1e-4, "recognizer loss gradient vs finite differences");
  }
}

inline void sampler_suite(SelftestReport& r) {
  Rng rng(71);
  bool contracts = true;
  for (int trial = 0; trial < 2000; ++trial) {
    int t = rng.int_in(1, 300);
    int f = rng.int_in(1, t);
    for (const auto& idx : {sample_uniform(t, f), sample_n_clips_test(t, f),
                            sample_n_clips_train(t, f, rng)}) {
      contracts = contracts && idx.size() == static_cast<size_t>(f);
      for (size_t i = 0; i < idx.size(); ++i) {
        contracts = contracts && idx[i] >= 0 && idx[i] < t;
        if (i > 0) contracts = contracts && idx[i] > idx[i - 1];
      }
    }
  }
  r.check(contracts, "samplers return strictly increasing in-range indices");

  auto centers = sample_n_clips_test(128, 64);
  bool odd = centers.size() == 64;
  for (int i = 0; i < 64 && odd; ++i) odd = centers[i] == 2 * i + 1;
  r.check(odd, "clip centers of T=128, N=64 are the odd indices");

  // pooled chi-squared over 7 clips of 10 frames; df 63, alpha 0.01 -> 92.0
  const int t = 70, n = 7, draws = 20000;
  Rng chi_rng(20240601);
  std::vector<int> counts(t, 0);
  for (int d = 0; d < draws; ++d)
    for (int idx : sample_n_clips_train(t, n, chi_rng)) ++counts[idx];
  double expected = draws / 10.0, chi2 = 0.0;
  for (int i = 0; i < t; ++i) {
    double diff = counts[i] - expected;
    chi2 += diff * diff / expected;
  }
  r.check(chi2 < 92.0, "per-clip draws pass the chi-squared uniformity test");
}

inline void scene_suite(SelftestReport& r) {
  Rng rng(83);
  bool geometry = true;
  for (int trial = 0; trial < 2000; ++trial) {
    Point3 center = {rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
    Point3 he = {rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1)};
    Point3 ypr = {rng.uniform(-3.0, 3.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    ObjectKeypoints obj = make_object_keypoints(center, he, ypr, 0);
    for (int ax = 0; ax < 3; ++ax) {
      double mean = 0.0;
      for (int i = 0; i < 8; ++i) mean += obj.points[i][ax];
      geometry = geometry && std::abs(obj.points[20][ax] - mean / 8.0) < 1e-9;
    }
    for (int e = 0; e < 12; ++e) {
      const auto& [a, b] = kBoxEdges[e];
      for (int ax = 0; ax < 3; ++ax)
        geometry = geometry && std::abs(obj.points[8 + e][ax] -
                                        0.5 * (obj.points[a][ax] + obj.points[b][ax])) < 1e-9;
    }
  }
  r.check(geometry, "object centroid and midpoint invariants");

  SceneConfig cfg;
  cfg.t_min = cfg.t_max = 5;
  cfg.grid = {3, 32, 32};
  bool involution = true, render_match = true;
  for (int trial = 0; trial < 6; ++trial) {
    VideoSample v = generate_video(trial % cfg.k_act, 500 + trial, cfg);
    VideoSample ff = horizontal_flip(horizontal_flip(v));
    for (int f = 0; f < v.length(); ++f) {
      for (int j = 0; j < kHandJointCount; ++j)
        involution = involution && ff.poses[f].left.joints[j] == v.poses[f].left.joints[j];
      ObservationGrid rerender =
          render_frame(horizontal_flip(v.poses[f]), cfg.grid, cfg.splat_sigma_px);
      ObservationGrid mirrored = mirror_grid(v.grids[f]);
      for (size_t i = 0; i < mirrored.values.size(); ++i)
        render_match =
            render_match && std::abs(rerender.values[i] - mirrored.values[i]) < 1e-9;
    }
  }
  r.check(involution, "horizontal flip is an exact involution");
  r.check(render_match, "flip then render equals mirror of render");
}

}  // namespace selftest_detail

inline SelftestReport run_selftest(std::ostream& console) {
  SelftestReport report;
  console << "[selftest] hungarian oracle suite\n";
  selftest_detail::hungarian_suite(report);
  console << "[selftest] gradient check suite\n";
  selftest_detail::gradient_suite(report);
  console << "[selftest] sampler property suite\n";
  selftest_detail::sampler_suite(report);
  console << "[selftest] scene geometry suite\n";
  selftest_detail::scene_suite(report);
  console << "[selftest] " << report.passed << " passed, " << report.failed << " failed\n";
  for (const auto& f : report.failures) console << "[selftest] FAILED: " << f << "\n";
  return report;
}

}  // namespace egoact
