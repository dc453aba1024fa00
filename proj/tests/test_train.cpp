#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "egoact/train.hpp"

using namespace egoact;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("egoact_train_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(bool(is));
  return std::string(std::istreambuf_iterator<char>(is), {});
}

// small model + small scene so whole training runs finish in seconds
TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.model_dim = 32;
  cfg.n_heads = 2;
  cfg.ffn_dim = 48;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.recognizer_layers = 1;
  cfg.num_queries = 5;
  cfg.n_clips = 8;
  cfg.val_frames_per_video = 3;
  cfg.estimator_frames_per_video = 1;
  cfg.scene.t_min = 10;
  cfg.scene.t_max = 14;
  cfg.scene.grid = {3, 24, 24};
  cfg.train_count = 8;
  cfg.val_count = 4;
  cfg.test_count = 4;
  return cfg;
}

FramePose random_scene_pose(std::uint64_t seed) {
  SceneConfig scfg;
  scfg.t_min = scfg.t_max = 2;
  scfg.render_grids = false;
  return generate_video(0, seed, scfg).poses[0];
}

}  // namespace

TEST_CASE("top-1 metric") {
  CHECK(evaluate_top1({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(evaluate_top1({0, 1, 2}, {0, 1, 3}) == Catch::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(evaluate_top1({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_top1({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("mpjpe metric") {
  FramePose a = random_scene_pose(1);
  SECTION("identical poses give zero") {
    CHECK(evaluate_mpjpe({a}, {a}) == 0.0);
  }
  SECTION("uniform x offset of 0.1 gives 0.1") {
    FramePose b = a;
    for (auto& p : b.left.joints) p[0] += 0.1;
    for (auto& p : b.right.joints) p[0] += 0.1;
    for (auto& p : b.object.points) p[0] += 0.1;
    CHECK(evaluate_mpjpe({b}, {a}) == Catch::Approx(0.1).epsilon(1e-12));
  }
  SECTION("matches an independent recomputation on random pose pairs") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
      FramePose x = random_scene_pose(100 + trial);
      FramePose y = random_scene_pose(200 + trial);
      // one-line oracle: mean over the 63 point pairs of euclidean distance
      double expected = 0.0;
      auto acc = [&](const Point3& p, const Point3& q) {
        expected += std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) +
                              (p[2] - q[2]) * (p[2] - q[2]));
      };
      for (int j = 0; j < 21; ++j) acc(x.left.joints[j], y.left.joints[j]);
      for (int j = 0; j < 21; ++j) acc(x.right.joints[j], y.right.joints[j]);
      for (int j = 0; j < 21; ++j) acc(x.object.points[j], y.object.points[j]);
      expected /= 63.0;
      CHECK(std::abs(evaluate_mpjpe({x}, {y}) - expected) < 1e-12);
    }
  }
  SECTION("length mismatch rejected") {
    CHECK_THROWS_AS(evaluate_mpjpe({a}, {}), std::invalid_argument);
  }
}

TEST_CASE("estimator loss memorizes a single frame") {
  // sanity fit: loss below 0.01 within 500 steps on one frame
  TrainConfig cfg = tiny_config();
  SceneConfig scfg = cfg.scene;
  scfg.t_min = scfg.t_max = 4;
  VideoSample video = generate_video(2, 77, scfg);
  const ObservationGrid& grid = video.grids[1];
  auto targets = targets_from_pose(video.poses[1]);

  ParamStore params;
  Rng init(42);
  init_estimator_params(params, cfg.estimator_config(), init);
  AdamW opt;
  double loss_value = 1e300;
  int step = 0;
  for (; step < 500 && loss_value > 0.009; ++step) {
    Graph g;
    ParamNodes p(g, params);
    LossBreakdown breakdown;
    NodeId loss = estimator_loss_nodes(g, p, grid, targets, cfg, &breakdown);
    g.backward(loss);
    auto grads = g.named_grads();
    clip_grad_norm(grads, cfg.grad_clip);
    opt.step(params, grads, 1e-3, 0.0);
    loss_value = breakdown.total;
  }
  INFO("steps used: " << step << ", final loss " << loss_value);
  CHECK(loss_value < 0.01);
}

TEST_CASE("recognizer loss memorizes a single video") {
  TrainConfig cfg = tiny_config();
  SceneConfig scfg = cfg.scene;
  scfg.render_grids = false;
  VideoSample video = generate_video(5, 11, scfg);
  RecognizerConfig rcfg = cfg.recognizer_config();

  std::vector<int> frames = sample_uniform(video.length(), rcfg.n_clips);
  std::vector<FramePose> poses;
  std::vector<int> classes;
  for (int f : frames) {
    poses.push_back(video.poses[f]);
    classes.push_back(video.poses[f].object.class_id);
  }

  ParamStore params;
  Rng init(43);
  init_recognizer_params(params, rcfg, init);
  AdamW opt;
  double ce = 1e300;
  int step = 0;
  for (; step < 300 && ce > 0.009; ++step) {
    Graph g;
    ParamNodes p(g, params);
    NodeId logits = recognizer_forward(g, p, tokenize_frames(g, p, poses, classes, rcfg), rcfg);
    NodeId loss = g.cross_entropy_rows(logits, {video.action_id}, {1.0});
    g.backward(loss);
    auto grads = g.named_grads();
    clip_grad_norm(grads, cfg.grad_clip);
    opt.step(params, grads, 1e-3, 0.0);
    ce = g.value(loss).data[0];
  }
  INFO("steps used: " << step << ", final ce " << ce);
  CHECK(ce < 0.01);
}

TEST_CASE("full estimator loss gradient matches finite differences") {
  TrainConfig cfg = tiny_config();
  SceneConfig scfg = cfg.scene;
  scfg.t_min = scfg.t_max = 2;
  VideoSample video = generate_video(4, 5, scfg);
  const ObservationGrid& grid = video.grids[0];
  auto targets = targets_from_pose(video.poses[0]);

  ParamStore params;
  Rng init(7);
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

  Rng coords(123);
  GradCheckReport report = check_gradients(f, params, grads, coords, 3, 1e-5);
  INFO("worst " << report.worst_param << " rel " << report.max_rel_error << " over "
                << report.coords_checked << " coords");
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("full recognizer loss gradient matches finite differences") {
  TrainConfig cfg = tiny_config();
  cfg.n_clips = 4;
  RecognizerConfig rcfg = cfg.recognizer_config();
  SceneConfig scfg = cfg.scene;
  scfg.render_grids = false;
  VideoSample video = generate_video(6, 21, scfg);

  std::vector<FramePose> poses(video.poses.begin(), video.poses.begin() + 4);
  std::vector<int> classes(4, video.poses[0].object.class_id);

  ParamStore params;
  Rng init(8);
  init_recognizer_params(params, rcfg, init);

  LossFn f = [&](const ParamStore& s) {
    Graph g;
    ParamNodes p(g, s);
    NodeId logits = recognizer_forward(g, p, tokenize_frames(g, p, poses, classes, rcfg), rcfg);
    return g.value(g.cross_entropy_rows(logits, {video.action_id}, {1.0})).data[0];
  };

  Graph g;
  ParamNodes p(g, params);
  NodeId logits = recognizer_forward(g, p, tokenize_frames(g, p, poses, classes, rcfg), rcfg);
  g.backward(g.cross_entropy_rows(logits, {video.action_id}, {1.0}));
  auto grads = g.named_grads();

  Rng coords(321);
  GradCheckReport report = check_gradients(f, params, grads, coords, 3, 1e-5);
  INFO("worst " << report.worst_param << " rel " << report.max_rel_error);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("training runs are deterministic and loss trends down") {
  fs::path data_dir = temp_dir("data");
  TrainConfig cfg = tiny_config();
  cfg.epochs = 6;
  cfg.lr_drop_epoch = 5;
  cfg.lr = 1e-3;  // desk-scale knob for the tiny smoke model
  cfg.seed = 99;

  DatasetConfig dcfg;
  dcfg.scene = cfg.scene;
  dcfg.train_count = cfg.train_count;
  dcfg.val_count = cfg.val_count;
  dcfg.test_count = cfg.test_count;
  dcfg.seed = 5;
  generate_dataset(dcfg, data_dir);
  Dataset data(data_dir);

  SECTION("estimator: identical seeds give identical logs and checkpoints") {
    fs::path run_a = temp_dir("est_a");
    fs::path run_b = temp_dir("est_b");
    std::ostringstream sink;
    TrainResult ra = train_estimator(data, cfg, run_a, sink);
    TrainResult rb = train_estimator(data, cfg, run_b, sink);
    CHECK(file_bytes(run_a / "log.jsonl") == file_bytes(run_b / "log.jsonl"));
    CHECK(file_bytes(run_a / "best.ckpt") == file_bytes(run_b / "best.ckpt"));
    CHECK(file_bytes(run_a / "config.json") == file_bytes(run_b / "config.json"));
    REQUIRE(ra.log.records.size() == 6);
    auto metric = [&](const EpochRecord& r, const std::string& name) {
      for (const auto& [k, v] : r.metrics)
        if (k == name) return v;
      FAIL("missing metric " + name);
      return 0.0;
    };
    CHECK(metric(ra.log.records[5], "train_total_loss") <
          metric(ra.log.records[0], "train_total_loss"));
    CHECK(ra.best_epoch == rb.best_epoch);
    fs::remove_all(run_a);
    fs::remove_all(run_b);
  }

  SECTION("recognizer: identical seeds give identical logs; checkpoint loads back") {
    fs::path run_a = temp_dir("rec_a");
    fs::path run_b = temp_dir("rec_b");
    std::ostringstream sink;
    GroundTruthPoses gt;
    TrainResult ra = train_recognizer(data, cfg, gt, run_a, sink);
    GroundTruthPoses gt2;
    train_recognizer(data, cfg, gt2, run_b, sink);
    CHECK(file_bytes(run_a / "log.jsonl") == file_bytes(run_b / "log.jsonl"));
    CHECK(file_bytes(run_a / "best.ckpt") == file_bytes(run_b / "best.ckpt"));
    CHECK(ra.best_metric >= 0.0);
    ParamStore loaded = load_checkpoint(run_a / "best.ckpt", recognizer_config_hash(cfg));
    GroundTruthPoses gt3;
    ClassifyResult test = classify_split(data, "test", loaded, cfg.recognizer_config(),
                                         cfg.test_sampler(), gt3, 7);
    CHECK(test.rows.size() == 4);
    for (const auto& row : test.rows) {
      CHECK(row.prediction >= 0);
      CHECK(row.prediction < cfg.scene.k_act);
    }
    fs::remove_all(run_a);
    fs::remove_all(run_b);
  }

  SECTION("estimator-pose provider feeds the recognizer") {
    fs::path est_dir = temp_dir("est_for_rec");
    std::ostringstream sink;
    TrainConfig est_cfg = cfg;
    est_cfg.epochs = 1;
    est_cfg.lr_drop_epoch = 1;
    train_estimator(data, est_cfg, est_dir, sink);
    ParamStore est_params =
        load_checkpoint(est_dir / "best.ckpt", estimator_config_hash(est_cfg));
    EstimatorPoses provider(est_params, est_cfg.estimator_config());
    TrainConfig rec_cfg = cfg;
    rec_cfg.epochs = 1;
    rec_cfg.lr_drop_epoch = 1;
    fs::path rec_dir = temp_dir("rec_est");
    TrainResult rr = train_recognizer(data, rec_cfg, provider, rec_dir, sink);
    CHECK(rr.log.records.size() == 1);
    fs::remove_all(est_dir);
    fs::remove_all(rec_dir);
  }

  SECTION("degenerate one-class dataset is solved after the first epoch") {
    fs::path one_dir = temp_dir("oneclass");
    DatasetConfig one = dcfg;
    one.scene.k_act = 1;
    generate_dataset(one, one_dir);
    Dataset one_data(one_dir);
    TrainConfig one_cfg = cfg;
    one_cfg.scene.k_act = 1;
    one_cfg.epochs = 1;
    one_cfg.lr_drop_epoch = 1;
    std::ostringstream sink;
    GroundTruthPoses gt;
    TrainResult r = train_recognizer(one_data, one_cfg, gt, temp_dir("oneclass_run"), sink);
    CHECK(r.best_metric == 1.0);
    fs::remove_all(one_dir);
  }

  fs::remove_all(data_dir);
}

TEST_CASE("config json round trip") {
  TrainConfig cfg = tiny_config();
  cfg.lr = 3e-4;
  cfg.sampler_train = "uniform";
  cfg.seed = 777;
  std::string text = train_config_to_json(cfg);
  TrainConfig back = train_config_from_json(nlohmann::json::parse(text));
  CHECK(back.lr == cfg.lr);
  CHECK(back.sampler_train == "uniform");
  CHECK(back.seed == 777);
  CHECK(back.scene.grid.height == cfg.scene.grid.height);
  CHECK(train_config_to_json(back) == text);
  // partial configs override only their keys
  TrainConfig patched = train_config_from_json(nlohmann::json::parse("{\"epochs\":3}"), cfg);
  CHECK(patched.epochs == 3);
  CHECK(patched.lr == cfg.lr);
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json::parse("{\"bogus\":1}")),
                  std::invalid_argument);
}
