// Training harness: full run configuration, deterministic training loops for
// both stages, evaluation helpers, run-directory logging, and the sampling
// ablation driver.
//
// Run directory layout: config.json (full config echo), log.jsonl (one
// record per completed epoch, deterministic fields only; wall time goes to
// the console), best.ckpt, and ablation.tsv for ablation runs. Floats are
// printed with 17 significant digits.
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egoact/checkpoint.hpp"
#include "egoact/criterion.hpp"
#include "egoact/dataset.hpp"
#include "egoact/estimator.hpp"
#include "egoact/gradcheck.hpp"
#include "egoact/metrics.hpp"
#include "egoact/optim.hpp"
#include "egoact/recognizer.hpp"
#include "egoact/sampling.hpp"

namespace egoact {

struct TrainConfig {
  // schedule constants
  double lr = 1e-4;
  double weight_decay = 1e-4;
  int epochs = 50;
  int lr_drop_epoch = 40;
  double lr_drop_factor = 10.0;
  int batch_size = 1;  // one frame (estimator) or one video (recognizer) per step
  int n_clips = 64;
  int recognizer_layers = 3;
  double flip_prob = 0.5;

  // gap-filling model defaults
  int model_dim = 64;
  int n_heads = 4;
  int ffn_dim = 128;
  int enc_layers = 3;
  int dec_layers = 3;
  int num_queries = 12;
  int patch = 8;
  double ln_eps = 1e-5;
  double init_std = 0.02;
  bool aux_loss = false;

  // criterion weights
  double match_cls = 1.0;
  double match_kp = 5.0;
  double loss_cls = 1.0;
  double loss_kp = 5.0;
  double w_noentity = 0.1;

  // loop details
  double grad_clip = 1.0;
  std::uint64_t seed = 1;
  int estimator_frames_per_video = 2;
  int val_frames_per_video = 8;

  // samplers (paper-best defaults: random clip sampling to train, uniform to test)
  std::string sampler_train = "n_clips";
  std::string sampler_test = "uniform";

  // dataset
  SceneConfig scene;
  int train_count = 200;
  int val_count = 50;
  int test_count = 50;

  EstimatorConfig estimator_config() const {
    EstimatorConfig e;
    e.model_dim = model_dim;
    e.n_heads = n_heads;
    e.ffn_dim = ffn_dim;
    e.enc_layers = enc_layers;
    e.dec_layers = dec_layers;
    e.num_queries = num_queries;
    e.patch = patch;
    e.k_obj = scene.k_obj;
    e.grid = scene.grid;
    e.ln_eps = ln_eps;
    e.init_std = init_std;
    return e;
  }

  RecognizerConfig recognizer_config() const {
    RecognizerConfig r;
    r.model_dim = model_dim;
    r.n_heads = n_heads;
    r.ffn_dim = ffn_dim;
    r.layers = recognizer_layers;
    r.n_clips = n_clips;
    r.k_act = scene.k_act;
    r.k_obj = scene.k_obj;
    r.ln_eps = ln_eps;
    r.init_std = init_std;
    return r;
  }

  SamplerSpec train_sampler() const {
    return {sampler_strategy_from(sampler_train), n_clips, SamplerPhase::kTrain};
  }
  SamplerSpec test_sampler() const {
    return {sampler_strategy_from(sampler_test), n_clips, SamplerPhase::kTest};
  }
};

inline std::string train_config_to_json(const TrainConfig& c) {
  return json::obj({
      {"lr", json::num(c.lr)},
      {"weight_decay", json::num(c.weight_decay)},
      {"epochs", json::num(c.epochs)},
      {"lr_drop_epoch", json::num(c.lr_drop_epoch)},
      {"lr_drop_factor", json::num(c.lr_drop_factor)},
      {"batch_size", json::num(c.batch_size)},
      {"n_clips", json::num(c.n_clips)},
      {"recognizer_layers", json::num(c.recognizer_layers)},
      {"flip_prob", json::num(c.flip_prob)},
      {"model_dim", json::num(c.model_dim)},
      {"n_heads", json::num(c.n_heads)},
      {"ffn_dim", json::num(c.ffn_dim)},
      {"enc_layers", json::num(c.enc_layers)},
      {"dec_layers", json::num(c.dec_layers)},
      {"num_queries", json::num(c.num_queries)},
      {"patch", json::num(c.patch)},
      {"ln_eps", json::num(c.ln_eps)},
      {"init_std", json::num(c.init_std)},
      {"aux_loss", json::boolean(c.aux_loss)},
      {"match_cls", json::num(c.match_cls)},
      {"match_kp", json::num(c.match_kp)},
      {"loss_cls", json::num(c.loss_cls)},
      {"loss_kp", json::num(c.loss_kp)},
      {"w_noentity", json::num(c.w_noentity)},
      {"grad_clip", json::num(c.grad_clip)},
      {"seed", json::num(static_cast<unsigned long long>(c.seed))},
      {"estimator_frames_per_video", json::num(c.estimator_frames_per_video)},
      {"val_frames_per_video", json::num(c.val_frames_per_video)},
      {"sampler_train", json::str(c.sampler_train)},
      {"sampler_test", json::str(c.sampler_test)},
      {"scene", scene_config_json(c.scene)},
      {"train_count", json::num(c.train_count)},
      {"val_count", json::num(c.val_count)},
      {"test_count", json::num(c.test_count)},
      {"activation", json::str("gelu")},
      {"norm_placement", json::str("pre")},
      {"layer_norm_variance", json::str("population")},
  });
}

// applies any keys present in j on top of base; unknown keys are an error
inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {}) {
  TrainConfig c = base;
  static const std::vector<std::string> known = {
      "lr", "weight_decay", "epochs", "lr_drop_epoch", "lr_drop_factor", "batch_size",
      "n_clips", "recognizer_layers", "flip_prob", "model_dim", "n_heads", "ffn_dim",
      "enc_layers", "dec_layers", "num_queries", "patch", "ln_eps", "init_std", "aux_loss",
      "match_cls", "match_kp", "loss_cls", "loss_kp", "w_noentity", "grad_clip", "seed",
      "estimator_frames_per_video", "val_frames_per_video", "sampler_train", "sampler_test",
      "scene", "train_count", "val_count", "test_count", "activation", "norm_placement",
      "layer_norm_variance"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    require(ok, "unknown config key: " + key);
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("lr", c.lr);
  get("weight_decay", c.weight_decay);
  get("epochs", c.epochs);
  get("lr_drop_epoch", c.lr_drop_epoch);
  get("lr_drop_factor", c.lr_drop_factor);
  get("batch_size", c.batch_size);
  get("n_clips", c.n_clips);
  get("recognizer_layers", c.recognizer_layers);
  get("flip_prob", c.flip_prob);
  get("model_dim", c.model_dim);
  get("n_heads", c.n_heads);
  get("ffn_dim", c.ffn_dim);
  get("enc_layers", c.enc_layers);
  get("dec_layers", c.dec_layers);
  get("num_queries", c.num_queries);
  get("patch", c.patch);
  get("ln_eps", c.ln_eps);
  get("init_std", c.init_std);
  get("aux_loss", c.aux_loss);
  get("match_cls", c.match_cls);
  get("match_kp", c.match_kp);
  get("loss_cls", c.loss_cls);
  get("loss_kp", c.loss_kp);
  get("w_noentity", c.w_noentity);
  get("grad_clip", c.grad_clip);
  get("seed", c.seed);
  get("estimator_frames_per_video", c.estimator_frames_per_video);
  get("val_frames_per_video", c.val_frames_per_video);
  get("sampler_train", c.sampler_train);
  get("sampler_test", c.sampler_test);
  if (j.contains("scene")) c.scene = scene_config_from_json(j.at("scene"));
  get("train_count", c.train_count);
  get("val_count", c.val_count);
  get("test_count", c.test_count);
  return c;
}

inline std::uint64_t estimator_config_hash(const TrainConfig& c) {
  EstimatorConfig e = c.estimator_config();
  return fnv1a("estimator|" + std::to_string(e.model_dim) + "|" + std::to_string(e.n_heads) +
               "|" + std::to_string(e.ffn_dim) + "|" + std::to_string(e.enc_layers) + "|" +
               std::to_string(e.dec_layers) + "|" + std::to_string(e.num_queries) + "|" +
               std::to_string(e.patch) + "|" + std::to_string(e.k_obj) + "|" +
               std::to_string(e.grid.channels) + "x" + std::to_string(e.grid.height) + "x" +
               std::to_string(e.grid.width));
}

inline std::uint64_t recognizer_config_hash(const TrainConfig& c) {
  RecognizerConfig r = c.recognizer_config();
  return fnv1a("recognizer|" + std::to_string(r.model_dim) + "|" + std::to_string(r.n_heads) +
               "|" + std::to_string(r.ffn_dim) + "|" + std::to_string(r.layers) + "|" +
               std::to_string(r.n_clips) + "|" + std::to_string(r.k_act) + "|" +
               std::to_string(r.k_obj));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = seed;
  h = (h ^ (a + 0x9E3779B97F4A7C15ULL)) * 0xBF58476D1CE4E5B9ULL;
  h = (h ^ (b + 0x94D049BB133111EBULL)) * 0x2545F4914F6CDD1DULL;
  return h ^ (h >> 29);
}

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  std::vector<std::pair<std::string, double>> metrics;  // name -> value
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;  // console only, never serialized
};

struct RunLog {
  std::vector<EpochRecord> records;
};

inline std::string epoch_record_json(const EpochRecord& r) {
  std::vector<std::pair<std::string, std::string>> fields;
  fields.emplace_back("epoch", json::num(r.epoch));
  fields.emplace_back("lr", json::num(r.lr));
  for (const auto& [name, value] : r.metrics) fields.emplace_back(name, json::num(value));
  fields.emplace_back("seed", json::num(static_cast<unsigned long long>(r.seed)));
  return json::obj(fields);
}

class RunDirectory {
 public:
  RunDirectory(const std::filesystem::path& dir, const TrainConfig& cfg) : dir_(dir) {
    std::filesystem::create_directories(dir);
    std::ofstream cfg_out(dir / "config.json");
    require_io(bool(cfg_out), "cannot write config.json under " + dir.string());
    cfg_out << train_config_to_json(cfg) << '\n';
    log_.open(dir / "log.jsonl");
    require_io(bool(log_), "cannot write log.jsonl under " + dir.string());
  }

  void append(const EpochRecord& r) {
    log_ << epoch_record_json(r) << '\n';
    log_.flush();
  }

  std::filesystem::path checkpoint_path() const { return dir_ / "best.ckpt"; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::ofstream log_;
};

// ---------------------------------------------------------------------------
// pose providers: ground truth from records, or estimator predictions
// ---------------------------------------------------------------------------

class PoseProvider {
 public:
  virtual ~PoseProvider() = default;
  // fills poses and object classes for the given frames of one video
  virtual void fetch(const Dataset& data, const std::string& id,
                     const std::vector<int>& frames, std::vector<FramePose>& poses,
                     std::vector<int>& classes) = 0;
};

class GroundTruthPoses final : public PoseProvider {
 public:
  void fetch(const Dataset& data, const std::string& id, const std::vector<int>& frames,
             std::vector<FramePose>& poses, std::vector<int>& classes) override {
    VideoRecordReader reader = data.open(id);
    poses.clear();
    classes.clear();
    for (int f : frames) {
      poses.push_back(reader.pose_at(f));
      classes.push_back(poses.back().object.class_id);
    }
  }
};

// Runs the frozen estimator on demand and memoizes per-frame selections.
class EstimatorPoses final : public PoseProvider {
 public:
  EstimatorPoses(ParamStore params, EstimatorConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {}

  void fetch(const Dataset& data, const std::string& id, const std::vector<int>& frames,
             std::vector<FramePose>& poses, std::vector<int>& classes) override {
    poses.clear();
    classes.clear();
    auto& per_video = cache_[id];
    std::optional<VideoRecordReader> reader;
    for (int f : frames) {
      auto it = per_video.find(f);
      if (it == per_video.end()) {
        if (!reader) reader.emplace(data.open(id));
        SelectedEntities sel =
            select_entities(estimator_predict(params_, reader->grid_at(f), cfg_), cfg_.k_obj);
        it = per_video.emplace(f, std::pair(sel.pose, sel.object_class)).first;
      }
      poses.push_back(it->second.first);
      classes.push_back(it->second.second);
    }
  }

 private:
  ParamStore params_;
  EstimatorConfig cfg_;
  std::map<std::string, std::map<int, std::pair<FramePose, int>>> cache_;
};

// ---------------------------------------------------------------------------
// estimator training and evaluation
// ---------------------------------------------------------------------------

struct EstimatorEval {
  double mpjpe = 0.0;
  double baseline_mpjpe = 0.0;
  double beat_fraction = 0.0;  // share of frames where the model beats the baseline
  int frames = 0;
};

// constant mean-pose predictor fitted on uniformly sampled training frames
inline FramePose estimator_baseline_pose(const Dataset& data, int frames_per_video) {
  std::vector<FramePose> poses;
  for (const auto& e : data.split("train")) {
    VideoRecordReader reader = data.open(e.id);
    for (int f : sample_uniform(reader.length(), std::min(frames_per_video, reader.length())))
      poses.push_back(reader.pose_at(f));
  }
  return mean_pose(poses);
}

inline EstimatorEval evaluate_estimator(const Dataset& data, const std::string& split,
                                        const ParamStore& params, const EstimatorConfig& cfg,
                                        int frames_per_video, const FramePose& baseline) {
  EstimatorEval out;
  double model_sum = 0.0, base_sum = 0.0;
  int beat = 0, frames = 0;
  for (const auto& e : data.split(split)) {
    VideoRecordReader reader = data.open(e.id);
    for (int f : sample_uniform(reader.length(), std::min(frames_per_video, reader.length()))) {
      FramePose gt = reader.pose_at(f);
      SelectedEntities sel =
          select_entities(estimator_predict(params, reader.grid_at(f), cfg), cfg.k_obj);
      double model_err = frame_mpjpe(sel.pose, gt);
      double base_err = frame_mpjpe(baseline, gt);
      model_sum += model_err;
      base_sum += base_err;
      beat += model_err < base_err ? 1 : 0;
      ++frames;
    }
  }
  require(frames > 0, "evaluate_estimator: empty split " + split);
  out.mpjpe = model_sum / frames;
  out.baseline_mpjpe = base_sum / frames;
  out.beat_fraction = static_cast<double>(beat) / frames;
  out.frames = frames;
  return out;
}

struct TrainResult {
  RunLog log;
  double best_metric = 0.0;  // val MPJPE (estimator) or val top-1 (recognizer)
  int best_epoch = -1;
};

// builds the full per-frame loss, including auxiliary decoder-layer losses
// when enabled
inline NodeId estimator_loss_nodes(Graph& g, ParamNodes& p, const ObservationGrid& grid,
                                   const std::vector<TargetEntity>& targets,
                                   const TrainConfig& cfg, LossBreakdown* breakdown) {
  EstimatorConfig ecfg = cfg.estimator_config();
  CriterionConfig crit{cfg.match_cls, cfg.match_kp, cfg.loss_cls, cfg.loss_kp, cfg.w_noentity};

  NodeId x = embed_grid(g, p, grid, ecfg);
  for (int i = 0; i < ecfg.enc_layers; ++i)
    x = encoder_layer(g, p, x, "enc" + std::to_string(i), ecfg.n_heads, ecfg.ln_eps);
  NodeId memory = layer_norm(g, p, x, "enc_final_ln", ecfg.ln_eps);

  auto head_loss = [&](NodeId decoded, Assignment* assignment) {
    NodeId normed = layer_norm(g, p, decoded, "dec_final_ln", ecfg.ln_eps);
    NodeId logits = linear(g, p, normed, "class_head");
    NodeId h = g.gelu(linear(g, p, normed, "kp_head.fc1"));
    h = g.gelu(linear(g, p, h, "kp_head.fc2"));
    NodeId kps = g.sigmoid(linear(g, p, h, "kp_head.fc3"));
    return hungarian_loss_nodes(g, logits, kps, targets, crit, assignment);
  };

  NodeId q = p("query_embed");
  std::vector<NodeId> aux_totals;
  for (int i = 0; i < ecfg.dec_layers; ++i) {
    q = decoder_layer(g, p, q, memory, "dec" + std::to_string(i), ecfg.n_heads, ecfg.ln_eps);
    if (cfg.aux_loss && i + 1 < ecfg.dec_layers)
      aux_totals.push_back(head_loss(q, nullptr).total);
  }
  Assignment assignment;
  HungarianLossNodes final_loss = head_loss(q, &assignment);
  if (breakdown) {
    breakdown->class_loss = g.value(final_loss.class_term).data[0];
    breakdown->keypoint_loss = g.value(final_loss.keypoint_term).data[0];
    breakdown->total = g.value(final_loss.total).data[0];
    breakdown->assignment = assignment;
  }
  NodeId total = final_loss.total;
  for (NodeId aux : aux_totals) total = g.add(total, aux);
  return total;
}

inline TrainResult train_estimator(const Dataset& data, const TrainConfig& cfg,
                                   const std::filesystem::path& out_dir,
                                   std::ostream& console = std::cout) {
  RunDirectory run(out_dir, cfg);
  EstimatorConfig ecfg = cfg.estimator_config();

  ParamStore params;
  {
    Rng init_rng(mix_seed(cfg.seed, 0xE5717));
    init_estimator_params(params, ecfg, init_rng);
  }
  AdamW opt;
  FramePose baseline = estimator_baseline_pose(data, cfg.val_frames_per_video);
  std::vector<ManifestEntry> train_videos = data.split("train");
  require(!train_videos.empty(), "train_estimator: empty train split");

  TrainResult result;
  double best_mpjpe = 1e300;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    double lr = lr_at(epoch, cfg.lr, cfg.epochs, cfg.lr_drop_epoch, cfg.lr_drop_factor);
    Rng rng(mix_seed(cfg.seed, 0xE5E9, static_cast<std::uint64_t>(epoch)));

    std::vector<int> order(train_videos.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.bounded(i)]);

    double sum_cls = 0.0, sum_kp = 0.0, sum_total = 0.0;
    int steps = 0;
    for (int vi : order) {
      VideoRecordReader reader = data.open(train_videos[vi].id);
      for (int k = 0; k < cfg.estimator_frames_per_video; ++k) {
        int f = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(reader.length())));
        FramePose pose = reader.pose_at(f);
        ObservationGrid grid = reader.grid_at(f);
        if (rng.coin(cfg.flip_prob)) {
          pose = horizontal_flip(pose);
          grid = mirror_grid(grid);
        }
        Graph g;
        ParamNodes p(g, params);
        LossBreakdown breakdown;
        NodeId loss = estimator_loss_nodes(g, p, grid, targets_from_pose(pose), cfg, &breakdown);
        g.backward(loss);
        auto grads = g.named_grads();
        clip_grad_norm(grads, cfg.grad_clip);
        opt.step(params, grads, lr, cfg.weight_decay);
        sum_cls += breakdown.class_loss;
        sum_kp += breakdown.keypoint_loss;
        sum_total += breakdown.total;
        ++steps;
      }
    }

    EstimatorEval eval =
        evaluate_estimator(data, "val", params, ecfg, cfg.val_frames_per_video, baseline);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.seed = cfg.seed;
    rec.metrics = {{"train_class_loss", sum_cls / steps},
                   {"train_keypoint_loss", sum_kp / steps},
                   {"train_total_loss", sum_total / steps},
                   {"val_mpjpe", eval.mpjpe},
                   {"val_baseline_mpjpe", eval.baseline_mpjpe}};
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.append(rec);
    result.log.records.push_back(rec);
    console << "epoch " << epoch << " lr " << lr << " loss " << sum_total / steps
            << " val_mpjpe " << eval.mpjpe << " (" << rec.wall_time_s << "s)\n";

    if (eval.mpjpe < best_mpjpe) {
      best_mpjpe = eval.mpjpe;
      result.best_epoch = epoch;
      save_checkpoint(run.checkpoint_path(), params, estimator_config_hash(cfg));
    }
  }
  result.best_metric = best_mpjpe;
  return result;
}

// ---------------------------------------------------------------------------
// recognizer training and evaluation
// ---------------------------------------------------------------------------

struct ClassifyRow {
  std::string id;
  int prediction = 0;
  int label = 0;
  double margin = 0.0;  // top logit minus runner-up
};

struct ClassifyResult {
  std::vector<ClassifyRow> rows;
  double top1 = 0.0;
  ConfusionMatrix confusion;
};

inline ClassifyResult classify_split(const Dataset& data, const std::string& split,
                                     const ParamStore& params, const RecognizerConfig& rcfg,
                                     const SamplerSpec& sampler, PoseProvider& poses,
                                     std::uint64_t sampler_seed) {
  ClassifyResult out;
  out.confusion = ConfusionMatrix(rcfg.k_act);
  std::vector<int> preds, labels;
  for (const auto& e : data.split(split)) {
    VideoRecordReader reader = data.open(e.id);
    Rng rng(mix_seed(sampler_seed, fnv1a(e.id)));
    std::vector<int> frames = sample_frames(sampler, reader.length(), rng);
    std::vector<FramePose> frame_poses;
    std::vector<int> classes;
    poses.fetch(data, e.id, frames, frame_poses, classes);
    std::vector<double> logits = action_logits(params, frame_poses, classes, rcfg);
    int pred = argmax_class(logits);
    double top = logits[pred], runner = -1e300;
    for (size_t i = 0; i < logits.size(); ++i)
      if (static_cast<int>(i) != pred) runner = std::max(runner, logits[i]);
    out.rows.push_back({e.id, pred, e.action_id, top - runner});
    out.confusion.add(e.action_id, pred);
    preds.push_back(pred);
    labels.push_back(e.action_id);
  }
  out.top1 = evaluate_top1(preds, labels);
  return out;
}

inline TrainResult train_recognizer(const Dataset& data, const TrainConfig& cfg,
                                    PoseProvider& poses, const std::filesystem::path& out_dir,
                                    std::ostream& console = std::cout) {
  RunDirectory run(out_dir, cfg);
  RecognizerConfig rcfg = cfg.recognizer_config();

  ParamStore params;
  {
    Rng init_rng(mix_seed(cfg.seed, 0x4EC17));
    init_recognizer_params(params, rcfg, init_rng);
  }
  AdamW opt;
  std::vector<ManifestEntry> train_videos = data.split("train");
  require(!train_videos.empty(), "train_recognizer: empty train split");
  SamplerSpec train_spec = cfg.train_sampler();
  SamplerSpec test_spec = cfg.test_sampler();

  TrainResult result;
  double best_top1 = -1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    double lr = lr_at(epoch, cfg.lr, cfg.epochs, cfg.lr_drop_epoch, cfg.lr_drop_factor);
    Rng rng(mix_seed(cfg.seed, 0x4E41, static_cast<std::uint64_t>(epoch)));

    std::vector<int> order(train_videos.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.bounded(i)]);

    double sum_ce = 0.0;
    int steps = 0;
    for (int vi : order) {
      const ManifestEntry& entry = train_videos[vi];
      VideoRecordReader reader = data.open(entry.id);
      std::vector<int> frames = sample_frames(train_spec, reader.length(), rng);
      std::vector<FramePose> frame_poses;
      std::vector<int> classes;
      poses.fetch(data, entry.id, frames, frame_poses, classes);
      if (rng.coin(cfg.flip_prob))
        for (auto& pose : frame_poses) pose = horizontal_flip(pose);

      Graph g;
      ParamNodes p(g, params);
      NodeId logits = recognizer_forward(g, p, tokenize_frames(g, p, frame_poses, classes, rcfg), rcfg);
      NodeId loss = g.cross_entropy_rows(logits, {entry.action_id}, {1.0});
      g.backward(loss);
      auto grads = g.named_grads();
      clip_grad_norm(grads, cfg.grad_clip);
      opt.step(params, grads, lr, cfg.weight_decay);
      sum_ce += g.value(loss).data[0];
      ++steps;
    }

    ClassifyResult val = classify_split(data, "val", params, rcfg, test_spec, poses,
                                        mix_seed(cfg.seed, 0x7E57, epoch));

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.seed = cfg.seed;
    rec.metrics = {{"train_ce", sum_ce / steps}, {"val_top1", val.top1}};
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.append(rec);
    result.log.records.push_back(rec);
    console << "epoch " << epoch << " lr " << lr << " ce " << sum_ce / steps << " val_top1 "
            << val.top1 << " (" << rec.wall_time_s << "s)\n";

    if (val.top1 > best_top1) {
      best_top1 = val.top1;
      result.best_epoch = epoch;
      save_checkpoint(run.checkpoint_path(), params, recognizer_config_hash(cfg));
    }
  }
  result.best_metric = best_top1;
  return result;
}

// ---------------------------------------------------------------------------
// sampling ablation (four arms, shared seeds)
// ---------------------------------------------------------------------------

struct AblationArm {
  std::string name;
  std::string sampler_train;
  std::string sampler_test;
  int frames = 64;
  double reference_accuracy = 0.0;  // published H2O test accuracy for context
};

inline std::vector<AblationArm> ablation_arms() {
  return {
      {"uniform_uniform_32", "uniform", "uniform", 32, 83.40},
      {"uniform_uniform_64", "uniform", "uniform", 64, 84.71},
      {"nclips_nclips_64", "n_clips", "n_clips", 64, 86.36},
      {"nclips_uniform_64", "n_clips", "uniform", 64, 87.19},
  };
}

struct AblationRow {
  AblationArm arm;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

struct AblationTable {
  std::vector<AblationRow> rows;  // arm-major in the published row order

  double mean_accuracy(const std::string& arm_name) const {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows)
      if (r.arm.name == arm_name) {
        sum += r.accuracy;
        ++n;
      }
    require(n > 0, "ablation: unknown arm " + arm_name);
    return sum / n;
  }
};

inline void write_ablation_tsv(const std::filesystem::path& path, const AblationTable& table) {
  std::ofstream os(path);
  require_io(bool(os), "cannot write " + path.string());
  os << "arm\ttrain_sampler\ttest_sampler\tframes\taccuracy\tseed\treference_accuracy\n";
  char buf[64];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.accuracy);
    os << r.arm.name << '\t' << r.arm.sampler_train << '\t' << r.arm.sampler_test << '\t'
       << r.arm.frames << '\t' << buf << '\t' << r.seed << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", r.arm.reference_accuracy);
    os << buf << '\n';
  }
}

// Trains one recognizer per (arm, seed) on ground-truth poses and evaluates
// test top-1 with the arm's test sampler.
inline AblationTable run_sampling_ablation(const Dataset& data, const TrainConfig& base,
                                           const std::vector<std::uint64_t>& seeds,
                                           const std::filesystem::path& out_dir,
                                           std::ostream& console = std::cout) {
  AblationTable table;
  for (const AblationArm& arm : ablation_arms()) {
    for (std::uint64_t seed : seeds) {
      TrainConfig cfg = base;
      cfg.sampler_train = arm.sampler_train;
      cfg.sampler_test = arm.sampler_test;
      cfg.n_clips = arm.frames;
      cfg.seed = seed;
      std::filesystem::path run_dir =
          out_dir / (arm.name + "_seed" + std::to_string(seed));
      console << "[ablation] arm " << arm.name << " seed " << seed << "\n";
      GroundTruthPoses gt;
      train_recognizer(data, cfg, gt, run_dir, console);

      ParamStore params = load_checkpoint(run_dir / "best.ckpt", recognizer_config_hash(cfg));
      GroundTruthPoses eval_gt;
      ClassifyResult test = classify_split(data, "test", params, cfg.recognizer_config(),
                                           cfg.test_sampler(), eval_gt,
                                           mix_seed(seed, 0xAB1A7E));
      console << "[ablation] arm " << arm.name << " seed " << seed << " test_top1 "
              << test.top1 << "\n";
      table.rows.push_back({arm, seed, test.top1});
    }
  }
  write_ablation_tsv(out_dir / "ablation.tsv", table);
  return table;
}

}  // namespace egoact
