// egoact command-line entry point: dataset generation, two-stage training,
// prediction, classification, evaluation, the sampling ablation, and the
// built-in oracle selftest.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "egoact/selftest.hpp"
#include "egoact/train.hpp"

namespace fs = std::filesystem;
using namespace egoact;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

// Stages CLI values next to the base config; flags the user actually passed
// override the (defaults -> --config file) resolution afterwards.
struct ConfigFlags {
  TrainConfig staged;
  std::string config_file;
  std::vector<std::pair<std::string, std::function<void(TrainConfig&, const TrainConfig&)>>>
      appliers;
  CLI::App* cmd = nullptr;

  void attach(CLI::App* app) {
    cmd = app;
    app->add_option("--config", config_file, "JSON config file; flags override its values");
    auto opt = [&](const std::string& flag, auto& field, const char* help,
                   auto&& assign) {
      cmd->add_option(flag, field, help);
      appliers.emplace_back(flag, assign);
    };
    opt("--lr", staged.lr, "base learning rate",
        [](TrainConfig& d, const TrainConfig& s) { d.lr = s.lr; });
    opt("--weight-decay", staged.weight_decay, "decoupled weight decay",
        [](TrainConfig& d, const TrainConfig& s) { d.weight_decay = s.weight_decay; });
    opt("--epochs", staged.epochs, "training epochs",
        [](TrainConfig& d, const TrainConfig& s) { d.epochs = s.epochs; });
    opt("--lr-drop-epoch", staged.lr_drop_epoch, "epoch of the single lr drop",
        [](TrainConfig& d, const TrainConfig& s) { d.lr_drop_epoch = s.lr_drop_epoch; });
    opt("--lr-drop-factor", staged.lr_drop_factor, "lr drop factor",
        [](TrainConfig& d, const TrainConfig& s) { d.lr_drop_factor = s.lr_drop_factor; });
    opt("--batch-size", staged.batch_size, "units per optimizer step",
        [](TrainConfig& d, const TrainConfig& s) { d.batch_size = s.batch_size; });
    opt("--n-clips", staged.n_clips, "clips per video (frame count N)",
        [](TrainConfig& d, const TrainConfig& s) { d.n_clips = s.n_clips; });
    opt("--frames", staged.n_clips, "alias for --n-clips",
        [](TrainConfig& d, const TrainConfig& s) { d.n_clips = s.n_clips; });
    opt("--recognizer-layers", staged.recognizer_layers, "temporal transformer layers",
        [](TrainConfig& d, const TrainConfig& s) { d.recognizer_layers = s.recognizer_layers; });
    opt("--flip-prob", staged.flip_prob, "horizontal flip probability",
        [](TrainConfig& d, const TrainConfig& s) { d.flip_prob = s.flip_prob; });
    opt("--model-dim", staged.model_dim, "transformer width",
        [](TrainConfig& d, const TrainConfig& s) { d.model_dim = s.model_dim; });
    opt("--n-heads", staged.n_heads, "attention heads",
        [](TrainConfig& d, const TrainConfig& s) { d.n_heads = s.n_heads; });
    opt("--ffn-dim", staged.ffn_dim, "feed-forward width",
        [](TrainConfig& d, const TrainConfig& s) { d.ffn_dim = s.ffn_dim; });
    opt("--enc-layers", staged.enc_layers, "estimator encoder layers",
        [](TrainConfig& d, const TrainConfig& s) { d.enc_layers = s.enc_layers; });
    opt("--dec-layers", staged.dec_layers, "estimator decoder layers",
        [](TrainConfig& d, const TrainConfig& s) { d.dec_layers = s.dec_layers; });
    opt("--num-queries", staged.num_queries, "decoder queries",
        [](TrainConfig& d, const TrainConfig& s) { d.num_queries = s.num_queries; });
    opt("--patch", staged.patch, "patch size",
        [](TrainConfig& d, const TrainConfig& s) { d.patch = s.patch; });
    opt("--aux-loss", staged.aux_loss, "auxiliary losses on intermediate decoder layers",
        [](TrainConfig& d, const TrainConfig& s) { d.aux_loss = s.aux_loss; });
    opt("--grad-clip", staged.grad_clip, "global gradient norm cap",
        [](TrainConfig& d, const TrainConfig& s) { d.grad_clip = s.grad_clip; });
    opt("--seed", staged.seed, "run seed",
        [](TrainConfig& d, const TrainConfig& s) { d.seed = s.seed; });
    opt("--estimator-frames-per-video", staged.estimator_frames_per_video,
        "estimator training frames drawn per video per epoch",
        [](TrainConfig& d, const TrainConfig& s) {
          d.estimator_frames_per_video = s.estimator_frames_per_video;
        });
    opt("--val-frames-per-video", staged.val_frames_per_video,
        "frames per video for keypoint evaluation",
        [](TrainConfig& d, const TrainConfig& s) {
          d.val_frames_per_video = s.val_frames_per_video;
        });
    opt("--sampler-train", staged.sampler_train, "train sampler: uniform | n_clips",
        [](TrainConfig& d, const TrainConfig& s) { d.sampler_train = s.sampler_train; });
    opt("--sampler-test", staged.sampler_test, "test sampler: uniform | n_clips",
        [](TrainConfig& d, const TrainConfig& s) { d.sampler_test = s.sampler_test; });
    opt("--k-act", staged.scene.k_act, "action class count",
        [](TrainConfig& d, const TrainConfig& s) { d.scene.k_act = s.scene.k_act; });
    opt("--k-obj", staged.scene.k_obj, "object class count",
        [](TrainConfig& d, const TrainConfig& s) { d.scene.k_obj = s.scene.k_obj; });
    opt("--t-min", staged.scene.t_min, "minimum video length",
        [](TrainConfig& d, const TrainConfig& s) { d.scene.t_min = s.scene.t_min; });
    opt("--t-max", staged.scene.t_max, "maximum video length",
        [](TrainConfig& d, const TrainConfig& s) { d.scene.t_max = s.scene.t_max; });
    opt("--jitter", staged.scene.jitter, "pose jitter sigma",
        [](TrainConfig& d, const TrainConfig& s) { d.scene.jitter = s.scene.jitter; });
    opt("--train-count", staged.train_count, "training videos",
        [](TrainConfig& d, const TrainConfig& s) { d.train_count = s.train_count; });
    opt("--val-count", staged.val_count, "validation videos",
        [](TrainConfig& d, const TrainConfig& s) { d.val_count = s.val_count; });
    opt("--test-count", staged.test_count, "test videos",
        [](TrainConfig& d, const TrainConfig& s) { d.test_count = s.test_count; });
  }

  TrainConfig resolve() const {
    TrainConfig cfg;
    if (!config_file.empty()) {
      std::ifstream is(config_file);
      require_io(bool(is), "cannot open config file: " + config_file);
      cfg = train_config_from_json(nlohmann::json::parse(is), cfg);
    }
    for (const auto& [flag, apply] : appliers)
      if (cmd->count(flag)) apply(cfg, staged);
    return cfg;
  }
};

void echo_config(const TrainConfig& cfg) {
  std::cout << "config: " << train_config_to_json(cfg) << "\n";
}

std::string pose_points_json(const std::array<Point3, 21>& pts) {
  std::vector<std::string> flat;
  flat.reserve(63);
  for (const auto& p : pts)
    for (double v : p) flat.push_back(json::num(v));
  return json::arr(flat);
}

int cmd_gen_data(const ConfigFlags& flags, const std::string& out) {
  TrainConfig cfg = flags.resolve();
  echo_config(cfg);
  DatasetConfig dcfg;
  dcfg.scene = cfg.scene;
  dcfg.train_count = cfg.train_count;
  dcfg.val_count = cfg.val_count;
  dcfg.test_count = cfg.test_count;
  dcfg.seed = cfg.seed;
  generate_dataset(dcfg, out);
  std::cout << "dataset written to " << out << " (" << dcfg.train_count << "/"
            << dcfg.val_count << "/" << dcfg.test_count << " videos)\n";
  return kExitOk;
}

int cmd_train_keypoints(const ConfigFlags& flags, const std::string& data,
                        const std::string& out) {
  TrainConfig cfg = flags.resolve();
  echo_config(cfg);
  Dataset dataset(data);
  cfg.scene = dataset.scene();  // the dataset defines the scene geometry
  TrainResult result = train_estimator(dataset, cfg, out, std::cout);
  std::cout << "best val MPJPE " << json::num(result.best_metric) << " at epoch "
            << result.best_epoch << "; checkpoint " << (fs::path(out) / "best.ckpt").string()
            << "\n";
  return kExitOk;
}

int cmd_train_action(const ConfigFlags& flags, const std::string& data, const std::string& out,
                     const std::string& pose_source, const std::string& checkpoint) {
  TrainConfig cfg = flags.resolve();
  echo_config(cfg);
  Dataset dataset(data);
  cfg.scene = dataset.scene();
  std::unique_ptr<PoseProvider> provider;
  if (pose_source == "gt") {
    provider = std::make_unique<GroundTruthPoses>();
  } else if (pose_source == "estimator") {
    require(!checkpoint.empty(), "--pose-source estimator requires --checkpoint");
    ParamStore est = load_checkpoint(checkpoint, estimator_config_hash(cfg));
    provider = std::make_unique<EstimatorPoses>(std::move(est), cfg.estimator_config());
  } else {
    throw std::invalid_argument("unknown --pose-source: " + pose_source);
  }
  TrainResult result = train_recognizer(dataset, cfg, *provider, out, std::cout);
  std::cout << "best val top-1 " << json::num(result.best_metric) << " at epoch "
            << result.best_epoch << "; checkpoint " << (fs::path(out) / "best.ckpt").string()
            << "\n";
  return kExitOk;
}

int cmd_predict(const ConfigFlags& flags, const std::string& data, const std::string& checkpoint,
                const std::string& split, const std::string& video_id, const std::string& out) {
  TrainConfig cfg = flags.resolve();
  echo_config(cfg);
  Dataset dataset(data);
  cfg.scene = dataset.scene();
  EstimatorConfig ecfg = cfg.estimator_config();
  ParamStore params = load_checkpoint(checkpoint, estimator_config_hash(cfg));

  std::ofstream os(out);
  require_io(bool(os), "cannot open output file: " + out);
  int emitted = 0;
  for (const auto& entry : dataset.split(split)) {
    if (!video_id.empty() && entry.id != video_id) continue;
    VideoRecordReader reader = dataset.open(entry.id);
    for (int f = 0; f < reader.length(); ++f) {
      SelectedEntities sel =
          select_entities(estimator_predict(params, reader.grid_at(f), ecfg), ecfg.k_obj);
      os << json::obj({
               {"video", json::str(entry.id)},
               {"frame", json::num(f)},
               {"left", pose_points_json(sel.pose.left.joints)},
               {"right", pose_points_json(sel.pose.right.joints)},
               {"object", pose_points_json(sel.pose.object.points)},
               {"object_class", json::num(sel.object_class)},
               {"confidence", json::obj({{"left", json::num(sel.conf_left)},
                                         {"right", json::num(sel.conf_right)},
                                         {"object", json::num(sel.conf_object)}})},
           })
         << '\n';
      ++emitted;
    }
  }
  require(emitted > 0, "predict: no frames matched the split/video filter");
  std::cout << "wrote " << emitted << " frame predictions to " << out << "\n";
  return kExitOk;
}

std::string confusion_json(const ConfusionMatrix& cm) {
  std::vector<std::string> rows;
  for (int t = 0; t < cm.k; ++t) {
    std::vector<std::string> row;
    for (int p = 0; p < cm.k; ++p) row.push_back(json::num(cm.at(t, p)));
    rows.push_back(json::arr(row));
  }
  return json::arr(rows);
}

int cmd_classify(const ConfigFlags& flags, const std::string& data, const std::string& checkpoint,
                 const std::string& split, const std::string& pose_source,
                 const std::string& estimator_checkpoint, const std::string& out) {
  TrainConfig cfg = flags.resolve();
  echo_config(cfg);
  Dataset dataset(data);
  cfg.scene = dataset.scene();
  RecognizerConfig rcfg = cfg.recognizer_config();
  ParamStore params = load_checkpoint(checkpoint, recognizer_config_hash(cfg));

  std::unique_ptr<PoseProvider> provider;
  if (pose_source == "gt") {
    provider = std::make_unique<GroundTruthPoses>();
  } else if (pose_source == "estimator") {
    require(!estimator_checkpoint.empty(),
            "--pose-source estimator requires --estimator-checkpoint");
    ParamStore est = load_checkpoint(estimator_checkpoint, estimator_config_hash(cfg));
    provider = std::make_unique<EstimatorPoses>(std::move(est), cfg.estimator_config());
  } else {
    throw std::invalid_argument("unknown --pose-source: " + pose_source);
  }

  ClassifyResult result = classify_split(dataset, split, params, rcfg, cfg.test_sampler(),
                                         *provider, mix_seed(cfg.seed, 0xC1A55));
  fs::create_directories(out);
  {
    std::ofstream tsv(fs::path(out) / "predictions.tsv");
    require_io(bool(tsv), "cannot write predictions.tsv");
    tsv << "video\tpredicted_action\ttrue_action\tlogit_margin\n";
    char buf[40];
    for (const auto& row : result.rows) {
      std::snprintf(buf, sizeof buf, "%.17g", row.margin);
      tsv << row.id << '\t' << row.prediction << '\t' << row.label << '\t' << buf << '\n';
    }
  }
  {
    std::ofstream js(fs::path(out) / "summary.json");
    require_io(bool(js), "cannot write summary.json");
    js << json::obj({{"split", json::str(split)},
                     {"pose_source", json::str(pose_source)},
                     {"top1", json::num(result.top1)},
                     {"videos", json::num(static_cast<int>(result.rows.size()))},
                     {"confusion", confusion_json(result.confusion)}})
       << '\n';
  }
  std::cout << "split " << split << " top-1 " << json::num(result.top1) << " over "
            << result.rows.size() << " videos; results in " << out << "\n";
  return kExitOk;
}

int cmd_eval(const ConfigFlags& flags, const std::string& task, const std::string& data,
             const std::string& checkpoint, const std::string& split, const std::string& out) {
  TrainConfig cfg = flags.resolve();
  echo_config(cfg);
  Dataset dataset(data);
  cfg.scene = dataset.scene();
  std::string payload;
  if (task == "keypoints") {
    ParamStore params = load_checkpoint(checkpoint, estimator_config_hash(cfg));
    FramePose baseline = estimator_baseline_pose(dataset, cfg.val_frames_per_video);
    EstimatorEval eval = evaluate_estimator(dataset, split, params, cfg.estimator_config(),
                                            cfg.val_frames_per_video, baseline);
    payload = json::obj({{"split", json::str(split)},
                         {"mpjpe", json::num(eval.mpjpe)},
                         {"baseline_mpjpe", json::num(eval.baseline_mpjpe)},
                         {"mpjpe_ratio", json::num(eval.mpjpe / eval.baseline_mpjpe)},
                         {"beat_fraction", json::num(eval.beat_fraction)},
                         {"frames", json::num(eval.frames)}});
  } else if (task == "action") {
    ParamStore params = load_checkpoint(checkpoint, recognizer_config_hash(cfg));
    GroundTruthPoses gt;
    ClassifyResult result = classify_split(dataset, split, params, cfg.recognizer_config(),
                                           cfg.test_sampler(), gt, mix_seed(cfg.seed, 0xC1A55));
    payload = json::obj({{"split", json::str(split)},
                         {"top1", json::num(result.top1)},
                         {"videos", json::num(static_cast<int>(result.rows.size()))},
                         {"confusion", confusion_json(result.confusion)}});
  } else {
    throw std::invalid_argument("unknown --task: " + task);
  }
  std::cout << payload << "\n";
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream js(fs::path(out) / "eval.json");
    require_io(bool(js), "cannot write eval.json");
    js << payload << '\n';
  }
  return kExitOk;
}

int cmd_ablate(const ConfigFlags& flags, const std::string& data, const std::string& out,
               const std::string& seeds_arg) {
  TrainConfig cfg = flags.resolve();
  echo_config(cfg);
  Dataset dataset(data);
  cfg.scene = dataset.scene();
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(seeds_arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  require(!seeds.empty(), "--seeds needs at least one seed");
  fs::create_directories(out);
  AblationTable table = run_sampling_ablation(dataset, cfg, seeds, out, std::cout);
  for (const AblationArm& arm : ablation_arms())
    std::cout << "arm " << arm.name << " mean test top-1 "
              << json::num(table.mean_accuracy(arm.name)) << " (reference "
              << json::num(arm.reference_accuracy) << "%)\n";
  std::cout << "table written to " << (fs::path(out) / "ablation.tsv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale two-hands-plus-object action recognition pipeline"};
  app.require_subcommand(1);

  std::string out, data, split = "test", video_id, checkpoint, estimator_checkpoint;
  std::string pose_source = "gt", task = "keypoints", seeds = "1,2,3";

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset directory");
  gen->add_option("--out", out, "output directory")->required();
  ConfigFlags gen_flags;
  gen_flags.attach(gen);

  auto* tk = app.add_subcommand("train-keypoints", "train the keypoint estimator");
  tk->add_option("--data", data, "dataset directory")->required();
  tk->add_option("--out", out, "run directory")->required();
  ConfigFlags tk_flags;
  tk_flags.attach(tk);

  auto* ta = app.add_subcommand("train-action", "train the action recognizer");
  ta->add_option("--data", data, "dataset directory")->required();
  ta->add_option("--out", out, "run directory")->required();
  ta->add_option("--pose-source", pose_source, "gt | estimator");
  ta->add_option("--checkpoint", checkpoint, "estimator checkpoint (estimator pose source)");
  ConfigFlags ta_flags;
  ta_flags.attach(ta);

  auto* pred = app.add_subcommand("predict", "emit per-frame pose predictions as JSON lines");
  pred->add_option("--data", data, "dataset directory")->required();
  pred->add_option("--checkpoint", checkpoint, "estimator checkpoint")->required();
  pred->add_option("--split", split, "dataset split");
  pred->add_option("--video", video_id, "restrict to one video id");
  pred->add_option("--out", out, "output JSONL file")->required();
  ConfigFlags pred_flags;
  pred_flags.attach(pred);

  auto* cls = app.add_subcommand("classify", "classify videos and write predictions + summary");
  cls->add_option("--data", data, "dataset directory")->required();
  cls->add_option("--checkpoint", checkpoint, "recognizer checkpoint")->required();
  cls->add_option("--split", split, "dataset split");
  cls->add_option("--pose-source", pose_source, "gt | estimator");
  cls->add_option("--estimator-checkpoint", estimator_checkpoint,
                  "estimator checkpoint for estimator pose source");
  cls->add_option("--out", out, "output directory")->required();
  ConfigFlags cls_flags;
  cls_flags.attach(cls);

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  ev->add_option("--task", task, "keypoints | action");
  ev->add_option("--data", data, "dataset directory")->required();
  ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  ev->add_option("--split", split, "dataset split");
  ev->add_option("--out", out, "optional output directory");
  ConfigFlags ev_flags;
  ev_flags.attach(ev);

  auto* ab = app.add_subcommand("ablate-sampling", "run the four-arm sampling ablation");
  ab->add_option("--data", data, "dataset directory")->required();
  ab->add_option("--out", out, "output directory")->required();
  ab->add_option("--seeds", seeds, "comma-separated seeds");
  ConfigFlags ab_flags;
  ab_flags.attach(ab);

  auto* st = app.add_subcommand("selftest", "run the built-in oracle suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_flags, out);
    if (tk->parsed()) return cmd_train_keypoints(tk_flags, data, out);
    if (ta->parsed()) return cmd_train_action(ta_flags, data, out, pose_source, checkpoint);
    if (pred->parsed()) return cmd_predict(pred_flags, data, checkpoint, split, video_id, out);
    if (cls->parsed())
      return cmd_classify(cls_flags, data, checkpoint, split, pose_source,
                          estimator_checkpoint, out);
    if (ev->parsed()) return cmd_eval(ev_flags, task, data, checkpoint, split, out);
    if (ab->parsed()) return cmd_ablate(ab_flags, data, out, seeds);
    if (st->parsed()) {
      SelftestReport report = run_selftest(std::cout);
      return report.all_passed() ? kExitOk : kExitUsage;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
