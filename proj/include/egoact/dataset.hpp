// On-disk dataset layout:
//   <dir>/meta.json       config echo, class names, counts, format version
//   <dir>/manifest.tsv    one line per video: id <TAB> split <TAB> action_id
//   <dir>/records/<id>.bin
//
// Record format (little-endian): magic "EGOVID01", u32 version, id string,
// u32 action_id, u32 T, u32 channels/height/width, then per frame the pose
// block (left 63 + right 63 + object 63 doubles, u32 object class) followed
// by the grid (channels*height*width doubles). Fixed frame stride allows
// seeking straight to any frame.
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "egoact/binio.hpp"
#include "egoact/jsonio.hpp"
#include "egoact/scene.hpp"

#include "json.hpp"

namespace egoact {

constexpr char kRecordMagic[9] = "EGOVID01";
constexpr std::uint32_t kDatasetFormatVersion = 1;

struct DatasetConfig {
  SceneConfig scene;
  int train_count = 200;
  int val_count = 50;
  int test_count = 50;
  std::uint64_t seed = 1;
};

struct ManifestEntry {
  std::string id;
  std::string split;  // train | val | test
  int action_id = 0;
};

namespace detail {

inline void write_pose(std::ostream& os, const FramePose& pose) {
  for (const auto& p : pose.left.joints) write_f64s(os, p.data(), 3);
  for (const auto& p : pose.right.joints) write_f64s(os, p.data(), 3);
  for (const auto& p : pose.object.points) write_f64s(os, p.data(), 3);
  write_u32(os, static_cast<std::uint32_t>(pose.object.class_id));
}

inline FramePose read_pose(std::istream& is) {
  FramePose pose;
  pose.left.side = HandSide::kLeft;
  pose.right.side = HandSide::kRight;
  for (auto& p : pose.left.joints) read_f64s(is, p.data(), 3);
  for (auto& p : pose.right.joints) read_f64s(is, p.data(), 3);
  for (auto& p : pose.object.points) read_f64s(is, p.data(), 3);
  pose.object.class_id = static_cast<int>(read_u32(is));
  return pose;
}

}  // namespace detail

inline void write_video_record(const std::filesystem::path& path, const VideoSample& video,
                               const GridShape& grid) {
  std::ofstream os(path, std::ios::binary);
  require_io(bool(os), "cannot open record for writing: " + path.string());
  os.write(kRecordMagic, 8);
  write_u32(os, kDatasetFormatVersion);
  write_str(os, video.id);
  write_u32(os, static_cast<std::uint32_t>(video.action_id));
  write_u32(os, static_cast<std::uint32_t>(video.length()));
  write_u32(os, static_cast<std::uint32_t>(grid.channels));
  write_u32(os, static_cast<std::uint32_t>(grid.height));
  write_u32(os, static_cast<std::uint32_t>(grid.width));
  require(video.grids.size() == video.poses.size(),
          "write_video_record: record files require rendered grids");
  for (int f = 0; f < video.length(); ++f) {
    detail::write_pose(os, video.poses[f]);
    require(video.grids[f].shape == grid, "write_video_record: grid shape mismatch");
    write_f64s(os, video.grids[f].values.data(), video.grids[f].values.size());
  }
  require_io(bool(os), "write failed: " + path.string());
}

class VideoRecordReader {
 public:
  explicit VideoRecordReader(const std::filesystem::path& path) : is_(path, std::ios::binary) {
    require_io(bool(is_), "cannot open record: " + path.string());
    char magic[8];
    is_.read(magic, 8);
    require_io(bool(is_) && std::string(magic, 8) == kRecordMagic,
               "bad record magic: " + path.string());
    std::uint32_t version = read_u32(is_);
    require_io(version == kDatasetFormatVersion, "unsupported record version");
    id_ = read_str(is_);
    action_id_ = static_cast<int>(read_u32(is_));
    t_ = static_cast<int>(read_u32(is_));
    grid_.channels = static_cast<int>(read_u32(is_));
    grid_.height = static_cast<int>(read_u32(is_));
    grid_.width = static_cast<int>(read_u32(is_));
    header_bytes_ = static_cast<std::int64_t>(is_.tellg());
    pose_bytes_ = kPoseCoords * 3 * 8 + 4;
    frame_bytes_ = pose_bytes_ + grid_.numel() * 8;
  }

  const std::string& id() const { return id_; }
  int action_id() const { return action_id_; }
  int length() const { return t_; }
  const GridShape& grid_shape() const { return grid_; }

  FramePose pose_at(int f) {
    seek_frame(f, 0);
    return detail::read_pose(is_);
  }

  std::vector<FramePose> poses_at(const std::vector<int>& frames) {
    std::vector<FramePose> out;
    out.reserve(frames.size());
    for (int f : frames) out.push_back(pose_at(f));
    return out;
  }

  ObservationGrid grid_at(int f) {
    seek_frame(f, pose_bytes_);
    ObservationGrid g;
    g.shape = grid_;
    g.values.resize(static_cast<size_t>(grid_.numel()));
    read_f64s(is_, g.values.data(), g.values.size());
    return g;
  }

  VideoSample load_all() {
    VideoSample v;
    v.id = id_;
    v.action_id = action_id_;
    v.poses.reserve(t_);
    v.grids.reserve(t_);
    for (int f = 0; f < t_; ++f) {
      seek_frame(f, 0);
      v.poses.push_back(detail::read_pose(is_));
      ObservationGrid g;
      g.shape = grid_;
      g.values.resize(static_cast<size_t>(grid_.numel()));
      read_f64s(is_, g.values.data(), g.values.size());
      v.grids.push_back(std::move(g));
    }
    return v;
  }

 private:
  void seek_frame(int f, std::int64_t offset_in_frame) {
    require(f >= 0 && f < t_, "record frame index out of range");
    is_.seekg(header_bytes_ + static_cast<std::int64_t>(f) * frame_bytes_ + offset_in_frame);
    require_io(bool(is_), "record seek failed");
  }

  std::ifstream is_;
  std::string id_;
  int action_id_ = 0;
  int t_ = 0;
  GridShape grid_;
  std::int64_t header_bytes_ = 0;
  std::int64_t pose_bytes_ = 0;
  std::int64_t frame_bytes_ = 0;
};

inline std::string scene_config_json(const SceneConfig& s) {
  return json::obj({
      {"k_act", json::num(s.k_act)},
      {"k_obj", json::num(s.k_obj)},
      {"t_min", json::num(s.t_min)},
      {"t_max", json::num(s.t_max)},
      {"jitter", json::num(s.jitter)},
      {"grid_channels", json::num(s.grid.channels)},
      {"grid_height", json::num(s.grid.height)},
      {"grid_width", json::num(s.grid.width)},
      {"splat_sigma_px", json::num(s.splat_sigma_px)},
  });
}

inline SceneConfig scene_config_from_json(const nlohmann::json& j) {
  SceneConfig s;
  s.k_act = j.at("k_act").get<int>();
  s.k_obj = j.at("k_obj").get<int>();
  s.t_min = j.at("t_min").get<int>();
  s.t_max = j.at("t_max").get<int>();
  s.jitter = j.at("jitter").get<double>();
  s.grid.channels = j.at("grid_channels").get<int>();
  s.grid.height = j.at("grid_height").get<int>();
  s.grid.width = j.at("grid_width").get<int>();
  s.splat_sigma_px = j.at("splat_sigma_px").get<double>();
  return s;
}

// Builds the full directory. Action labels go round-robin within each split,
// so per-class counts differ by at most one (and are equal when the split
// size divides evenly).
inline void generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  require(cfg.train_count > 0 && cfg.val_count >= 0 && cfg.test_count >= 0,
          "generate_dataset: bad split sizes");
  fs::create_directories(dir / "records");

  std::vector<ManifestEntry> manifest;
  int global_index = 0;
  auto emit_split = [&](const std::string& split, int count) {
    for (int i = 0; i < count; ++i, ++global_index) {
      int action = global_index % cfg.scene.k_act;
      char idbuf[32];
      std::snprintf(idbuf, sizeof idbuf, "v%05d_a%d", global_index, action);
      std::uint64_t video_seed = cfg.seed * 2654435761ULL + static_cast<std::uint64_t>(global_index);
      VideoSample video = generate_video(action, video_seed, cfg.scene);
      video.id = idbuf;
      write_video_record(dir / "records" / (video.id + ".bin"), video, cfg.scene.grid);
      manifest.push_back({video.id, split, action});
    }
  };
  emit_split("train", cfg.train_count);
  emit_split("val", cfg.val_count);
  emit_split("test", cfg.test_count);

  {
    std::ofstream mf(dir / "manifest.tsv");
    require_io(bool(mf), "cannot write manifest.tsv");
    for (const auto& e : manifest)
      mf << e.id << '\t' << e.split << '\t' << e.action_id << '\n';
  }
  {
    std::vector<std::string> actions, objects;
    for (int i = 0; i < cfg.scene.k_act; ++i)
      actions.push_back(json::str(action_class_names()[i % action_class_names().size()]));
    for (int i = 0; i < cfg.scene.k_obj; ++i)
      objects.push_back(json::str(object_class_names()[i % object_class_names().size()]));
    std::ofstream meta(dir / "meta.json");
    require_io(bool(meta), "cannot write meta.json");
    meta << json::obj({
             {"format_version", json::num(static_cast<int>(kDatasetFormatVersion))},
             {"action_names", json::arr(actions)},
             {"object_names", json::arr(objects)},
             {"counts", json::obj({{"train", json::num(cfg.train_count)},
                                   {"val", json::num(cfg.val_count)},
                                   {"test", json::num(cfg.test_count)}})},
             {"seed", json::num(static_cast<unsigned long long>(cfg.seed))},
             {"scene", scene_config_json(cfg.scene)},
         })
         << '\n';
  }
}

class Dataset {
 public:
  explicit Dataset(const std::filesystem::path& dir) : dir_(dir) {
    std::ifstream meta_in(dir / "meta.json");
    require_io(bool(meta_in), "cannot open meta.json under " + dir.string());
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    require_io(meta.at("format_version").get<int>() ==
                   static_cast<int>(kDatasetFormatVersion),
               "unsupported dataset format version");
    scene_ = scene_config_from_json(meta.at("scene"));
    for (const auto& name : meta.at("action_names")) action_names_.push_back(name);
    for (const auto& name : meta.at("object_names")) object_names_.push_back(name);

    std::ifstream mf(dir / "manifest.tsv");
    require_io(bool(mf), "cannot open manifest.tsv under " + dir.string());
    std::string line;
    while (std::getline(mf, line)) {
      if (line.empty()) continue;
      size_t tab1 = line.find('\t');
      size_t tab2 = line.find('\t', tab1 + 1);
      require_io(tab1 != std::string::npos && tab2 != std::string::npos,
                 "malformed manifest line: " + line);
      ManifestEntry e;
      e.id = line.substr(0, tab1);
      e.split = line.substr(tab1 + 1, tab2 - tab1 - 1);
      e.action_id = std::stoi(line.substr(tab2 + 1));
      entries_.push_back(std::move(e));
    }
  }

  const SceneConfig& scene() const { return scene_; }
  const std::vector<ManifestEntry>& entries() const { return entries_; }
  const std::vector<std::string>& action_names() const { return action_names_; }

  std::vector<ManifestEntry> split(const std::string& name) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries_)
      if (e.split == name) out.push_back(e);
    return out;
  }

  VideoRecordReader open(const std::string& id) const {
    return VideoRecordReader(dir_ / "records" / (id + ".bin"));
  }

 private:
  std::filesystem::path dir_;
  SceneConfig scene_;
  std::vector<ManifestEntry> entries_;
  std::vector<std::string> action_names_;
  std::vector<std::string> object_names_;
};

}  // namespace egoact
