// Frame-index samplers: per-clip random draw for training, deterministic
// clip-center rule for testing, and plain uniform spacing.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "egoact/common.hpp"

namespace egoact {

enum class SamplerStrategy { kUniform, kNClips };
enum class SamplerPhase { kTrain, kTest };

struct SamplerSpec {
  SamplerStrategy strategy = SamplerStrategy::kNClips;
  int count = 64;  // N for n_clips, F for uniform
  SamplerPhase phase = SamplerPhase::kTest;
};

inline std::string to_string(SamplerStrategy s) {
  return s == SamplerStrategy::kUniform ? "uniform" : "n_clips";
}

inline SamplerStrategy sampler_strategy_from(const std::string& s) {
  if (s == "uniform") return SamplerStrategy::kUniform;
  if (s == "n_clips") return SamplerStrategy::kNClips;
  throw std::invalid_argument("unknown sampler strategy: " + s);
}

// clip i spans [floor(i*T/N), floor((i+1)*T/N)); one uniform draw per clip
inline std::vector<int> sample_n_clips_train(int t, int n, Rng& rng) {
  require(n >= 1, "sample_n_clips_train: need n >= 1");
  require(t >= n, "sample_n_clips_train: video shorter than clip count");
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) {
    std::int64_t lo = static_cast<std::int64_t>(i) * t / n;
    std::int64_t hi = static_cast<std::int64_t>(i + 1) * t / n;  // exclusive
    out[i] = static_cast<int>(lo + rng.bounded(static_cast<std::uint64_t>(hi - lo)));
  }
  return out;
}

// deterministic clip centers: index i = floor((i + 0.5) * T / N)
inline std::vector<int> sample_n_clips_test(int t, int n) {
  require(n >= 1, "sample_n_clips_test: need n >= 1");
  require(t >= n, "sample_n_clips_test: video shorter than clip count");
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = static_cast<int>((2 * static_cast<std::int64_t>(i) + 1) * t / (2 * n));
  return out;
}

// same center rule with N replaced by F; used in the uniform/uniform arms
inline std::vector<int> sample_uniform(int t, int f) {
  require(f >= 1, "sample_uniform: need f >= 1");
  require(t >= f, "sample_uniform: video shorter than frame count");
  return sample_n_clips_test(t, f);
}

// The n_clips strategy draws randomly inside each clip in either phase (the
// per-clip draw is what distinguishes it from uniform testing); the uniform
// strategy is the deterministic center rule in either phase. Pairing n_clips
// training with uniform testing reproduces sample_n_clips_test exactly.
inline std::vector<int> sample_frames(const SamplerSpec& spec, int t, Rng& rng) {
  if (spec.strategy == SamplerStrategy::kNClips)
    return sample_n_clips_train(t, spec.count, rng);
  return sample_uniform(t, spec.count);
}

}  // namespace egoact
