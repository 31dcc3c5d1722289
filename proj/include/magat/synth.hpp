#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <vector>

#include "magat/dataset.hpp"

namespace magat {

// Latent-factor cohort generator. Positive-class subjects get a shared extra
// factor mixed into a block of ROIs (scaled by signal_strength), producing
// class-dependent correlation structure that is consistent across atlases;
// sites differ by evenly spaced additive offsets in [-site_shift, site_shift].
struct SynthSpec {
  std::vector<int> site_sizes{80, 80, 80, 80};
  int t = 140;
  std::vector<AtlasInfo> atlases{
      {"Dose", 160}, {"AAL", 116}, {"CK", 200}, {"HO", 112}};
  double signal_strength = 1.0;  // 0 = null cohort
  double site_shift = 2.0;
  int latent_factors = 8;
  double noise_floor = 0.5;
  std::uint64_t seed = 0;
};

Cohort generate_cohort(const SynthSpec& spec);

// Planted-signal metadata (per-atlas block indices, offsets, strengths).
nlohmann::json synth_ground_truth(const SynthSpec& spec);

// Writes manifest.json plus series/<id>_<atlas>.csv under dir.
void write_cohort(const Cohort& cohort, const std::filesystem::path& dir);

// generate_cohort + write_cohort + ground_truth.json sidecar.
void generate_to_disk(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace magat
