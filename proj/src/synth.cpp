#include "magat/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "magat/error.hpp"
#include "magat/io.hpp"
#include "magat/rng.hpp"

namespace magat {
namespace {

constexpr std::uint64_t kAtlasStream = 0x41544c4153ULL;    // "ATLAS"
constexpr std::uint64_t kSubjectStream = 0x53554244ULL;    // "SUBD"

int block_size(int n_rois) { return std::max(2, n_rois / 8); }

void validate(const SynthSpec& spec) {
  if (spec.site_sizes.empty()) throw DataError("synth: no sites");
  for (int n : spec.site_sizes)
    if (n < 1) throw DataError("synth: site sizes must be positive");
  if (spec.t < 2) throw DataError("synth: t must be >= 2");
  if (spec.atlases.empty()) throw DataError("synth: no atlases");
  for (const auto& a : spec.atlases)
    if (a.n_rois < 2) throw DataError("synth: atlas " + a.name +
                                      " needs >= 2 ROIs");
  if (spec.signal_strength < 0.0)
    throw DataError("synth: signal_strength must be >= 0");
  if (spec.latent_factors < 1)
    throw DataError("synth: latent_factors must be >= 1");
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gaussian(rng);
  return m;
}

std::vector<double> site_offsets(const SynthSpec& spec) {
  const int s = static_cast<int>(spec.site_sizes.size());
  std::vector<double> offs(s, 0.0);
  if (s > 1) {
    for (int i = 0; i < s; ++i)
      offs[i] = -spec.site_shift +
                2.0 * spec.site_shift * i / static_cast<double>(s - 1);
  }
  return offs;
}

}  // namespace

Cohort generate_cohort(const SynthSpec& spec) {
  validate(spec);
  const int n_atlas = static_cast<int>(spec.atlases.size());
  const int l = spec.latent_factors;
  const double load_scale = 1.0 / std::sqrt(static_cast<double>(l));

  // Fixed per-atlas mixing: base loadings for everyone, plus one shared
  // factor direction mixed into the block for positive subjects.
  std::vector<Eigen::MatrixXd> loadings(n_atlas);   // l x n
  std::vector<Eigen::VectorXd> signal_dir(n_atlas); // l
  for (int a = 0; a < n_atlas; ++a) {
    Rng rng(derive_seed(spec.seed, kAtlasStream, a));
    loadings[a] =
        gaussian_matrix(l, spec.atlases[a].n_rois, rng) * load_scale;
    signal_dir[a] = gaussian_matrix(l, 1, rng) * load_scale;
  }

  const auto offsets = site_offsets(spec);

  Cohort cohort;
  cohort.t = spec.t;
  cohort.atlases = spec.atlases;

  int idx = 0;
  for (std::size_t s = 0; s < spec.site_sizes.size(); ++s) {
    for (int i = 0; i < spec.site_sizes[s]; ++i, ++idx) {
      SubjectRecord rec;
      char id[16];
      std::snprintf(id, sizeof(id), "s%04d", idx + 1);
      rec.id = id;
      rec.site = static_cast<int>(s);
      rec.label = i % 2 == 0 ? Label::positive : Label::negative;

      Rng rng(derive_seed(spec.seed, kSubjectStream, idx));
      rec.age = 18.0 + 47.0 * uniform_double(rng);
      rec.sex = static_cast<int>(bounded_uint(rng, 2));
      Eigen::MatrixXd factors = gaussian_matrix(spec.t, l, rng);

      for (int a = 0; a < n_atlas; ++a) {
        const int n = spec.atlases[a].n_rois;
        Eigen::MatrixXd mix = loadings[a];
        if (rec.label == Label::positive && spec.signal_strength > 0.0) {
          const int bs = block_size(n);
          for (int c = 0; c < bs; ++c)
            mix.col(c) += spec.signal_strength * signal_dir[a];
        }
        TimeSeries ts;
        ts.atlas = spec.atlases[a].name;
        ts.values = factors * mix +
                    spec.noise_floor * gaussian_matrix(spec.t, n, rng);
        ts.values.array() += offsets[s];
        rec.series[ts.atlas] = std::move(ts);
      }
      cohort.subjects.push_back(std::move(rec));
    }
  }
  return cohort;
}

nlohmann::json synth_ground_truth(const SynthSpec& spec) {
  nlohmann::json atlases = nlohmann::json::array();
  for (const auto& a : spec.atlases) {
    std::vector<int> block;
    for (int i = 0; i < block_size(a.n_rois); ++i) block.push_back(i);
    atlases.push_back({{"name", a.name},
                       {"n_rois", a.n_rois},
                       {"planted_block", block}});
  }
  return {{"seed", spec.seed},
          {"signal_strength", spec.signal_strength},
          {"site_shift", spec.site_shift},
          {"site_offsets", site_offsets(spec)},
          {"noise_floor", spec.noise_floor},
          {"latent_factors", spec.latent_factors},
          {"atlases", atlases}};
}

void write_cohort(const Cohort& cohort, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "series");

  nlohmann::json atlases = nlohmann::json::array();
  for (const auto& a : cohort.atlases)
    atlases.push_back({{"name", a.name}, {"n_rois", a.n_rois}});

  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& rec : cohort.subjects) {
    nlohmann::json series = nlohmann::json::object();
    for (const auto& [atlas, ts] : rec.series) {
      const std::string rel = "series/" + rec.id + "_" + atlas + ".csv";
      write_matrix_csv(dir / rel, ts.values);
      series[atlas] = rel;
    }
    subjects.push_back({{"id", rec.id},
                        {"site", rec.site},
                        {"label", label_to_string(rec.label)},
                        {"age", rec.age},
                        {"sex", rec.sex},
                        {"series", series}});
  }

  nlohmann::json manifest = {
      {"t", cohort.t}, {"atlases", atlases}, {"subjects", subjects}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

void generate_to_disk(const SynthSpec& spec, const std::filesystem::path& dir) {
  Cohort cohort = generate_cohort(spec);
  write_cohort(cohort, dir);
  write_text_file(dir / "ground_truth.json",
                  synth_ground_truth(spec).dump(2) + "\n");
}

}  // namespace magat
