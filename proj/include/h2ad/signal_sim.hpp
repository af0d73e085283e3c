#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "h2ad/array_model.hpp"

namespace h2ad {

/// Far-field narrowband scene. Powers are linear; only their ratio matters.
struct SourceScene {
  std::vector<double> angles;  // radians
  double signal_power = 1.0;
  double noise_power = 1.0;
  int num_snapshots = 200;
  std::uint64_t seed = 0;

  static SourceScene from_snr_db(std::vector<double> angles, double snr_db, int num_snapshots,
                                 std::uint64_t seed, double noise_power = 1.0);

  int num_sources() const { return static_cast<int>(angles.size()); }
  double snr_db() const;
  /// Throws ConfigError on empty/duplicate angles or bad powers. Either power
  /// may be zero (muted sources, or noise-free diagnostics) but not both.
  void validate() const;
};

enum class Combining {
  Analog,        // K_q rows, one per RF chain
  FullyDigital,  // N_q rows, diagnostic mode without analog combining
};

struct SnapshotMatrix {
  CMatrix data;  // rows x T_s
  int group = 0;

  int rows() const { return static_cast<int>(data.rows()); }
  int snapshots() const { return static_cast<int>(data.cols()); }
};

/// Observed manifold of group q for every source: B^H A_q (analog) or A_q.
CMatrix effective_manifold(const ArrayConfig& config, const std::vector<double>& angles, int q,
                           Combining mode);

/// Shared source matrix S (A x T_s) for a scene.
CMatrix source_signals(const SourceScene& scene);

/// Y_q = B^H A_q S + W_q for one group. S is the scene's shared source matrix,
/// so calling this for each q matches generate_all_groups().
SnapshotMatrix generate_group_snapshots(const ArrayConfig& config, const SourceScene& scene, int q,
                                        Combining mode = Combining::Analog);

/// All Q groups with one shared S and independent noise per group.
std::vector<SnapshotMatrix> generate_all_groups(const ArrayConfig& config, const SourceScene& scene,
                                                Combining mode = Combining::Analog);

/// Binary dump: "H2ADSNAP", u32 rows, u32 cols, u32 group, u32 reserved (all
/// little-endian), then rows*cols interleaved (re, im) float64 in row-major order.
void write_snapshots(const std::filesystem::path& path, const SnapshotMatrix& y);
SnapshotMatrix read_snapshots(const std::filesystem::path& path);

}  // namespace h2ad
