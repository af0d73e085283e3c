#include "h2ad/signal_sim.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "h2ad/rng.hpp"

namespace h2ad {

namespace {

constexpr std::uint64_t kSourceStream = 0;
constexpr std::uint64_t kNoiseStreamBase = 1;
constexpr char kSnapMagic[8] = {'H', '2', 'A', 'D', 'S', 'N', 'A', 'P'};

static_assert(std::endian::native == std::endian::little, "snapshot dump assumes a little-endian host");

void check_model_order(const ArrayConfig& config, const SourceScene& scene, Combining mode) {
  if (mode != Combining::Analog) return;
  if (scene.num_sources() > config.subarrays_per_group())
    throw ModelOrderError("source count " + std::to_string(scene.num_sources()) +
                          " exceeds the " + std::to_string(config.subarrays_per_group()) +
                          " RF chains per group");
}

SnapshotMatrix observe(const ArrayConfig& config, const SourceScene& scene, const CMatrix& s, int q,
                       Combining mode) {
  const CMatrix manifold = effective_manifold(config, scene.angles, q, mode);
  SnapshotMatrix y{manifold * s, q};
  if (scene.noise_power == 0.0) return y;
  Engine eng = make_engine(scene.seed, kNoiseStreamBase + static_cast<std::uint64_t>(q));
  ComplexGaussian noise(scene.noise_power);
  // Column-major fill keeps the draw order snapshot by snapshot.
  for (Eigen::Index t = 0; t < y.data.cols(); ++t)
    for (Eigen::Index r = 0; r < y.data.rows(); ++r) y.data(r, t) += noise(eng);
  return y;
}

}  // namespace

SourceScene SourceScene::from_snr_db(std::vector<double> angles, double snr_db, int num_snapshots,
                                     std::uint64_t seed, double noise_power) {
  SourceScene scene;
  scene.angles = std::move(angles);
  scene.noise_power = noise_power;
  scene.signal_power = noise_power * std::pow(10.0, snr_db / 10.0);
  scene.num_snapshots = num_snapshots;
  scene.seed = seed;
  return scene;
}

double SourceScene::snr_db() const { return 10.0 * std::log10(signal_power / noise_power); }

void SourceScene::validate() const {
  if (angles.empty()) throw ConfigError("scene: at least one source angle is required");
  for (size_t i = 0; i < angles.size(); ++i) {
    check_angle(angles[i]);
    for (size_t j = i + 1; j < angles.size(); ++j) {
      if (angles[i] == angles[j]) throw ConfigError("scene: source angles must be pairwise distinct");
    }
  }
  if (!(signal_power >= 0.0) || !std::isfinite(signal_power)) throw ConfigError("scene: signal power must be >= 0");
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power)) throw ConfigError("scene: noise power must be >= 0");
  if (signal_power == 0.0 && noise_power == 0.0) throw ConfigError("scene: signal and noise cannot both be muted");
  if (num_snapshots < 1) throw ConfigError("scene: snapshot count must be positive");
}

CMatrix effective_manifold(const ArrayConfig& config, const std::vector<double>& angles, int q,
                           Combining mode) {
  config.check_group(q);
  const int n = config.group_size(q);
  CMatrix a(n, static_cast<Eigen::Index>(angles.size()));
  for (size_t i = 0; i < angles.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = steering(config, q, angles[i]).entries;
  if (mode == Combining::FullyDigital) return a;
  return combiner(config, q) * a;
}

CMatrix source_signals(const SourceScene& scene) {
  Engine eng = make_engine(scene.seed, kSourceStream);
  ComplexGaussian draw(scene.signal_power > 0.0 ? scene.signal_power : 1.0);
  const double mute = scene.signal_power > 0.0 ? 1.0 : 0.0;
  CMatrix s(scene.num_sources(), scene.num_snapshots);
  for (Eigen::Index t = 0; t < s.cols(); ++t)
    for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, t) = mute * draw(eng);
  return s;
}

SnapshotMatrix generate_group_snapshots(const ArrayConfig& config, const SourceScene& scene, int q,
                                        Combining mode) {
  scene.validate();
  config.check_group(q);
  check_model_order(config, scene, mode);
  return observe(config, scene, source_signals(scene), q, mode);
}

std::vector<SnapshotMatrix> generate_all_groups(const ArrayConfig& config, const SourceScene& scene,
                                                Combining mode) {
  scene.validate();
  check_model_order(config, scene, mode);
  const CMatrix s = source_signals(scene);
  std::vector<SnapshotMatrix> out;
  out.reserve(config.num_groups());
  for (int q = 0; q < config.num_groups(); ++q) out.push_back(observe(config, scene, s, q, mode));
  return out;
}

void write_snapshots(const std::filesystem::path& path, const SnapshotMatrix& y) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open snapshot file for writing: " + path.string());
  const std::array<std::uint32_t, 4> header{static_cast<std::uint32_t>(y.rows()),
                                            static_cast<std::uint32_t>(y.snapshots()),
                                            static_cast<std::uint32_t>(y.group), 0u};
  os.write(kSnapMagic, sizeof(kSnapMagic));
  os.write(reinterpret_cast<const char*>(header.data()), sizeof(header));
  for (Eigen::Index r = 0; r < y.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < y.data.cols(); ++c) {
      const double v[2] = {y.data(r, c).real(), y.data(r, c).imag()};
      os.write(reinterpret_cast<const char*>(v), sizeof(v));
    }
  }
  if (!os) throw InputError("failed writing snapshot file: " + path.string());
}

SnapshotMatrix read_snapshots(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open snapshot file: " + path.string());
  char magic[8];
  std::array<std::uint32_t, 4> header{};
  is.read(magic, sizeof(magic));
  is.read(reinterpret_cast<char*>(header.data()), sizeof(header));
  if (!is || std::memcmp(magic, kSnapMagic, sizeof(magic)) != 0) throw InputError("not a snapshot file: " + path.string());
  SnapshotMatrix y{CMatrix(header[0], header[1]), static_cast<int>(header[2])};
  for (Eigen::Index r = 0; r < y.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < y.data.cols(); ++c) {
      double v[2];
      is.read(reinterpret_cast<char*>(v), sizeof(v));
      y.data(r, c) = {v[0], v[1]};
    }
  }
  if (!is) throw InputError("truncated snapshot file: " + path.string());
  return y;
}

}  // namespace h2ad
