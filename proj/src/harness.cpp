#include "h2ad/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string_view>

#include "h2ad/crlb.hpp"
#include "h2ad/features.hpp"
#include "h2ad/csv.hpp"
#include "h2ad/hash.hpp"
#include "h2ad/parallel.hpp"
#include "h2ad/spectral.hpp"

namespace h2ad::harness {

namespace fs = std::filesystem;

namespace {

const std::string kTrainHint = "run `h2ad train --out DIR` and pass the resulting models directory";

std::string sv() { return std::to_string(kSchemaVersion); }

std::string sanitize(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r' || c == '"'; }, ' ');
  return s;
}

std::uint64_t trial_seed(std::uint64_t seed, size_t point, size_t trial) {
  return mix_seed(mix_seed(seed, point), trial);
}

std::vector<double> to_radians(const std::vector<double>& deg) {
  std::vector<double> out;
  for (double d : deg) out.push_back(deg2rad(d));
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

int profile_trials(Profile p, int default_trials, int smoke_trials) {
  switch (p) {
    case Profile::Smoke: return smoke_trials;
    case Profile::Paper: return 5000;
    case Profile::Default: break;
  }
  return default_trials;
}

std::optional<ConfigFile> open_config(const RunOptions& opts) {
  if (!opts.config) return std::nullopt;
  return ConfigFile::load(*opts.config);
}

// Keys in sections this experiment owns must all have been read; other
// sections are left alone so one file can serve several subcommands.
void reject_unknown_keys(const ConfigFile& f, std::initializer_list<std::string_view> owned) {
  std::string unknown;
  for (const auto& name : f.unused_keys()) {
    const auto dot = name.find('.');
    const std::string_view section = dot == std::string::npos ? std::string_view{} : std::string_view(name).substr(0, dot);
    unknown += (unknown.empty() ? "" : ", ") + name;
    if (std::find(owned.begin(), owned.end(), section) == owned.end()) unknown += " (section not used here)";
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

void apply_array(const ConfigFile& f, ArraySettings& a) {
  a.subarrays = static_cast<int>(f.get_int("array", "subarrays", a.subarrays));
  a.antennas = f.get_ints("array", "antennas", a.antennas);
  a.spacing = f.get_double("array", "spacing", a.spacing);
  a.wavelength = f.get_double("array", "wavelength", a.wavelength);
}

void apply_sweep(const ConfigFile& f, SnrSweep& s) {
  s.start_db = f.get_double("sweep", "snr_start_db", s.start_db);
  s.stop_db = f.get_double("sweep", "snr_stop_db", s.stop_db);
  s.step_db = f.get_double("sweep", "snr_step_db", s.step_db);
}

void apply_omc(const ConfigFile& f, OmcParams& p) {
  p.radius_deg = f.get_double("omc", "radius_deg", p.radius_deg);
  p.decay = f.get_double("omc", "decay", p.decay);
  p.eviction_floor = f.get_double("omc", "eviction_floor", p.eviction_floor);
  p.merge_deg = f.get_double("omc", "merge_deg", p.merge_deg);
  const auto ranking = f.get_string("omc", "ranking", p.ranking == OmcRanking::Weight ? "weight" : "support");
  if (ranking == "weight") {
    p.ranking = OmcRanking::Weight;
  } else if (ranking == "support") {
    p.ranking = OmcRanking::Support;
  } else {
    throw ConfigError("omc.ranking must be 'weight' or 'support'");
  }
}

void apply_hyper(const ConfigFile& f, const std::string& section, nn::TrainHyper& h) {
  h.learning_rate = f.get_double(section, "learning_rate", h.learning_rate);
  h.momentum = f.get_double(section, "momentum", h.momentum);
  h.epochs = static_cast<int>(f.get_int(section, "epochs", h.epochs));
  h.batch = static_cast<int>(f.get_int(section, "batch", h.batch));
  h.lr_step_epochs = static_cast<int>(f.get_int(section, "lr_step_epochs", h.lr_step_epochs));
  h.lr_decay = f.get_double(section, "lr_decay", h.lr_decay);
  h.dropout = f.get_double(section, "dropout", h.dropout);
}

void check_array(const ArraySettings& a) {
  if (a.subarrays < 1) throw ConfigError("array.subarrays must be >= 1");
  if (a.antennas.empty()) throw ConfigError("array.antennas must list at least one group");
  (void)a.build();
}

void check_trials(int trials) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
}

void check_model(bool enabled, const fs::path& path, const std::string& name) {
  if (!enabled) return;
  if (path.empty()) throw ConfigError(name + " estimator selected but no model file configured; " + kTrainHint);
  if (!fs::exists(path)) throw ConfigError(name + " model file not found: " + path.string() + "; " + kTrainHint);
}

}  // namespace

Profile parse_profile(const std::string& name) {
  if (name == "default") return Profile::Default;
  if (name == "smoke") return Profile::Smoke;
  if (name == "paper") return Profile::Paper;
  throw ConfigError("unknown profile '" + name + "' (expected smoke or paper)");
}

std::vector<double> SnrSweep::points() const {
  validate();
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((stop_db - start_db) / step_db + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(start_db + static_cast<double>(i) * step_db);
  return out;
}

void SnrSweep::validate() const {
  if (!(step_db > 0.0)) throw ConfigError("SNR sweep step must be > 0");
  if (!(stop_db >= start_db)) throw ConfigError("SNR sweep is empty: stop is below start");
}

ArrayConfig ArraySettings::build() const {
  return ArrayConfig(subarrays, antennas, spacing * wavelength, wavelength);
}

void NumberSensingConfig::validate() const {
  check_array(array);
  if (num_sources < 1) throw ConfigError("scene.sources must be >= 1");
  if (snapshots < 1) throw ConfigError("scene.snapshots must be >= 1");
  sweep.validate();
  check_trials(trials);
  if (!(use_edc || use_dense || use_cnn || use_fcnn)) throw ConfigError("no number-sensing estimator enabled");
  check_model(use_dense, dense_model, "dense");
  check_model(use_cnn, cnn_model, "cnn");
  check_model(use_fcnn, fcnn_model, "fcnn");
}

void DoaConfig::validate() const {
  check_array(array);
  if (angles_deg.empty()) throw ConfigError("scene.angles_deg must list at least one angle");
  if (snapshots < 1) throw ConfigError("scene.snapshots must be >= 1");
  sweep.validate();
  check_trials(trials);
  if (!(use_omc || use_wgmd || use_wlmd)) throw ConfigError("no fusion method enabled");
  if (!(gate_deg > 0.0)) throw ConfigError("fusion.gate_deg must be > 0");
}

void ComplexityConfig::validate() const {
  if (sizes.empty()) throw ConfigError("complexity sweep is empty");
  if (repetitions < 1) throw ConfigError("complexity.repetitions must be >= 1");
  for (const auto& s : sizes) (void)ArraySettings{subarrays, s}.build();
}

void CrlbSweepConfig::validate() const {
  check_array(array);
  if (angles_deg.empty()) throw ConfigError("scene.angles_deg must list at least one angle");
  if (snapshots < 1) throw ConfigError("scene.snapshots must be >= 1");
  sweep.validate();
}

void TrainConfig::validate() const {
  check_array(array);
  data.validate();
  if (!(train_dense || train_fcnn || train_cnn)) throw ConfigError("no model selected for training");
  for (const auto* h : {&dense_hyper, &cnn_hyper})
    if (h->epochs < 0 || h->batch < 1 || !(h->learning_rate > 0.0)) throw ConfigError("invalid training hyperparameters");
}

NumberSensingConfig load_number_sensing(const RunOptions& opts) {
  NumberSensingConfig cfg;
  cfg.trials = profile_trials(opts.profile, 500, 20);
  if (opts.profile == Profile::Smoke) cfg.sweep.step_db = 4.0;
  fs::path models_dir;
  if (auto f = open_config(opts)) {
    apply_array(*f, cfg.array);
    apply_sweep(*f, cfg.sweep);
    cfg.num_sources = static_cast<int>(f->get_int("scene", "sources", cfg.num_sources));
    cfg.snapshots = static_cast<int>(f->get_int("scene", "snapshots", cfg.snapshots));
    cfg.max_angle_deg = f->get_double("scene", "max_angle_deg", cfg.max_angle_deg);
    cfg.min_separation_deg = f->get_double("scene", "min_separation_deg", cfg.min_separation_deg);
    cfg.trials = static_cast<int>(f->get_int("sweep", "trials", cfg.trials));
    cfg.seed = static_cast<std::uint64_t>(f->get_int("run", "seed", static_cast<long>(cfg.seed)));
    cfg.edc.exponent = f->get_double("edc", "epsilon_exponent", cfg.edc.exponent);
    cfg.edc.eps = f->get_double("edc", "eps", cfg.edc.eps);
    cfg.edc.min_pts = static_cast<int>(f->get_int("edc", "min_pts", cfg.edc.min_pts));
    models_dir = f->get_string("models", "dir", "");
    cfg.dense_model = f->get_string("models", "dense", "");
    cfg.cnn_model = f->get_string("models", "cnn", "");
    cfg.fcnn_model = f->get_string("models", "fcnn", "");
    cfg.use_edc = f->get_bool("estimators", "edc", cfg.use_edc);
    if (opts.models_dir) models_dir = *opts.models_dir;
    const bool have_models = !models_dir.empty() || !cfg.dense_model.empty() || !cfg.cnn_model.empty() ||
                             !cfg.fcnn_model.empty();
    cfg.use_dense = f->get_bool("estimators", "dense", have_models);
    cfg.use_cnn = f->get_bool("estimators", "cnn", have_models);
    cfg.use_fcnn = f->get_bool("estimators", "fcnn", have_models);
    reject_unknown_keys(*f, {"array", "sweep", "scene", "run", "edc", "models", "estimators"});
  } else if (opts.models_dir) {
    models_dir = *opts.models_dir;
    cfg.use_dense = cfg.use_cnn = cfg.use_fcnn = true;
  }
  if (!models_dir.empty()) {
    if (cfg.dense_model.empty()) cfg.dense_model = models_dir / "dense.h2adnn";
    if (cfg.cnn_model.empty()) cfg.cnn_model = models_dir / "cnn.h2adnn";
    if (cfg.fcnn_model.empty()) cfg.fcnn_model = models_dir / "fcnn.h2adnn";
  }
  if (opts.trials) cfg.trials = *opts.trials;
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.out_dir = opts.out_dir;
  cfg.validate();
  return cfg;
}

DoaConfig load_doa(const RunOptions& opts) {
  DoaConfig cfg;
  cfg.trials = profile_trials(opts.profile, 200, 20);
  if (auto f = open_config(opts)) {
    apply_array(*f, cfg.array);
    apply_sweep(*f, cfg.sweep);
    apply_omc(*f, cfg.omc);
    cfg.angles_deg = f->get_doubles("scene", "angles_deg", cfg.angles_deg);
    cfg.snapshots = static_cast<int>(f->get_int("scene", "snapshots", cfg.snapshots));
    cfg.trials = static_cast<int>(f->get_int("sweep", "trials", cfg.trials));
    cfg.seed = static_cast<std::uint64_t>(f->get_int("run", "seed", static_cast<long>(cfg.seed)));
    cfg.use_omc = f->get_bool("estimators", "omc", cfg.use_omc);
    cfg.use_wgmd = f->get_bool("estimators", "wgmd", cfg.use_wgmd);
    cfg.use_wlmd = f->get_bool("estimators", "wlmd", cfg.use_wlmd);
    cfg.distance.group_weights = f->get_doubles("fusion", "group_weights", {});
    cfg.gate_deg = f->get_double("fusion", "gate_deg", cfg.gate_deg);
    reject_unknown_keys(*f, {"array", "sweep", "scene", "run", "estimators", "omc", "fusion"});
  }
  if (opts.trials) cfg.trials = *opts.trials;
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.out_dir = opts.out_dir;
  cfg.validate();
  return cfg;
}

ComplexityConfig load_complexity(const RunOptions& opts) {
  ComplexityConfig cfg;
  cfg.repetitions = opts.profile == Profile::Smoke ? 3 : (opts.profile == Profile::Paper ? 200 : 20);
  if (auto f = open_config(opts)) {
    cfg.subarrays = static_cast<int>(f->get_int("array", "subarrays", cfg.subarrays));
    apply_omc(*f, cfg.omc);
    if (auto raw = f->raw("complexity", "sizes")) {
      // Groups separated by ';', antennas within a group by ','.
      cfg.sizes.clear();
      std::istringstream is(*raw);
      std::string item;
      while (std::getline(is, item, ';')) {
        const auto one = ConfigFile::parse("x = " + item).get_ints("", "x", {});
        if (!one.empty()) cfg.sizes.push_back(one);
      }
    }
    cfg.angles_deg = f->get_doubles("scene", "angles_deg", cfg.angles_deg);
    cfg.snapshots = static_cast<int>(f->get_int("scene", "snapshots", cfg.snapshots));
    cfg.snr_db = f->get_double("complexity", "snr_db", cfg.snr_db);
    cfg.repetitions = static_cast<int>(f->get_int("complexity", "repetitions", cfg.repetitions));
    cfg.seed = static_cast<std::uint64_t>(f->get_int("run", "seed", static_cast<long>(cfg.seed)));
    reject_unknown_keys(*f, {"array", "omc", "complexity", "scene", "run"});
  }
  if (opts.trials) cfg.repetitions = *opts.trials;
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.out_dir = opts.out_dir;
  cfg.validate();
  return cfg;
}

CrlbSweepConfig load_crlb_sweep(const RunOptions& opts) {
  CrlbSweepConfig cfg;
  if (opts.profile == Profile::Smoke) cfg.sweep.step_db = 5.0;
  if (auto f = open_config(opts)) {
    apply_array(*f, cfg.array);
    apply_sweep(*f, cfg.sweep);
    cfg.angles_deg = f->get_doubles("scene", "angles_deg", cfg.angles_deg);
    cfg.snapshots = static_cast<int>(f->get_int("scene", "snapshots", cfg.snapshots));
    reject_unknown_keys(*f, {"array", "sweep", "scene"});
  }
  cfg.out_dir = opts.out_dir;
  cfg.validate();
  return cfg;
}

TrainConfig load_train(const RunOptions& opts) {
  TrainConfig cfg;
  cfg.cnn_hyper.epochs = 30;
  cfg.cnn_hyper.lr_step_epochs = 10;
  switch (opts.profile) {
    case Profile::Smoke:
      cfg.data.samples_per_class = 60;
      cfg.dense_hyper.epochs = 3;
      cfg.cnn_hyper.epochs = 2;
      break;
    case Profile::Paper:
      cfg.data.samples_per_class = 5000;
      break;
    case Profile::Default:
      cfg.data.samples_per_class = 2500;
      break;
  }
  if (auto f = open_config(opts)) {
    apply_array(*f, cfg.array);
    cfg.data.max_sources = static_cast<int>(f->get_int("train", "max_sources", cfg.data.max_sources));
    cfg.data.samples_per_class =
        static_cast<int>(f->get_int("train", "samples_per_class", cfg.data.samples_per_class));
    cfg.data.snr_min_db = f->get_double("train", "snr_min_db", cfg.data.snr_min_db);
    cfg.data.snr_max_db = f->get_double("train", "snr_max_db", cfg.data.snr_max_db);
    cfg.data.max_angle_deg = f->get_double("scene", "max_angle_deg", cfg.data.max_angle_deg);
    cfg.data.min_separation_deg = f->get_double("scene", "min_separation_deg", cfg.data.min_separation_deg);
    cfg.data.num_snapshots = static_cast<int>(f->get_int("scene", "snapshots", cfg.data.num_snapshots));
    cfg.data.seed = static_cast<std::uint64_t>(f->get_int("run", "seed", static_cast<long>(cfg.data.seed)));
    cfg.dense.hidden = static_cast<int>(f->get_int("dense", "hidden", cfg.dense.hidden));
    cfg.dense.hidden_layers = static_cast<int>(f->get_int("dense", "hidden_layers", cfg.dense.hidden_layers));
    cfg.dense.dropout = f->get_double("dense", "dropout", cfg.dense.dropout);
    apply_hyper(*f, "dense", cfg.dense_hyper);
    apply_hyper(*f, "cnn", cfg.cnn_hyper);
    cfg.train_dense = f->get_bool("train", "dense", cfg.train_dense);
    cfg.train_fcnn = f->get_bool("train", "fcnn", cfg.train_fcnn);
    cfg.train_cnn = f->get_bool("train", "cnn", cfg.train_cnn);
    reject_unknown_keys(*f, {"array", "train", "scene", "run", "dense", "cnn"});
  }
  if (opts.seed) cfg.data.seed = *opts.seed;
  cfg.dense_hyper.seed = mix_seed(cfg.data.seed, 0x7D);
  cfg.cnn_hyper.seed = mix_seed(cfg.data.seed, 0x7C);
  cfg.out_dir = opts.out_dir;
  cfg.validate();
  return cfg;
}

NumberSensingResult run_number_sensing_experiment(const NumberSensingConfig& cfg) {
  cfg.validate();
  const ArrayConfig array = cfg.array.build();
  ensure_dir(cfg.out_dir);

  struct Model {
    std::string tag;
    nn::Network net;
    nn::InputKind kind;
  };
  std::vector<Model> models;
  if (cfg.use_dense) models.push_back({"dense", nn::Network::load(cfg.dense_model), nn::InputKind::Features});
  if (cfg.use_cnn) models.push_back({"cnn", nn::Network::load(cfg.cnn_model), nn::InputKind::LogEigenvalues});
  if (cfg.use_fcnn) models.push_back({"fcnn", nn::Network::load(cfg.fcnn_model), nn::InputKind::FeaturesNoEntropy});
  if (!models.empty() && cfg.num_sources > models.front().net.num_classes())
    throw ConfigError("scene has more sources than the trained models' classes");

  std::vector<std::string> estimators;
  if (cfg.use_edc) estimators.push_back("edc");
  for (const auto& m : models) estimators.push_back(m.tag);

  NumberSensingResult res;
  res.snr_db = cfg.sweep.points();
  res.trials_csv = cfg.out_dir / "number_sensing_trials.csv";
  res.summary_csv = cfg.out_dir / "number_sensing_accuracy.csv";
  CsvWriter trials(res.trials_csv,
                   {"schema_version", "experiment", "snr_db", "trial", "estimator", "metric", "value", "detail"});
  CsvWriter summary(res.summary_csv, {"schema_version", "snr_db", "estimator", "accuracy", "trials", "failures"});

  const int n = cfg.trials;
  for (size_t p = 0; p < res.snr_db.size(); ++p) {
    const double snr = res.snr_db[p];
    std::vector<int> edc_estimate(static_cast<size_t>(n), -1);
    std::vector<std::string> failure(static_cast<size_t>(n));
    nn::LabeledDataset spectra;
    spectra.num_classes = models.empty() ? cfg.num_sources : models.front().net.num_classes();
    spectra.kind = nn::InputKind::LogEigenvalues;
    spectra.labels.assign(static_cast<size_t>(n), cfg.num_sources - 1);
    spectra.snr_db.assign(static_cast<size_t>(n), snr);
    spectra.split.assign(static_cast<size_t>(n), nn::Split::Test);
    int width = 0;
    for (int q = 0; q < array.num_groups(); ++q) width += array.group_size(q);
    spectra.inputs = RMatrix::Zero(n, width);

    parallel_for(static_cast<size_t>(n), [&](size_t t) {
      try {
        const auto seed = trial_seed(cfg.seed, p, t);
        Engine eng = make_engine(seed, 0xA4);
        auto angles = nn::draw_angles(eng, cfg.num_sources, deg2rad(cfg.max_angle_deg), deg2rad(cfg.min_separation_deg));
        const auto scene = SourceScene::from_snr_db(std::move(angles), snr, cfg.snapshots, seed);
        std::vector<std::vector<double>> groups;
        std::vector<double> pooled;
        for (const auto& y : generate_all_groups(array, scene, Combining::FullyDigital)) {
          const RVector ev = hermitian_eigenvalues(sample_covariance(y).data);
          groups.emplace_back(ev.data(), ev.data() + ev.size());
          pooled.insert(pooled.end(), ev.data(), ev.data() + ev.size());
        }
        if (cfg.use_edc) edc_estimate[t] = edc::estimate_count(groups, cfg.edc).estimate;
        std::sort(pooled.begin(), pooled.end(), std::greater<>());
        for (int k = 0; k < width; ++k)
          spectra.inputs(static_cast<Eigen::Index>(t), k) = std::log(std::max(pooled[static_cast<size_t>(k)], nn::kEigenFloor));
      } catch (const Error& e) {
        failure[t] = sanitize(e.what());
      }
    });

    std::map<std::string, std::vector<int>> estimates;
    if (cfg.use_edc) estimates["edc"] = edc_estimate;
    for (auto& m : models) {
      RMatrix x = spectra.inputs;
      if (m.kind != nn::InputKind::LogEigenvalues)
        x = nn::to_features(spectra, m.kind == nn::InputKind::Features).inputs;
      if (x.cols() != m.net.input_shape().size())
        throw ConfigError(m.tag + " model expects " + std::to_string(m.net.input_shape().size()) +
                          " inputs but the array produces " + std::to_string(x.cols()));
      auto cls = m.net.predict(nn::pack_inputs(x, m.net.input_shape()));
      for (auto& c : cls) c += 1;
      estimates[m.tag] = std::move(cls);
    }

    for (int t = 0; t < n; ++t)
      for (const auto& est : estimators) {
        const std::vector<std::string> head{sv(), "number_sensing", format_real(snr), std::to_string(t), est};
        auto row = [&](const std::string& metric, const std::string& value, const std::string& detail) {
          auto r = head;
          r.insert(r.end(), {metric, value, detail});
          trials.row(r);
        };
        if (!failure[static_cast<size_t>(t)].empty()) {
          row("failure", "1", failure[static_cast<size_t>(t)]);
          continue;
        }
        const int e = estimates[est][static_cast<size_t>(t)];
        row("estimate", std::to_string(e), "");
        row("correct", e == cfg.num_sources ? "1" : "0", "");
      }
    for (const auto& est : estimators) {
      int correct = 0, failures = 0;
      for (int t = 0; t < n; ++t) {
        if (!failure[static_cast<size_t>(t)].empty()) {
          ++failures;
          continue;
        }
        correct += estimates[est][static_cast<size_t>(t)] == cfg.num_sources ? 1 : 0;
      }
      const double acc = static_cast<double>(correct) / n;
      res.accuracy[est].push_back(acc);
      summary.row({sv(), format_real(snr), est, format_real(acc), std::to_string(n), std::to_string(failures)});
    }
  }
  trials.flush();
  summary.flush();
  return res;
}

DoaResult run_doa_experiment(const DoaConfig& cfg) {
  cfg.validate();
  const ArrayConfig array = cfg.array.build();
  ensure_dir(cfg.out_dir);
  const auto truth = to_radians(cfg.angles_deg);
  const int a = static_cast<int>(truth.size());

  std::vector<FusionMethod> methods;
  if (cfg.use_omc) methods.push_back(FusionMethod::Omc);
  if (cfg.use_wgmd) methods.push_back(FusionMethod::Wgmd);
  if (cfg.use_wlmd) methods.push_back(FusionMethod::Wlmd);

  DoaResult res;
  res.trials_csv = cfg.out_dir / "doa_trials.csv";
  res.summary_csv = cfg.out_dir / "doa_summary.csv";
  CsvWriter trials(res.trials_csv,
                   {"schema_version", "experiment", "snr_db", "trial", "estimator", "metric", "value", "detail"});
  CsvWriter summary(res.summary_csv, {"schema_version", "snr_db", "estimator", "angle_deg", "accuracy", "rmse_deg",
                                      "crlb_std_deg", "trials", "failures"});

  const auto snrs = cfg.sweep.points();
  const size_t n = static_cast<size_t>(cfg.trials);
  for (size_t p = 0; p < snrs.size(); ++p) {
    const double snr = snrs[p];
    std::vector<double> crlb_std(static_cast<size_t>(a), std::numeric_limits<double>::quiet_NaN());
    try {
      const auto bound = crlb(array, SourceScene::from_snr_db(truth, snr, cfg.snapshots, 0), cfg.snapshots).bound;
      for (int i = 0; i < a; ++i) crlb_std[static_cast<size_t>(i)] = rad2deg(std::sqrt(bound[static_cast<size_t>(i)]));
    } catch (const NumericError&) {
    }

    struct Trial {
      int candidates = 0;
      std::string candidate_failure;
      std::vector<std::optional<std::vector<double>>> estimates;  // per method
      std::vector<std::string> failures;
    };
    std::vector<Trial> out(n);
    parallel_for(n, [&](size_t t) {
      Trial& tr = out[t];
      tr.estimates.assign(methods.size(), std::nullopt);
      tr.failures.assign(methods.size(), "");
      CandidateAngleSet set;
      try {
        const auto scene = SourceScene::from_snr_db(truth, snr, cfg.snapshots, trial_seed(cfg.seed, p, t));
        set = build_candidate_set(array, generate_all_groups(array, scene), a);
        tr.candidates = set.size();
      } catch (const Error& e) {
        tr.candidate_failure = sanitize(e.what());
        return;
      }
      for (size_t k = 0; k < methods.size(); ++k) {
        try {
          FusionResult r;
          switch (methods[k]) {
            case FusionMethod::Omc: r = omc_fuse(set.candidates, a, cfg.omc); break;
            case FusionMethod::Wgmd: r = wgmd_fuse(set.candidates, a, cfg.distance); break;
            case FusionMethod::Wlmd: r = wlmd_fuse(set.candidates, a, cfg.distance); break;
          }
          tr.estimates[k] = r.angles;
        } catch (const Error& e) {
          tr.failures[k] = sanitize(e.what());
        }
      }
    });

    for (size_t t = 0; t < n; ++t) {
      const Trial& tr = out[t];
      auto row = [&](const std::string& est, const std::string& metric, const std::string& value,
                     const std::string& detail) {
        trials.row({sv(), "doa", format_real(snr), std::to_string(t), est, metric, value, detail});
      };
      if (!tr.candidate_failure.empty()) {
        row("esprit", "failure", "1", tr.candidate_failure);
        continue;
      }
      res.candidate_counts.push_back(tr.candidates);
      row("esprit", "candidates", std::to_string(tr.candidates), "");
      for (size_t k = 0; k < methods.size(); ++k) {
        const auto name = method_name(methods[k]);
        if (!tr.estimates[k]) {
          row(name, "failure", "1", tr.failures[k]);
          continue;
        }
        const auto rep = accuracy_and_rmse({tr.estimates[k]}, truth, cfg.gate_deg);
        for (int i = 0; i < a; ++i) {
          const auto idx = static_cast<size_t>(i);
          if (idx < tr.estimates[k]->size())
            row(name, "estimate_deg_" + std::to_string(i + 1), format_real(rad2deg((*tr.estimates[k])[idx])), "");
          double err = std::numeric_limits<double>::infinity();
          for (double e : *tr.estimates[k]) err = std::min(err, std::abs(rad2deg(e - truth[idx])));
          row(name, "abs_error_deg_" + std::to_string(i + 1), format_real(err), "");
        }
        row(name, "correct", rep.overall_accuracy == 1.0 ? "1" : "0", "");
      }
    }

    for (size_t k = 0; k < methods.size(); ++k) {
      std::vector<std::optional<std::vector<double>>> ests;
      int failures = 0;
      for (const auto& tr : out) {
        ests.push_back(tr.candidate_failure.empty() ? tr.estimates[k] : std::nullopt);
        failures += ests.back() ? 0 : 1;
      }
      const auto rep = accuracy_and_rmse(ests, truth, cfg.gate_deg);
      for (int i = 0; i < a; ++i) {
        const auto idx = static_cast<size_t>(i);
        DoaPoint pt{snr, method_name(methods[k]), cfg.angles_deg[idx], rep.accuracy[idx], rep.rmse_deg[idx],
                    crlb_std[idx], failures};
        summary.row({sv(), format_real(snr), pt.estimator, format_real(pt.angle_deg), format_real(pt.accuracy),
                     format_real(pt.rmse_deg), format_real(pt.crlb_std_deg), std::to_string(n),
                     std::to_string(failures)});
        res.points.push_back(std::move(pt));
      }
    }
  }
  trials.flush();
  summary.flush();
  return res;
}

ComplexityResult run_complexity_benchmark(const ComplexityConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  ComplexityResult res;
  res.csv = cfg.out_dir / "complexity.csv";
  CsvWriter csv(res.csv, {"schema_version", "antennas", "candidates", "method", "ns_per_trial", "op_count"});
  const auto truth = to_radians(cfg.angles_deg);
  const int a = static_cast<int>(truth.size());
  for (size_t s = 0; s < cfg.sizes.size(); ++s) {
    const ArrayConfig array = ArraySettings{cfg.subarrays, cfg.sizes[s]}.build();
    const auto scene = SourceScene::from_snr_db(truth, cfg.snr_db, cfg.snapshots, mix_seed(cfg.seed, s));
    const auto set = build_candidate_set(array, generate_all_groups(array, scene), a);
    const std::vector<std::pair<FusionMethod, std::function<FusionResult()>>> runs{
        {FusionMethod::Omc, [&] { return omc_fuse(set.candidates, a, cfg.omc); }},
        {FusionMethod::Wgmd, [&] { return wgmd_fuse(set.candidates, a); }},
        {FusionMethod::Wlmd, [&] { return wlmd_fuse(set.candidates, a); }},
    };
    for (const auto& [method, fn] : runs) {
      std::int64_t ops = 0;
      const auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < cfg.repetitions; ++r) {
        try {
          ops = fn().op_count;
        } catch (const InsufficientSupportError&) {
          ops = -1;
        }
      }
      const auto t1 = std::chrono::steady_clock::now();
      ComplexityRow row;
      row.antennas = array.total_antennas();
      row.candidates = set.size();
      row.method = method_name(method);
      row.ns_per_trial = std::chrono::duration<double, std::nano>(t1 - t0).count() / cfg.repetitions;
      row.op_count = ops;
      csv.row({sv(), std::to_string(row.antennas), std::to_string(row.candidates), row.method,
               format_real(row.ns_per_trial), std::to_string(row.op_count)});
      res.rows.push_back(std::move(row));
    }
  }
  csv.flush();
  return res;
}

CrlbSweepResult run_crlb_sweep(const CrlbSweepConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  const ArrayConfig array = cfg.array.build();
  const auto truth = to_radians(cfg.angles_deg);
  CrlbSweepResult res;
  res.csv = cfg.out_dir / "crlb_sweep.csv";
  CsvWriter csv(res.csv, {"schema_version", "snr_db", "angle_deg", "crlb_deg2", "crlb_diag_deg2"});
  const double to_deg2 = rad2deg(1.0) * rad2deg(1.0);
  for (double snr : cfg.sweep.points()) {
    const auto scene = SourceScene::from_snr_db(truth, snr, cfg.snapshots, 0);
    const auto full = crlb(array, scene, cfg.snapshots, false);
    const auto diag = crlb(array, scene, cfg.snapshots, true);
    for (size_t i = 0; i < truth.size(); ++i)
      csv.row({sv(), format_real(snr), format_real(cfg.angles_deg[i]), format_real(full.bound[i] * to_deg2),
               format_real(diag.bound[i] * to_deg2)});
  }
  csv.flush();
  return res;
}

TrainResult run_training(const TrainConfig& cfg) {
  cfg.validate();
  const ArrayConfig array = cfg.array.build();
  ensure_dir(cfg.out_dir);
  const fs::path model_dir = cfg.out_dir / "models";
  ensure_dir(model_dir);
  TrainResult res;

  const auto spectra = nn::generate_dataset(array, cfg.data);
  res.dataset_csv = cfg.out_dir / "dataset.csv";
  std::ostringstream meta;
  meta << "seed = " << cfg.data.seed << "\n"
       << "sweep = " << cfg.data.describe() << "\n"
       << "config = " << array.describe() << "\n"
       << "config_hash = " << std::hex << fnv1a(array.describe()) << std::dec << "\n";
  nn::write_dataset_csv(res.dataset_csv, spectra, meta.str());

  res.log_csv = cfg.out_dir / "training_log.csv";
  CsvWriter log(res.log_csv, {"schema_version", "model", "epoch", "train_loss", "val_loss", "val_accuracy"});
  CsvWriter summary(cfg.out_dir / "training_summary.csv",
                    {"schema_version", "model", "test_accuracy", "best_epoch", "train_samples"});

  auto fit = [&](const std::string& tag, const nn::LabeledDataset& data, nn::Network net, const nn::TrainHyper& hyper) {
    const auto tr = data.subset(nn::Split::Train);
    const auto va = data.subset(nn::Split::Val);
    const auto te = data.subset(nn::Split::Test);
    nn::fit_input_standardizer(net, tr.inputs);
    auto report = nn::train(net, tr.inputs, tr.labels, va.inputs, va.labels, hyper);
    const double acc = te.size() > 0 ? nn::evaluate_accuracy(net, te.inputs, te.labels) : 0.0;
    const fs::path path = model_dir / (tag + ".h2adnn");
    net.save(path);
    for (size_t e = 0; e < report.train_loss.size(); ++e)
      log.row({sv(), tag, std::to_string(e), format_real(report.train_loss[e]), format_real(report.val_loss[e]),
               format_real(report.val_accuracy[e])});
    summary.row({sv(), tag, format_real(acc), std::to_string(report.best_epoch), std::to_string(tr.size())});
    res.models[tag] = path;
    res.reports[tag] = std::move(report);
    res.test_accuracy[tag] = acc;
  };

  const int classes = cfg.data.max_sources;
  if (cfg.train_dense) {
    auto arch = cfg.dense;
    arch.inputs = 5;
    arch.classes = classes;
    fit("dense", nn::to_features(spectra, true), nn::make_dense_network(arch, mix_seed(cfg.data.seed, 1)),
        cfg.dense_hyper);
  }
  if (cfg.train_fcnn) {
    auto arch = cfg.dense;
    arch.inputs = 4;
    arch.classes = classes;
    fit("fcnn", nn::to_features(spectra, false), nn::make_dense_network(arch, mix_seed(cfg.data.seed, 2)),
        cfg.dense_hyper);
  }
  if (cfg.train_cnn) {
    auto arch = cfg.cnn;
    arch.length = static_cast<int>(spectra.inputs.cols());
    arch.classes = classes;
    fit("cnn", spectra, nn::make_cnn(arch, mix_seed(cfg.data.seed, 3)), cfg.cnn_hyper);
  }
  log.flush();
  summary.flush();
  return res;
}

}  // namespace h2ad::harness
