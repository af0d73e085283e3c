// Command line runner for the simulation experiments.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "h2ad/harness.hpp"

namespace {

namespace hh = h2ad::harness;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitOther = 1;

struct Flags {
  std::string config;
  std::string out = "results";
  std::string models;
  std::uint64_t seed = 0;
  int trials = 0;
  std::string profile = "default";
};

void add_common(CLI::App* cmd, Flags& f, bool with_models) {
  cmd->add_option("--config", f.config, "key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials per SNR point")->check(CLI::PositiveNumber);
  cmd->add_option("--profile", f.profile, "run profile")->check(CLI::IsMember({"default", "smoke", "paper"}));
  if (with_models) cmd->add_option("--models", f.models, "directory written by `h2ad train`");
}

hh::RunOptions to_options(const Flags& f, const CLI::App* cmd) {
  hh::RunOptions o;
  if (!f.config.empty()) o.config = f.config;
  o.out_dir = f.out;
  if (cmd->count("--seed")) o.seed = f.seed;
  if (cmd->count("--trials")) o.trials = f.trials;
  if (!f.models.empty()) o.models_dir = f.models;
  o.profile = hh::parse_profile(f.profile);
  return o;
}

void print_number_sensing(const hh::NumberSensingResult& r) {
  for (const auto& [est, acc] : r.accuracy) {
    std::printf("%-6s", est.c_str());
    for (size_t i = 0; i < acc.size(); ++i) std::printf("  %+.0fdB:%.3f", r.snr_db[i], acc[i]);
    std::printf("\n");
  }
  std::printf("wrote %s\nwrote %s\n", r.summary_csv.c_str(), r.trials_csv.c_str());
}

void print_doa(const hh::DoaResult& r) {
  for (const auto& p : r.points)
    std::printf("%+6.1f dB  %-5s  %5.1f deg  acc %.3f  rmse %.4f  crlb %.4f\n", p.snr_db, p.estimator.c_str(),
                p.angle_deg, p.accuracy, p.rmse_deg, p.crlb_std_deg);
  std::printf("wrote %s\nwrote %s\n", r.summary_csv.c_str(), r.trials_csv.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid analog-digital array simulations: source counting, DOA fusion, bounds"};
  app.require_subcommand(1);
  Flags flags;
  auto* ns = app.add_subcommand("number-sensing", "source-number accuracy versus SNR");
  auto* doa = app.add_subcommand("doa", "DOA accuracy and RMSE of the fusion methods versus SNR");
  auto* cx = app.add_subcommand("complexity", "operation counts and timing of the fusion methods");
  auto* tr = app.add_subcommand("train", "generate a dataset and train the neural estimators");
  auto* cr = app.add_subcommand("crlb-sweep", "Cramer-Rao bound versus SNR");
  add_common(ns, flags, true);
  for (auto* c : {doa, cx, tr, cr}) add_common(c, flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (ns->parsed()) {
      print_number_sensing(hh::run_number_sensing_experiment(hh::load_number_sensing(to_options(flags, ns))));
    } else if (doa->parsed()) {
      print_doa(hh::run_doa_experiment(hh::load_doa(to_options(flags, doa))));
    } else if (cx->parsed()) {
      const auto r = hh::run_complexity_benchmark(hh::load_complexity(to_options(flags, cx)));
      for (const auto& row : r.rows)
        std::printf("%5d antennas  %3d candidates  %-5s  %12.0f ns  %10lld ops\n", row.antennas, row.candidates,
                    row.method.c_str(), row.ns_per_trial, static_cast<long long>(row.op_count));
      std::printf("wrote %s\n", r.csv.c_str());
    } else if (tr->parsed()) {
      const auto r = hh::run_training(hh::load_train(to_options(flags, tr)));
      for (const auto& [tag, acc] : r.test_accuracy)
        std::printf("%-6s test accuracy %.4f  -> %s\n", tag.c_str(), acc, r.models.at(tag).c_str());
      std::printf("wrote %s\nwrote %s\n", r.dataset_csv.c_str(), r.log_csv.c_str());
    } else if (cr->parsed()) {
      const auto r = hh::run_crlb_sweep(hh::load_crlb_sweep(to_options(flags, cr)));
      std::printf("wrote %s\n", r.csv.c_str());
    }
  } catch (const h2ad::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const h2ad::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const h2ad::ModelOrderError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const h2ad::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return 0;
}
