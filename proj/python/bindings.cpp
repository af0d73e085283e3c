#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "h2ad/crlb.hpp"
#include "h2ad/edc.hpp"
#include "h2ad/esprit.hpp"
#include "h2ad/features.hpp"
#include "h2ad/fusion.hpp"
#include "h2ad/harness.hpp"
#include "h2ad/spectral.hpp"

namespace py = pybind11;
using namespace h2ad;

namespace {

CandidateAngleSet candidates_from(const ArrayConfig& cfg, const std::vector<CMatrix>& groups, int num_sources) {
  std::vector<SnapshotMatrix> y;
  for (size_t q = 0; q < groups.size(); ++q) y.push_back({groups[q], static_cast<int>(q)});
  return build_candidate_set(cfg, y, num_sources);
}

harness::RunOptions run_options(const std::optional<std::filesystem::path>& config, const std::filesystem::path& out,
                                const std::string& profile, std::optional<std::uint64_t> seed,
                                std::optional<int> trials, std::optional<std::filesystem::path> models) {
  harness::RunOptions o;
  o.config = config;
  o.out_dir = out;
  o.profile = harness::parse_profile(profile);
  o.seed = seed;
  o.trials = trials;
  o.models_dir = std::move(models);
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hybrid analog-digital subarray DOA and source-number estimation";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ModelOrderError>(m, "ModelOrderError", base.ptr());
  auto numeric = py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<DegenerateSubspaceError>(m, "DegenerateSubspaceError", numeric.ptr());
  py::register_exception<InsufficientSupportError>(m, "InsufficientSupportError", base.ptr());

  py::enum_<Combining>(m, "Combining")
      .value("ANALOG", Combining::Analog)
      .value("FULLY_DIGITAL", Combining::FullyDigital);

  py::class_<ArrayConfig>(m, "ArrayConfig")
      .def(py::init<int, std::vector<int>, double, double>(), py::arg("subarrays_per_group"),
           py::arg("antennas_per_subarray"), py::arg("element_spacing") = 0.5, py::arg("wavelength") = 1.0)
      .def_property_readonly("num_groups", &ArrayConfig::num_groups)
      .def_property_readonly("subarrays_per_group", &ArrayConfig::subarrays_per_group)
      .def_property_readonly("antennas_per_subarray",
                             py::overload_cast<>(&ArrayConfig::antennas_per_subarray, py::const_))
      .def_property_readonly("total_antennas", &ArrayConfig::total_antennas)
      .def_property_readonly("warnings", &ArrayConfig::warnings)
      .def("group_size", &ArrayConfig::group_size)
      .def("is_pairwise_coprime", &ArrayConfig::is_pairwise_coprime)
      .def("__repr__", [](const ArrayConfig& c) { return "ArrayConfig(" + c.describe() + ")"; });

  py::class_<SourceScene>(m, "SourceScene")
      .def(py::init([](std::vector<double> angles, double snr_db, int snapshots, std::uint64_t seed) {
             return SourceScene::from_snr_db(std::move(angles), snr_db, snapshots, seed);
           }),
           py::arg("angles"), py::arg("snr_db"), py::arg("snapshots") = 200, py::arg("seed") = 0)
      .def_readwrite("angles", &SourceScene::angles)
      .def_readwrite("signal_power", &SourceScene::signal_power)
      .def_readwrite("noise_power", &SourceScene::noise_power)
      .def_readwrite("num_snapshots", &SourceScene::num_snapshots)
      .def_readwrite("seed", &SourceScene::seed)
      .def_property_readonly("snr_db", &SourceScene::snr_db);

  m.def("steering", [](const ArrayConfig& c, int q, double theta) { return steering(c, q, theta).entries; },
        py::arg("config"), py::arg("group"), py::arg("theta"));
  m.def(
      "simulate",
      [](const ArrayConfig& c, const SourceScene& s, Combining mode) {
        std::vector<CMatrix> out;
        for (auto& y : generate_all_groups(c, s, mode)) out.push_back(std::move(y.data));
        return out;
      },
      py::arg("config"), py::arg("scene"), py::arg("mode") = Combining::Analog,
      "Snapshot matrices of every group, one complex (rows x T) array each.");
  m.def(
      "sample_covariance", [](const CMatrix& y) { return sample_covariance(SnapshotMatrix{y, 0}).data; },
      py::arg("snapshots"));
  m.def(
      "hermitian_eig",
      [](const CMatrix& r) {
        auto e = hermitian_eig(r);
        return py::make_tuple(e.eigenvalues, e.eigenvectors);
      },
      py::arg("matrix"), "Eigenvalues (descending) and eigenvectors of a Hermitian matrix.");

  m.def(
      "edc_count",
      [](const std::vector<std::vector<double>>& spectra, double eps, double exponent, int min_pts) {
        return edc::estimate_count(spectra, {exponent, eps, min_pts}).estimate;
      },
      py::arg("spectra"), py::arg("eps") = 0.5, py::arg("exponent") = 2.0, py::arg("min_pts") = 0,
      "Source count from per-group eigenvalue spectra.");
  m.def(
      "eigen_features",
      [](const std::vector<double>& ev) {
        const auto f = nn::extract_features(ev);
        return std::vector<double>(f.beta.begin(), f.beta.end());
      },
      py::arg("eigenvalues"));

  m.def(
      "candidates",
      [](const ArrayConfig& c, const std::vector<CMatrix>& groups, int num_sources) {
        const auto set = candidates_from(c, groups, num_sources);
        py::list out;
        for (const auto& x : set.candidates) out.append(py::make_tuple(x.angle, x.group, x.branch, x.m));
        return out;
      },
      py::arg("config"), py::arg("groups"), py::arg("num_sources"),
      "Ambiguous candidates as (angle, group, branch, m) tuples.");
  m.def(
      "fuse",
      [](const ArrayConfig& c, const std::vector<CMatrix>& groups, int num_sources, const std::string& method) {
        const auto set = candidates_from(c, groups, num_sources);
        FusionResult r;
        if (method == "omc")
          r = omc_fuse(set.candidates, num_sources);
        else if (method == "wgmd")
          r = wgmd_fuse(set.candidates, num_sources);
        else if (method == "wlmd")
          r = wlmd_fuse(set.candidates, num_sources);
        else
          throw ConfigError("unknown fusion method '" + method + "' (omc, wgmd, wlmd)");
        py::dict d;
        d["angles"] = r.angles;
        d["support"] = r.support;
        d["op_count"] = r.op_count;
        d["low_confidence"] = r.low_confidence;
        return d;
      },
      py::arg("config"), py::arg("groups"), py::arg("num_sources"), py::arg("method") = "omc");

  m.def(
      "crlb", [](const ArrayConfig& c, const SourceScene& s, int snapshots) { return crlb(c, s, snapshots).bound; },
      py::arg("config"), py::arg("scene"), py::arg("snapshots"), "Per-source bound in radians^2.");
  m.def(
      "orthogonality_profile",
      [](double d, double tp, double tr, const std::vector<int>& sizes) { return orthogonality_profile(d, tp, tr, sizes); },
      py::arg("spacing_over_wavelength"), py::arg("theta_p"), py::arg("theta_r"), py::arg("sizes"));

  m.def(
      "run",
      [](const std::string& experiment, std::optional<std::filesystem::path> config, std::filesystem::path out,
         const std::string& profile, std::optional<std::uint64_t> seed, std::optional<int> trials,
         std::optional<std::filesystem::path> models) {
        const auto o = run_options(config, out, profile, seed, trials, std::move(models));
        py::gil_scoped_release release;
        if (experiment == "ns") return harness::run_number_sensing_experiment(load_number_sensing(o)).summary_csv;
        if (experiment == "doa") return harness::run_doa_experiment(load_doa(o)).summary_csv;
        if (experiment == "complexity") return harness::run_complexity_benchmark(load_complexity(o)).csv;
        if (experiment == "crlb") return harness::run_crlb_sweep(load_crlb_sweep(o)).csv;
        if (experiment == "train") return harness::run_training(load_train(o)).log_csv;
        throw ConfigError("unknown experiment '" + experiment + "' (ns, doa, complexity, crlb, train)");
      },
      py::arg("experiment"), py::arg("config") = py::none(), py::arg("out") = "results",
      py::arg("profile") = "default", py::arg("seed") = py::none(), py::arg("trials") = py::none(),
      py::arg("models") = py::none(), "Runs a harness experiment and returns the path of its summary CSV.");
}
