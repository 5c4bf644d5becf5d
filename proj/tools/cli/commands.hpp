#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/scene.hpp"
#include "cli/sweep.hpp"
#include "pgptycho/dataset.hpp"
#include "pgptycho/solver.hpp"

namespace pgptycho::cli {

namespace fs = std::filesystem;

// File names inside a dataset directory written by `simulate`.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kObjectTruthFile = "object_gt.pga";
inline constexpr const char* kProbeTruthFile = "probe_gt.pga";
inline constexpr const char* kPositionsFile = "positions.csv";
inline constexpr const char* kFramesFile = "frames_raw.pga";
inline constexpr const char* kDarkMeanFile = "dark_mean.pga";
inline constexpr const char* kVarianceFile = "variance.pga";

/// Writes ground truth, positions, raw frames, dark mean, variance map and a
/// manifest binding them by SHA-256. Returns the manifest.
nlohmann::json cmd_simulate(const SceneConfig& scene, double photons, std::uint64_t seed,
                            const fs::path& out_dir);

struct LoadedDataset {
  DiffractionDataset dataset;
  std::optional<ComplexField> object_truth;
  std::optional<ComplexField> probe_truth;
  nlohmann::json manifest;
};

/// Reads a dataset directory and preprocesses its raw frames. A missing variance
/// map is allowed here; `require_variance` turns it into a ConfigError.
LoadedDataset load_dataset(const fs::path& dir, bool require_variance = false);

struct ReconstructOptions {
  std::optional<fs::path> probe_path;  // default: dataset probe_gt.pga
  unsigned threads = 1;
};

/// Runs the solver on a dataset directory; writes report.json, object.pga and
/// object.png (plus probe files in joint mode) into `out_dir`.
ReconstructionReport cmd_reconstruct(const fs::path& dataset_dir, ReconstructionConfig config,
                                     const fs::path& out_dir, const ReconstructOptions& options);

/// Joint reconstruction on a high-SNR dataset; writes probe.pga, probe.png and
/// calibration.json.
CalibrationResult cmd_calibrate_probe(const fs::path& dataset_dir, ReconstructionConfig config,
                                      const fs::path& out_dir);

/// Variance map and mean dark frame from a dark stack, written as
/// variance.pga and dark_mean.pga.
struct DarkCalibration {
  RealField dark_mean;
  RealField variance;
};
DarkCalibration cmd_darkcal(const std::vector<RealField>& dark_stack, double gain_inv,
                            const fs::path& out_dir);

/// Runs the sweep and writes sweep.csv; returns the CSV text.
std::string cmd_sweep(const SweepSpec& spec, const fs::path& out_dir);

/// Correlation of a reconstruction against ground truth, over the dataset's
/// illuminated region when `dataset_dir` is given, else the full frame.
double cmd_eval(const fs::path& truth, const fs::path& estimate,
                const std::optional<fs::path>& dataset_dir, double eval_fraction = 0.1);

// Entry point shared by the executable and the CLI tests.
int run_cli(int argc, const char* const* argv);

}  // namespace pgptycho::cli
