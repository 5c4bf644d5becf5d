#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

#include "cli/config.hpp"
#include "pgptycho/io.hpp"
#include "pgptycho/metrics.hpp"
#include "pgptycho/noise.hpp"

namespace pgptycho::cli {

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
  }
}

nlohmann::json file_entry(const fs::path& dir, const char* name) {
  return {{"path", name}, {"sha256", sha256_file(dir / name)}};
}

nlohmann::json propagator_json(const PropagatorSpec& p) {
  return {{"wavelength_m", p.wavelength},
          {"distance_m", p.distance},
          {"shape_px", {p.shape.height, p.shape.width}},
          {"pitch_m", p.pitch}};
}

PropagatorSpec propagator_from_json(const nlohmann::json& j) {
  PropagatorSpec p;
  p.wavelength = j.at("wavelength_m").get<double>();
  p.distance = j.at("distance_m").get<double>();
  p.shape = {j.at("shape_px")[0].get<std::size_t>(), j.at("shape_px")[1].get<std::size_t>()};
  p.pitch = j.at("pitch_m").get<double>();
  return p;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace

nlohmann::json cmd_simulate(const SceneConfig& scene, double photons, std::uint64_t seed,
                            const fs::path& out_dir) {
  ensure_dir(out_dir);
  const auto acq = simulate_acquisition(scene, photons, seed);

  write_pga1(out_dir / kObjectTruthFile, acq.object);
  write_pga1(out_dir / kProbeTruthFile, acq.probe);
  write_scan_csv(out_dir / kPositionsFile, acq.scan.positions);
  write_pga1(out_dir / kFramesFile, PgaArray::from_stack(acq.raw_frames));
  write_pga1(out_dir / kDarkMeanFile, acq.dark_mean);
  write_pga1(out_dir / kVarianceFile, acq.variance);

  nlohmann::json positions = nlohmann::json::array();
  for (const auto& p : acq.dataset.positions) positions.push_back({p.row, p.col});

  nlohmann::json manifest{
      {"format", "pgptycho-dataset/1"},
      {"scene", to_json(scene)},
      {"photons", photons},
      {"seed", seed},
      {"object_shape_px", {scene.object_shape.height, scene.object_shape.width}},
      {"propagator", propagator_json(scene.propagator())},
      {"gain_inv_e_per_adu", scene.gain_inv_e_per_adu},
      {"black_level_counts", scene.black_level_counts},
      {"positions_px", positions},
      {"files",
       {{"object_truth", file_entry(out_dir, kObjectTruthFile)},
        {"probe_truth", file_entry(out_dir, kProbeTruthFile)},
        {"positions", file_entry(out_dir, kPositionsFile)},
        {"frames_raw", file_entry(out_dir, kFramesFile)},
        {"dark_mean", file_entry(out_dir, kDarkMeanFile)},
        {"variance", file_entry(out_dir, kVarianceFile)}}}};
  write_json(out_dir / kManifestFile, manifest);
  return manifest;
}

LoadedDataset load_dataset(const fs::path& dir, bool require_variance) {
  if (!fs::is_regular_file(dir / kManifestFile)) {
    throw ConfigError("dataset directory " + dir.string() + " has no " + kManifestFile);
  }
  LoadedDataset out;
  out.manifest = read_json_file(dir / kManifestFile);
  const auto& m = out.manifest;
  try {
    auto& d = out.dataset;
    d.propagator = propagator_from_json(m.at("propagator"));
    d.object_shape = {m.at("object_shape_px")[0].get<std::size_t>(),
                      m.at("object_shape_px")[1].get<std::size_t>()};
    d.gain_inv = m.value("gain_inv_e_per_adu", 1.0);
    d.black_level = m.value("black_level_counts", 0.0);
    if (m.contains("positions_px")) {
      for (const auto& p : m.at("positions_px")) {
        d.positions.push_back({p[0].get<std::ptrdiff_t>(), p[1].get<std::ptrdiff_t>()});
      }
    } else {
      d.positions = to_pixel_offsets(read_scan_csv(dir / kPositionsFile), d.propagator.pitch,
                                     d.object_shape, d.propagator.shape);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed manifest in " + dir.string() + ": " + e.what());
  }

  auto& d = out.dataset;
  const auto raw = read_pga1(dir / kFramesFile).to_real_stack();
  const RealField dark_mean = fs::is_regular_file(dir / kDarkMeanFile)
                                  ? read_pga1(dir / kDarkMeanFile).to_real_field()
                                  : RealField(d.propagator.shape, d.propagator.pitch, 0.0);
  for (const auto& frame : raw) d.frames.push_back(preprocess(frame, dark_mean, d.gain_inv));

  if (fs::is_regular_file(dir / kVarianceFile)) {
    d.variance = read_pga1(dir / kVarianceFile).to_real_field();
  } else if (require_variance) {
    throw ConfigError("mixed loss requires a readout variance map, but " +
                      (dir / kVarianceFile).string() + " is missing (run darkcal)");
  }
  if (fs::is_regular_file(dir / kObjectTruthFile)) {
    out.object_truth = read_pga1(dir / kObjectTruthFile).to_complex_field();
  }
  if (fs::is_regular_file(dir / kProbeTruthFile)) {
    out.probe_truth = read_pga1(dir / kProbeTruthFile).to_complex_field();
  }
  d.validate();
  return out;
}

ReconstructionReport cmd_reconstruct(const fs::path& dataset_dir, ReconstructionConfig config,
                                     const fs::path& out_dir, const ReconstructOptions& options) {
  const auto loaded = load_dataset(dataset_dir, config.loss.variant == LossVariant::Mixed);
  ensure_dir(out_dir);
  config.threads = options.threads;
  if (config.mode == ReconstructionMode::ObjectOnly && !config.initial_probe) {
    const fs::path probe_path = options.probe_path.value_or(dataset_dir / kProbeTruthFile);
    if (!fs::is_regular_file(probe_path)) {
      throw ConfigError("object_only reconstruction needs a probe; " + probe_path.string() +
                        " is missing");
    }
    config.initial_probe = read_pga1(probe_path).to_complex_field();
  }

  auto report = reconstruct(loaded.dataset, config);

  nlohmann::json doc = report_to_json(report);
  doc["config"] = to_json(config);
  doc["dataset"] = fs::absolute(dataset_dir).string();
  if (loaded.object_truth) {
    const auto region = illuminated_region(loaded.dataset.object_shape, *config.initial_probe,
                                           loaded.dataset.positions);
    doc["correlation"] = correlation(*loaded.object_truth, report.object, region);
    doc["correlation_full_frame"] = correlation(*loaded.object_truth, report.object);
  }
  write_json(out_dir / "report.json", doc);
  write_pga1(out_dir / "object.pga", report.object);
  render_complex_png(loaded.object_truth ? align_global_phase(report.object, *loaded.object_truth)
                                         : report.object,
                     out_dir / "object.png");
  if (report.probe) {
    write_pga1(out_dir / "probe.pga", *report.probe);
    render_complex_png(*report.probe, out_dir / "probe.png");
  }
  return report;
}

CalibrationResult cmd_calibrate_probe(const fs::path& dataset_dir, ReconstructionConfig config,
                                      const fs::path& out_dir) {
  const auto loaded = load_dataset(dataset_dir, config.loss.variant == LossVariant::Mixed);
  ensure_dir(out_dir);
  config.mode = ReconstructionMode::JointProbeObject;
  auto result = calibrate_probe(loaded.dataset, config);

  nlohmann::json doc = report_to_json(result.report);
  doc["config"] = to_json(config);
  doc["outside_support_fraction"] = result.outside_fraction;
  doc["support_warning"] = result.support_warning;
  if (loaded.probe_truth) doc["probe_correlation"] = correlation(*loaded.probe_truth, result.probe);
  write_json(out_dir / "calibration.json", doc);
  write_pga1(out_dir / "probe.pga", result.probe);
  render_complex_png(loaded.probe_truth ? align_global_phase(result.probe, *loaded.probe_truth)
                                        : result.probe,
                     out_dir / "probe.png");
  write_pga1(out_dir / "object.pga", result.report.object);
  return result;
}

DarkCalibration cmd_darkcal(const std::vector<RealField>& dark_stack, double gain_inv,
                            const fs::path& out_dir) {
  DarkCalibration cal{mean_frame(dark_stack), estimate_variance_map(dark_stack, gain_inv)};
  ensure_dir(out_dir);
  write_pga1(out_dir / kDarkMeanFile, cal.dark_mean);
  write_pga1(out_dir / kVarianceFile, cal.variance);
  return cal;
}

std::string cmd_sweep(const SweepSpec& spec, const fs::path& out_dir) {
  ensure_dir(out_dir);
  const std::string csv = sweep_csv(run_sweep(spec));
  write_text_file(out_dir / "sweep.csv", csv);
  return csv;
}

double cmd_eval(const fs::path& truth, const fs::path& estimate,
                const std::optional<fs::path>& dataset_dir, double eval_fraction) {
  const auto gt = read_pga1(truth).to_complex_field();
  const auto est = read_pga1(estimate).to_complex_field();
  EvalRegion region;
  if (dataset_dir) {
    const auto loaded = load_dataset(*dataset_dir);
    if (!loaded.probe_truth) {
      throw ConfigError("dataset " + dataset_dir->string() + " has no probe for the region mask");
    }
    region = illuminated_region(loaded.dataset.object_shape, *loaded.probe_truth,
                                loaded.dataset.positions, eval_fraction);
  }
  return correlation(gt, est, region);
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Ptychographic simulation and maximum-likelihood reconstruction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  double photons = 3.4e5;
  int epochs = -1;
  unsigned threads = 1;
  std::string loss_name;
  bool zero_crop = false;
  std::string dataset_dir;
  std::string probe_path;
  std::string dark_path;
  double gain_inv = 1.0;
  bool wall_time = false;
  std::string truth_path;
  std::string recon_path;

  auto* simulate = app.add_subcommand("simulate", "Simulate a noisy ptychographic dataset");
  simulate->add_option("--config", config_path, "Scene JSON (defaults built in)");
  simulate->add_option("--photons", photons, "Photons per exposure in the illumination");
  simulate->add_option("--seed", seed, "Noise seed");
  simulate->add_option("--out", out_dir, "Output dataset directory")->required();

  auto* darkcal = app.add_subcommand("darkcal", "Readout variance map from dark frames");
  darkcal->add_option("--dark", dark_path, "Dark stack (PGA1, count x height x width)");
  darkcal->add_option("--config", config_path, "Scene JSON for a simulated dark stack");
  darkcal->add_option("--seed", seed, "Seed for a simulated dark stack");
  darkcal->add_option("--gain-inv", gain_inv, "Electrons per ADU");
  darkcal->add_option("--out", out_dir, "Output directory")->required();

  auto* recon = app.add_subcommand("reconstruct", "Reconstruct the object from a dataset");
  recon->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  recon->add_option("--config", config_path, "Reconstruction JSON");
  recon->add_option("--loss", loss_name, "poisson, gaussian or mixed")
      ->check(CLI::IsMember({"poisson", "gaussian", "mixed"}));
  recon->add_flag("--zero-crop", zero_crop, "Force negative intensities to zero");
  recon->add_option("--epochs", epochs, "Override the number of epochs");
  recon->add_option("--probe", probe_path, "Probe PGA1 (default: dataset probe_gt.pga)");
  recon->add_option("--threads", threads, "Worker threads");
  recon->add_option("--out", out_dir, "Output directory")->required();

  auto* calib = app.add_subcommand("calibrate-probe", "Joint probe/object calibration");
  calib->add_option("--dataset", dataset_dir, "High-SNR dataset directory")->required();
  calib->add_option("--config", config_path, "Reconstruction JSON");
  calib->add_option("--loss", loss_name, "poisson, gaussian or mixed")
      ->check(CLI::IsMember({"poisson", "gaussian", "mixed"}));
  calib->add_option("--epochs", epochs, "Override the number of epochs");
  calib->add_option("--threads", threads, "Worker threads");
  calib->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Correlation versus photon budget for each loss");
  sweep->add_option("--config", config_path, "Sweep JSON (defaults built in)");
  sweep->add_option("--seed", seed, "Base seed");
  sweep->add_option("--epochs", epochs, "Override the number of epochs");
  sweep->add_option("--threads", threads, "Concurrent reconstructions");
  sweep->add_flag("--wall-time", wall_time, "Record wall time (makes the CSV non-reproducible)");
  sweep->add_option("--out", out_dir, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Correlation of a reconstruction with ground truth");
  eval->add_option("--truth", truth_path, "Ground-truth object PGA1")->required();
  eval->add_option("--recon", recon_path, "Reconstructed object PGA1")->required();
  eval->add_option("--dataset", dataset_dir, "Dataset directory for the illuminated region");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const auto load_json = [&]() -> nlohmann::json {
    return config_path.empty() ? nlohmann::json::object() : read_json_file(config_path);
  };
  const auto apply_overrides = [&](ReconstructionConfig& c) {
    if (!loss_name.empty()) c.loss.variant = parse_loss_variant(loss_name);
    if (zero_crop) c.loss.zero_crop = true;
    if (epochs >= 0) c.schedule.epochs = epochs;
    c.threads = threads;
  };

  try {
    if (*simulate) {
      const auto j = load_json();
      const SceneConfig scene = scene_from_json(j.contains("scene") ? j.at("scene") : j);
      const auto manifest = cmd_simulate(scene, photons, seed, out_dir);
      std::cout << "wrote " << manifest.at("files").size() << " files to " << out_dir << '\n';
    } else if (*darkcal) {
      std::vector<RealField> stack;
      double g = gain_inv;
      if (!dark_path.empty()) {
        stack = read_pga1(dark_path).to_real_stack();
      } else {
        const auto j = load_json();
        const SceneConfig scene = scene_from_json(j.contains("scene") ? j.at("scene") : j);
        const auto model = NoiseModel::uniform(scene.probe_shape, scene.pitch_m, scene.sigma_counts,
                                               scene.gain_inv_e_per_adu, scene.black_level_counts, seed);
        stack = sample_dark_stack(model, scene.dark_frames);
        g = 1.0;  // simulated frames are already in counts
      }
      const auto cal = cmd_darkcal(stack, g, out_dir);
      double mean = 0.0;
      for (double v : cal.variance) mean += v;
      std::cout << "mean readout variance " << mean / static_cast<double>(cal.variance.size())
                << " counts^2 from " << stack.size() << " frames\n";
    } else if (*recon) {
      ReconstructionConfig c = recon_config_from_json(load_json());
      apply_overrides(c);
      ReconstructOptions options;
      if (!probe_path.empty()) options.probe_path = probe_path;
      options.threads = threads;
      const auto report = cmd_reconstruct(dataset_dir, c, out_dir, options);
      std::cout << "final fidelity " << report.final_fidelity << " after "
                << report.epochs.size() << " epochs\n";
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    } else if (*calib) {
      ReconstructionConfig c = recon_config_from_json(load_json());
      apply_overrides(c);
      const auto result = cmd_calibrate_probe(dataset_dir, c, out_dir);
      std::cout << "outside-support energy " << 100.0 * result.outside_fraction << "%\n";
      for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << '\n';
    } else if (*sweep) {
      SweepSpec spec = config_path.empty() ? SweepSpec{} : sweep_from_json(load_json());
      if (app.got_subcommand("sweep") && sweep->count("--seed")) spec.base_seed = seed;
      if (epochs >= 0) spec.recon.schedule.epochs = epochs;
      spec.threads = threads;
      spec.record_wall_time = spec.record_wall_time || wall_time;
      std::cout << cmd_sweep(spec, out_dir);
    } else if (*eval) {
      const double c = cmd_eval(truth_path, recon_path,
                                dataset_dir.empty() ? std::nullopt
                                                    : std::optional<fs::path>(dataset_dir));
      std::cout << nlohmann::json{{"C", c}}.dump() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pgptycho::cli
