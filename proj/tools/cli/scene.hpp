#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgptycho/dataset.hpp"
#include "pgptycho/field.hpp"
#include "pgptycho/noise.hpp"
#include "pgptycho/scan.hpp"

namespace pgptycho::cli {

/// Procedural simulation scene. All physical quantities in SI units.
struct SceneConfig {
  Shape object_shape{128, 128};
  Shape probe_shape{64, 64};
  double pitch_m = 6.9e-6;
  double wavelength_m = 561e-9;
  double distance_m = 5e-3;

  double probe_radius_m = 7 * 6.9e-6;
  double probe_edge_m = 1.5 * 6.9e-6;     // width of the soft disc edge
  double probe_curvature_rad = 2.0;       // quadratic phase at the disc rim

  std::size_t n_positions = 20;
  double target_overlap = 0.6;
  bool tsp_order = true;

  double sigma_counts = 1.5;
  double black_level_counts = 0.0;
  double gain_inv_e_per_adu = 1.0;
  std::size_t dark_frames = 300;

  std::uint64_t object_seed = 7;

  PropagatorSpec propagator() const;
  void validate() const;
};

SceneConfig scene_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SceneConfig& scene);

// Binary amplitude chart (bars and blocks) overlaid with smooth phase blobs.
ComplexField make_object(const SceneConfig& scene);

// Soft-edged disc with a quadratic phase, carrying `photons` per exposure.
ComplexField make_probe(const SceneConfig& scene, double photons);

// Fermat spiral scaled for the target overlap, optionally travel-ordered.
ScanPattern make_scan(const SceneConfig& scene);

struct SimulatedAcquisition {
  ComplexField object;
  ComplexField probe;
  ScanPattern scan;
  std::vector<RealField> clean_frames;  // noise-free intensities, counts
  std::vector<RealField> raw_frames;    // camera output, ADU
  RealField dark_mean;                  // ADU
  RealField variance;                   // counts^2, from the dark stack
  DiffractionDataset dataset;           // preprocessed frames in counts
};

/// Noise-free forward model, mixed noise, simulated dark calibration and
/// background subtraction. Deterministic in (scene, photons, seed).
SimulatedAcquisition simulate_acquisition(const SceneConfig& scene, double photons,
                                          std::uint64_t seed);

}  // namespace pgptycho::cli
