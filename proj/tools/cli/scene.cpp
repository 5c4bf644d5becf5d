#include "cli/scene.hpp"

#include <cmath>
#include <numbers>

#include "cli/json_fields.hpp"
#include "pgptycho/forward.hpp"
#include "pgptycho/metrics.hpp"

namespace pgptycho::cli {

PropagatorSpec SceneConfig::propagator() const {
  return PropagatorSpec{wavelength_m, distance_m, probe_shape, pitch_m};
}

void SceneConfig::validate() const {
  propagator().validate();
  if (probe_shape.height > object_shape.height || probe_shape.width > object_shape.width) {
    throw ConfigError("probe window " + to_string(probe_shape) + " exceeds object " +
                      to_string(object_shape));
  }
  if (!(probe_radius_m > 0.0)) throw ConfigError("probe_radius_m must be positive");
  if (probe_edge_m < 0.0) throw ConfigError("probe_edge_m must be non-negative");
  if (n_positions < 1) throw ConfigError("n_positions must be at least 1");
  if (!(target_overlap >= 0.0 && target_overlap < 1.0)) {
    throw ConfigError("target_overlap must lie in [0, 1)");
  }
  if (sigma_counts < 0.0) throw ConfigError("sigma_counts must be non-negative");
  if (!(gain_inv_e_per_adu > 0.0)) throw ConfigError("gain_inv_e_per_adu must be positive");
  if (black_level_counts < 0.0) throw ConfigError("black_level_counts must be non-negative");
  if (dark_frames < 2) throw ConfigError("dark_frames must be at least 2");
}

SceneConfig scene_from_json(const nlohmann::json& j) {
  SceneConfig s;
  if (!j.is_object()) throw ConfigError("scene must be a JSON object");
  read_shape(j, "object_shape_px", s.object_shape);
  read_shape(j, "probe_shape_px", s.probe_shape);
  read_field(j, "pitch_m", s.pitch_m);
  read_field(j, "wavelength_m", s.wavelength_m);
  read_field(j, "distance_m", s.distance_m);
  read_field(j, "probe_radius_m", s.probe_radius_m);
  read_field(j, "probe_edge_m", s.probe_edge_m);
  read_field(j, "probe_curvature_rad", s.probe_curvature_rad);
  read_field(j, "n_positions", s.n_positions);
  read_field(j, "target_overlap", s.target_overlap);
  read_field(j, "tsp_order", s.tsp_order);
  read_field(j, "sigma_counts", s.sigma_counts);
  read_field(j, "black_level_counts", s.black_level_counts);
  read_field(j, "gain_inv_e_per_adu", s.gain_inv_e_per_adu);
  read_field(j, "dark_frames", s.dark_frames);
  read_field(j, "object_seed", s.object_seed);
  s.validate();
  return s;
}

nlohmann::json to_json(const SceneConfig& s) {
  return {{"object_shape_px", {s.object_shape.height, s.object_shape.width}},
          {"probe_shape_px", {s.probe_shape.height, s.probe_shape.width}},
          {"pitch_m", s.pitch_m},
          {"wavelength_m", s.wavelength_m},
          {"distance_m", s.distance_m},
          {"probe_radius_m", s.probe_radius_m},
          {"probe_edge_m", s.probe_edge_m},
          {"probe_curvature_rad", s.probe_curvature_rad},
          {"n_positions", s.n_positions},
          {"target_overlap", s.target_overlap},
          {"tsp_order", s.tsp_order},
          {"sigma_counts", s.sigma_counts},
          {"black_level_counts", s.black_level_counts},
          {"gain_inv_e_per_adu", s.gain_inv_e_per_adu},
          {"dark_frames", s.dark_frames},
          {"object_seed", s.object_seed}};
}

ComplexField make_object(const SceneConfig& scene) {
  const Shape shape = scene.object_shape;
  const double h = static_cast<double>(shape.height);
  const double w = static_cast<double>(shape.width);

  // Amplitude chart in normalized coordinates u, v in [0, 1).
  auto chart = [](double u, double v) {
    // Three groups of vertical bars with decreasing period.
    const double periods[] = {0.09, 0.06, 0.04};
    for (int g = 0; g < 3; ++g) {
      const double u0 = 0.18 + 0.22 * g;
      const double p = periods[g];
      if (v > 0.22 && v < 0.48 && u >= u0 && u < u0 + 2.5 * p) {
        if (std::fmod(u - u0, p) < 0.5 * p) return 1.0;
      }
    }
    // Horizontal bars below.
    if (u > 0.22 && u < 0.5 && v >= 0.55 && v < 0.55 + 2.5 * 0.07) {
      if (std::fmod(v - 0.55, 0.07) < 0.035) return 1.0;
    }
    // Solid block and a ring.
    if (u > 0.58 && u < 0.76 && v > 0.58 && v < 0.76) return 1.0;
    const double r = std::hypot(u - 0.5, v - 0.5);
    if (r > 0.36 && r < 0.40) return 1.0;
    return 0.0;
  };

  Rng rng = stream_rng(scene.object_seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Blob {
    double u, v, width, height;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < 6; ++i) {
    const double u = unit(rng), v = unit(rng);
    const double width = 0.06 + 0.10 * unit(rng);
    const double height = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.6 + 0.8 * unit(rng));
    blobs.push_back({u, v, width, height});
  }

  ComplexField object(shape, scene.pitch_m);
  for (std::size_t r = 0; r < shape.height; ++r) {
    for (std::size_t c = 0; c < shape.width; ++c) {
      const double u = (static_cast<double>(c) + 0.5) / w;
      const double v = (static_cast<double>(r) + 0.5) / h;
      const double amplitude = 0.3 + 0.7 * chart(u, v);
      double phase = 0.0;
      for (const auto& b : blobs) {
        const double d2 = (u - b.u) * (u - b.u) + (v - b.v) * (v - b.v);
        phase += b.height * std::exp(-d2 / (2.0 * b.width * b.width));
      }
      object(r, c) = std::polar(amplitude, phase);
    }
  }
  return object;
}

ComplexField make_probe(const SceneConfig& scene, double photons) {
  const Shape shape = scene.probe_shape;
  const double cy = 0.5 * static_cast<double>(shape.height - 1);
  const double cx = 0.5 * static_cast<double>(shape.width - 1);
  const double radius = scene.probe_radius_m;
  const double edge = std::max(scene.probe_edge_m, 1e-3 * scene.pitch_m);
  ComplexField probe(shape, scene.pitch_m);
  for (std::size_t r = 0; r < shape.height; ++r) {
    for (std::size_t c = 0; c < shape.width; ++c) {
      const double rho = std::hypot((static_cast<double>(r) - cy) * scene.pitch_m,
                                    (static_cast<double>(c) - cx) * scene.pitch_m);
      const double amplitude = 0.5 * (1.0 - std::tanh((rho - radius) / edge));
      const double phase = scene.probe_curvature_rad * (rho / radius) * (rho / radius);
      probe(r, c) = std::polar(amplitude, phase);
    }
  }
  return rescale_to_budget(probe, photons);
}

ScanPattern make_scan(const SceneConfig& scene) {
  ScanPattern pattern;
  if (scene.n_positions == 1) {
    pattern = fermat_spiral(1, 1.0);
  } else {
    const double scale =
        scale_for_overlap(scene.probe_radius_m, scene.target_overlap, scene.n_positions);
    pattern = fermat_spiral(scene.n_positions, scale);
  }
  pattern.probe_radius = scene.probe_radius_m;
  pattern.target_overlap = scene.target_overlap;
  return scene.tsp_order ? order_tsp(pattern) : pattern;
}

SimulatedAcquisition simulate_acquisition(const SceneConfig& scene, double photons,
                                          std::uint64_t seed) {
  scene.validate();
  if (!(photons > 0.0)) throw ConfigError("photon budget must be positive");

  ComplexField object = make_object(scene);
  ComplexField probe = make_probe(scene, photons);
  ScanPattern scan = make_scan(scene);
  auto offsets = to_pixel_offsets(scan.positions, scene.pitch_m, scene.object_shape,
                                  scene.probe_shape);
  const Propagator propagator = build_propagator(scene.propagator());

  const NoiseModel model =
      NoiseModel::uniform(scene.probe_shape, scene.pitch_m, scene.sigma_counts,
                          scene.gain_inv_e_per_adu, scene.black_level_counts, seed);

  std::vector<RealField> clean;
  std::vector<RealField> raw;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    clean.push_back(forward_pass(object, probe, offsets[i], propagator).intensity);
    Rng rng = stream_rng(seed, i);
    RealField frame = sample_frame(clean.back(), model, rng);
    for (auto& v : frame) v /= scene.gain_inv_e_per_adu;
    raw.push_back(std::move(frame));
  }

  auto dark = sample_dark_stack(model, scene.dark_frames);
  for (auto& frame : dark) {
    for (auto& v : frame) v /= scene.gain_inv_e_per_adu;
  }
  RealField dark_mean = mean_frame(dark);
  RealField variance = estimate_variance_map(dark, scene.gain_inv_e_per_adu);

  DiffractionDataset dataset;
  for (const auto& frame : raw) {
    dataset.frames.push_back(preprocess(frame, dark_mean, scene.gain_inv_e_per_adu));
  }
  dataset.positions = offsets;
  dataset.variance = variance;
  dataset.propagator = scene.propagator();
  dataset.object_shape = scene.object_shape;
  dataset.gain_inv = scene.gain_inv_e_per_adu;
  dataset.black_level = scene.black_level_counts;

  return {std::move(object), std::move(probe), std::move(scan),     std::move(clean),
          std::move(raw),    std::move(dark_mean), std::move(variance), std::move(dataset)};
}

}  // namespace pgptycho::cli
