#pragma once

#include <nlohmann/json.hpp>

#include "pgptycho/solver.hpp"

namespace pgptycho::cli {

/// Reconstruction settings from a JSON document; missing keys keep defaults.
///
///   { "loss": "mixed", "zero_crop": false, "loss_epsilon": 1e-12,
///     "mode": "object_only", "initial_probe_radius_m": 7.5e-4, "probe_lr_scale": 0,
///     "regularizers": { "alpha": 0, "beta": 1e-4, "gamma": 1e-3,
///                       "support_radius_m": 1.5e-3, "l1_epsilon": 1e-8 },
///     "schedule": { "lr0": 0.1, "decay_per_epoch": 0.03, "epochs": 100,
///                   "adam_beta1": 0.9, "adam_beta2": 0.999, "adam_epsilon": 1e-8 } }
ReconstructionConfig recon_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReconstructionConfig& config);

}  // namespace pgptycho::cli
