#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/scene.hpp"
#include "pgptycho/solver.hpp"

namespace pgptycho::cli {

// The four loss configurations compared against photon budget.
enum class SweepVariant { PoissonCrop, MixedCrop, MixedRaw, Gaussian };

std::string_view to_string(SweepVariant variant);
SweepVariant parse_sweep_variant(std::string_view name);
LossKind loss_for(SweepVariant variant);

struct SweepSpec {
  SceneConfig scene;
  std::vector<double> budgets{1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9};  // photons, ascending
  std::vector<SweepVariant> variants{SweepVariant::PoissonCrop, SweepVariant::MixedCrop,
                                     SweepVariant::MixedRaw, SweepVariant::Gaussian};
  std::size_t repetitions = 3;  // seeds base_seed .. base_seed + repetitions - 1
  std::uint64_t base_seed = 1;
  ReconstructionConfig recon;  // loss fields are replaced per variant
  double eval_fraction = 0.1;  // illumination threshold of the evaluation region
  // Off: wall_ms is written as 0 so the CSV is reproducible byte for byte.
  bool record_wall_time = false;
  unsigned threads = 1;

  void validate() const;
};

/// Sweep document:
///   { "scene": {...}, "reconstruction": {...}, "budgets": [...], "variants": [...],
///     "repetitions": 3, "base_seed": 1, "eval_fraction": 0.1, "record_wall_time": false }
SweepSpec sweep_from_json(const nlohmann::json& j);

struct SweepRow {
  double budget = 0.0;
  SweepVariant variant = SweepVariant::MixedRaw;
  std::uint64_t seed = 0;
  double correlation = 0.0;  // NaN if the run diverged
  double final_fidelity = 0.0;
  double wall_ms = 0.0;
};

/// simulate -> reconstruct -> correlation for every (budget, variant, seed).
/// All variants of one (budget, seed) share the same noisy dataset. Rows are
/// ordered by budget, variant, seed regardless of scheduling.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

inline constexpr std::string_view kSweepCsvHeader = "budget,variant,seed,C,final_fidelity,wall_ms";
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace pgptycho::cli
