#include "cli/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "cli/config.hpp"
#include "cli/json_fields.hpp"
#include "pgptycho/metrics.hpp"

namespace pgptycho::cli {

std::string_view to_string(SweepVariant variant) {
  switch (variant) {
    case SweepVariant::PoissonCrop: return "poisson+crop";
    case SweepVariant::MixedCrop: return "mixed+crop";
    case SweepVariant::MixedRaw: return "mixed+raw";
    case SweepVariant::Gaussian: return "gaussian";
  }
  return "unknown";
}

SweepVariant parse_sweep_variant(std::string_view name) {
  for (auto v : {SweepVariant::PoissonCrop, SweepVariant::MixedCrop, SweepVariant::MixedRaw,
                 SweepVariant::Gaussian}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError("unknown sweep variant '" + std::string(name) +
                    "' (expected poisson+crop, mixed+crop, mixed+raw, gaussian)");
}

LossKind loss_for(SweepVariant variant) {
  switch (variant) {
    case SweepVariant::PoissonCrop: return {LossVariant::Poisson, true};
    case SweepVariant::MixedCrop: return {LossVariant::Mixed, true};
    case SweepVariant::MixedRaw: return {LossVariant::Mixed, false};
    case SweepVariant::Gaussian: return {LossVariant::Gaussian, false};
  }
  throw ArgumentError("unknown sweep variant");
}

void SweepSpec::validate() const {
  scene.validate();
  if (budgets.empty()) throw ConfigError("sweep needs at least one photon budget");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0.0)) throw ConfigError("photon budgets must be positive");
    if (i > 0 && !(budgets[i] > budgets[i - 1])) {
      throw ConfigError("photon budgets must be sorted ascending");
    }
  }
  if (variants.empty()) throw ConfigError("sweep needs at least one loss variant");
  if (repetitions < 1) throw ConfigError("sweep needs at least one repetition");
}

SweepSpec sweep_from_json(const nlohmann::json& j) {
  SweepSpec s;
  if (!j.is_object()) throw ConfigError("sweep spec must be a JSON object");
  if (const auto it = j.find("scene"); it != j.end()) s.scene = scene_from_json(*it);
  if (const auto it = j.find("reconstruction"); it != j.end()) {
    s.recon = recon_config_from_json(*it);
  }
  read_field(j, "budgets", s.budgets);
  if (const auto it = j.find("variants"); it != j.end()) {
    s.variants.clear();
    for (const auto& name : *it) s.variants.push_back(parse_sweep_variant(name.get<std::string>()));
  }
  read_field(j, "repetitions", s.repetitions);
  read_field(j, "base_seed", s.base_seed);
  read_field(j, "eval_fraction", s.eval_fraction);
  read_field(j, "record_wall_time", s.record_wall_time);
  s.validate();
  return s;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t nb = spec.budgets.size();
  const std::size_t nv = spec.variants.size();
  const std::size_t ns = spec.repetitions;
  std::vector<SweepRow> rows(nb * nv * ns);

  // One task per (budget, seed); variants run in sequence on the shared dataset.
  const std::size_t tasks = nb * ns;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t b = t / ns;
      const std::size_t s = t % ns;
      const std::uint64_t seed = spec.base_seed + s;
      const auto acq = simulate_acquisition(spec.scene, spec.budgets[b], seed);
      const auto region = illuminated_region(spec.scene.object_shape, acq.probe,
                                             acq.dataset.positions, spec.eval_fraction);
      for (std::size_t v = 0; v < nv; ++v) {
        ReconstructionConfig config = spec.recon;
        config.loss = loss_for(spec.variants[v]);
        config.loss.epsilon = spec.recon.loss.epsilon;
        config.mode = ReconstructionMode::ObjectOnly;
        config.initial_probe = acq.probe;
        config.threads = 1;

        SweepRow row{spec.budgets[b], spec.variants[v], seed, 0.0, 0.0, 0.0};
        try {
          const auto report = reconstruct(acq.dataset, config);
          row.correlation = correlation(acq.object, report.object, region);
          row.final_fidelity = report.final_fidelity;
          row.wall_ms = spec.record_wall_time ? report.wall_ms : 0.0;
        } catch (const DivergenceError&) {
          row.correlation = std::numeric_limits<double>::quiet_NaN();
          row.final_fidelity = std::numeric_limits<double>::quiet_NaN();
        }
        rows[(b * nv + v) * ns + s] = row;
      }
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(tasks)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.17g,%s,%llu,%.17g,%.17g,%.3f\n", r.budget,
                  std::string(to_string(r.variant)).c_str(),
                  static_cast<unsigned long long>(r.seed), r.correlation, r.final_fidelity,
                  r.wall_ms);
    out += line;
  }
  return out;
}

}  // namespace pgptycho::cli
